#pragma once

// Artifact serialization: raw binary matrices (16-byte header of two
// little-endian uint64 dimensions, then column-major float64 data), CSV
// tables, and JSON manifests for the offline reduction outputs.

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsrom/grid.hpp"
#include "nsrom/pod_deim.hpp"

#include <json.hpp>

namespace nsrom {

inline void write_matrix(const std::filesystem::path& path, const Mat& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_matrix: cannot open " + path.string());
  uint64_t dims[2] = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
  os.write(reinterpret_cast<const char*>(dims), 16);
  os.write(reinterpret_cast<const char*>(m.data()),
           static_cast<std::streamsize>(sizeof(double)) * m.size());
  if (!os) throw std::runtime_error("write_matrix: write failed for " + path.string());
}

inline Mat read_matrix(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_matrix: cannot open " + path.string());
  uint64_t dims[2];
  is.read(reinterpret_cast<char*>(dims), 16);
  if (!is) throw std::runtime_error("read_matrix: truncated header in " + path.string());
  Mat m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
  is.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double)) * m.size());
  if (!is) throw std::runtime_error("read_matrix: truncated data in " + path.string());
  return m;
}

inline void write_csv(const std::filesystem::path& path,
                      const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_csv: cannot open " + path.string());
  for (size_t i = 0; i < header.size(); ++i)
    os << header[i] << (i + 1 < header.size() ? "," : "\n");
  os.precision(17);
  for (const auto& r : rows)
    for (size_t i = 0; i < r.size(); ++i)
      os << r[i] << (i + 1 < r.size() ? "," : "\n");
}

inline void write_matrix_csv(const std::filesystem::path& path, const Mat& m) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_matrix_csv: cannot open " + path.string());
  os.precision(17);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      os << m(i, j) << (j + 1 < m.cols() ? ',' : '\n');
}

// Serialize a reduced basis as one directory of binary matrices plus a
// JSON manifest of ranks, indices and grid metadata.
inline void save_basis(const std::filesystem::path& dir, const ReducedBasis& b,
                       const GridSpec& g) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const std::pair<const char*, const Mat*> mats[] = {
      {"Ul", &b.Ul}, {"Ur", &b.Ur}, {"Vl", &b.Vl},       {"Vr", &b.Vr},
      {"Pl", &b.Pl}, {"Pr", &b.Pr}, {"PhiUl", &b.PhiUl}, {"PhiUr", &b.PhiUr},
      {"PhiVl", &b.PhiVl}, {"PhiVr", &b.PhiVr}};
  for (const auto& [name, m] : mats) write_matrix(dir / (std::string(name) + ".bin"), *m);

  nlohmann::json j;
  j["grid"] = {{"nx", g.nx}, {"ny", g.ny}, {"bx", g.bx}, {"by", g.by},
               {"reynolds", g.reynolds}};
  j["tol"] = b.tol;
  j["ranks"] = {{"k1l", b.k1l()}, {"k1r", b.k1r()}, {"k2l", b.k2l()},
                {"k2r", b.k2r()}, {"k3l", b.k3l()}, {"k3r", b.k3r()}};
  j["deim"] = {{"idxUl", b.idxUl}, {"idxUr", b.idxUr},
               {"idxVl", b.idxVl}, {"idxVr", b.idxVr}};
  std::ofstream os(dir / "manifest.json");
  os << j.dump(2) << "\n";
}

inline ReducedBasis load_basis(const std::filesystem::path& dir, GridSpec* g = nullptr) {
  std::ifstream is(dir / "manifest.json");
  if (!is) throw std::runtime_error("load_basis: missing manifest in " + dir.string());
  nlohmann::json j;
  is >> j;
  ReducedBasis b;
  b.tol = j.at("tol").get<double>();
  b.idxUl = j.at("deim").at("idxUl").get<std::vector<int>>();
  b.idxUr = j.at("deim").at("idxUr").get<std::vector<int>>();
  b.idxVl = j.at("deim").at("idxVl").get<std::vector<int>>();
  b.idxVr = j.at("deim").at("idxVr").get<std::vector<int>>();
  b.Ul = read_matrix(dir / "Ul.bin");
  b.Ur = read_matrix(dir / "Ur.bin");
  b.Vl = read_matrix(dir / "Vl.bin");
  b.Vr = read_matrix(dir / "Vr.bin");
  b.Pl = read_matrix(dir / "Pl.bin");
  b.Pr = read_matrix(dir / "Pr.bin");
  b.PhiUl = read_matrix(dir / "PhiUl.bin");
  b.PhiUr = read_matrix(dir / "PhiUr.bin");
  b.PhiVl = read_matrix(dir / "PhiVl.bin");
  b.PhiVr = read_matrix(dir / "PhiVr.bin");
  if (g) {
    const auto& gj = j.at("grid");
    g->nx = gj.at("nx").get<int>();
    g->ny = gj.at("ny").get<int>();
    g->bx = gj.at("bx").get<double>();
    g->by = gj.at("by").get<double>();
    g->reynolds = gj.at("reynolds").get<double>();
  }
  return b;
}

}  // namespace nsrom
