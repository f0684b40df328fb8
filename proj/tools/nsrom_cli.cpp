// Batch driver for the staggered-grid flow solver, its tensor reduced-order
// model, and the tree-based dynamic programming controller.
//
// Subcommands:
//   simulate  full-order runs (matrix + sparse baseline), reduction, timings
//   offline   coarse-tree snapshot exploration and basis construction
//   control   reduced-order tree control run with full-order replay
//   report    merge the artifacts of prior commands into one summary

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "nsrom/io.hpp"
#include "nsrom/pipeline.hpp"
#include "nsrom/vec_model.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nsrom;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

std::vector<double> parseControls(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    if (!tok.empty()) out.push_back(std::stod(tok));
  }
  if (out.empty()) throw std::invalid_argument("controls: empty list");
  return out;
}

struct Config {
  int test = 1;
  std::vector<int> n{64};
  double dt = -1, T = -1;     // < 0 -> per-test default
  double tol = 1e-3;
  double epsT = -1;           // < 0 -> dt^2
  std::vector<double> controls;  // empty -> per-test default
  int Mhat = 2;
  double dtHat = -1;
  int maxLevels = 10;
  std::string out = "out";
  unsigned seed = 0;

  static Config fromJson(const json& j) {
    Config c;
    for (const auto& [key, val] : j.items()) {
      if (key == "test") c.test = val.get<int>();
      else if (key == "n") {
        if (val.is_array()) c.n = val.get<std::vector<int>>();
        else c.n = {val.get<int>()};
      }
      else if (key == "dt") c.dt = val.get<double>();
      else if (key == "T") c.T = val.get<double>();
      else if (key == "tol") c.tol = val.get<double>();
      else if (key == "epsT") c.epsT = val.get<double>();
      else if (key == "controls") c.controls = val.get<std::vector<double>>();
      else if (key == "Mhat") c.Mhat = val.get<int>();
      else if (key == "dtHat") c.dtHat = val.get<double>();
      else if (key == "maxLevels") c.maxLevels = val.get<int>();
      else if (key == "out") c.out = val.get<std::string>();
      else if (key == "seed") c.seed = val.get<unsigned>();
      else throw std::invalid_argument("config: unknown key '" + key + "'");
    }
    return c;
  }

  json toJson() const {
    return json{{"test", test},   {"n", n},         {"dt", dt},
                {"T", T},         {"tol", tol},     {"epsT", epsT},
                {"controls", controls}, {"Mhat", Mhat}, {"dtHat", dtHat},
                {"maxLevels", maxLevels}, {"out", out}, {"seed", seed}};
  }

  TestProblem problem(int gridN) const {
    TestProblem p = make_problem(test, gridN, tol);
    if (dt > 0) p.dt = dt;
    if (T > 0) p.T = T;
    if (epsT >= 0) p.epsT = epsT;
    if (!controls.empty()) p.controls = controls;
    return p;
  }
};

SnapshotSet trajectorySnapshots(const Trajectory& tr) {
  SnapshotSet s;
  for (const auto& st : tr.states) {
    s.U.push_back(st.U);
    s.V.push_back(st.V);
    s.P.push_back(st.P);
  }
  s.FU = tr.snapFU;
  s.FV = tr.snapFV;
  return s;
}

int cmdSimulate(const Config& cfg) {
  fs::create_directories(cfg.out);
  std::vector<std::vector<double>> timing;   // model tag, n, steps, total, per-step
  json summary;
  summary["rows"] = json::array();

  for (int n : cfg.n) {
    TestProblem p = cfg.problem(n);
    OperatorSet ops = build_operators(p.grid);
    const int n_t = p.n_t();

    auto t0 = std::chrono::steady_clock::now();
    Trajectory full = integrate_full(p.init, ops, p.dt, n_t, p.bc,
                                     with_actuation({}, p.act), {}, true);
    auto t1 = std::chrono::steady_clock::now();
    double fullSec = seconds(t0, t1);
    timing.push_back({1.0, double(n), double(n_t), fullSec, fullSec / n_t});

    if (n <= 64) {  // sparse Kronecker baseline, small grids only
      VecModel vm(ops, p.dt, p.bc, with_actuation({}, p.act));
      auto v0 = std::chrono::steady_clock::now();
      auto vtr = vm.integrate(p.init, n_t);
      auto v1 = std::chrono::steady_clock::now();
      double vecSec = seconds(v0, v1);
      timing.push_back({0.0, double(n), double(n_t), vecSec, vecSec / n_t});
      double vdiff = (vtr.back().U - full.states.back().U).lpNorm<Eigen::Infinity>();
      summary["vec_vs_matrix_maxdiff_n" + std::to_string(n)] = vdiff;
    }

    // reduce the recorded trajectory and replay it
    SnapshotSet snaps = trajectorySnapshots(full);
    ReducedBasis basis = build_reduced_basis(snaps, p.tol);
    double gmax = 0;
    for (const auto& st : full.states)
      gmax = std::max(gmax, upwind_gamma(st.U, st.V, p.dt, p.grid));
    ReducedOperators rops = make_reduced_operators(p, basis, gmax);
    ReducedState r0 = project(p.init, basis);
    auto r1 = std::chrono::steady_clock::now();
    auto rtr = reduced_integrate(r0, rops, p.dt, n_t);
    auto r2 = std::chrono::steady_clock::now();
    double redSec = seconds(r1, r2);
    timing.push_back({2.0, double(n), double(n_t), redSec, redSec / n_t});

    FullState lifted = lift(rtr.back(), basis);
    Mat diffU = full.states.back().U - lifted.U;
    write_matrix_csv(fs::path(cfg.out) / ("diff_U_n" + std::to_string(n) + ".csv"), diffU);
    write_matrix(fs::path(cfg.out) / ("U_n" + std::to_string(n) + ".bin"),
                 full.states.back().U);
    write_matrix(fs::path(cfg.out) / ("V_n" + std::to_string(n) + ".bin"),
                 full.states.back().V);
    write_matrix(fs::path(cfg.out) / ("P_n" + std::to_string(n) + ".bin"),
                 full.states.back().P);
    summary["lifted_maxdiff_n" + std::to_string(n)] = diffU.lpNorm<Eigen::Infinity>();
    summary["ranks_n" + std::to_string(n)] =
        json{basis.k1l(), basis.k1r(), basis.k2l(),
             basis.k2r(), basis.k3l(), basis.k3r()};
  }

  write_csv(fs::path(cfg.out) / "timing.csv",
            {"model", "n", "steps", "seconds", "seconds_per_step"}, timing);
  std::ofstream(fs::path(cfg.out) / "simulate.json") << summary.dump(2) << "\n";
  std::ofstream(fs::path(cfg.out) / "config.json") << cfg.toJson().dump(2) << "\n";
  std::cout << "simulate: wrote " << cfg.out << "/timing.csv ("
            << timing.size() << " rows)\n";
  return 0;
}

int cmdOffline(const Config& cfg) {
  fs::create_directories(cfg.out);
  TestProblem p = cfg.problem(cfg.n.front());
  OfflineOptions opt;
  opt.Mhat = cfg.Mhat;
  opt.dtHat = cfg.dtHat;
  opt.maxLevels = cfg.maxLevels;
  OfflineArtifacts art = build_offline(p, opt);
  save_basis(fs::path(cfg.out) / "basis", art.basis, p.grid);

  json j;
  j["test"] = p.test;
  j["n"] = cfg.n.front();
  j["tol"] = p.tol;
  j["gamma_up"] = art.gamma_up;
  j["snapshots"] = art.snaps.count();
  j["ranks"] = json{{"k1l", art.basis.k1l()}, {"k1r", art.basis.k1r()},
                    {"k2l", art.basis.k2l()}, {"k2r", art.basis.k2r()},
                    {"k3l", art.basis.k3l()}, {"k3r", art.basis.k3r()},
                    {"p1l", art.basis.idxUl.size()}, {"p1r", art.basis.idxUr.size()},
                    {"p2l", art.basis.idxVl.size()}, {"p2r", art.basis.idxVr.size()}};
  std::ofstream(fs::path(cfg.out) / "offline.json") << j.dump(2) << "\n";
  std::ofstream(fs::path(cfg.out) / "config.json") << cfg.toJson().dump(2) << "\n";
  std::cout << "offline: " << art.snaps.count() << " snapshots, ranks "
            << art.basis.k1l() << "/" << art.basis.k1r() << " "
            << art.basis.k2l() << "/" << art.basis.k2r() << " "
            << art.basis.k3l() << "/" << art.basis.k3r() << "\n";
  return 0;
}

int cmdControl(const Config& cfg) {
  fs::path dir = cfg.out;
  std::ifstream off(dir / "offline.json");
  if (!off) throw std::runtime_error("missing-artifacts: run offline first in " + cfg.out);
  json oj;
  off >> oj;
  int test = oj.at("test").get<int>();
  int n = oj.at("n").get<int>();
  double gamma = oj.at("gamma_up").get<double>();

  Config base = cfg;
  base.test = test;
  base.n = {n};
  TestProblem p = base.problem(n);
  GridSpec g;
  ReducedBasis basis = load_basis(dir / "basis", &g);
  if (g.nx != p.grid.nx || g.ny != p.grid.ny)
    throw std::runtime_error("config: offline grid does not match requested grid");

  ControlRun run = run_control(p, basis, gamma);

  const int M = static_cast<int>(p.controls.size());
  std::vector<std::vector<double>> rows;
  for (std::size_t k = 0; k < run.synth.controls.size(); ++k)
    rows.push_back({double(k), k * p.dt, run.synth.controls[k]});
  write_csv(dir / ("control_M" + std::to_string(M) + ".csv"),
            {"step", "t", "alpha"}, rows);
  {
    std::ofstream ts(dir / ("tree_M" + std::to_string(M) + ".csv"));
    dump_tree_csv(run.tree, run.values, ts);
  }

  json j;
  j["M"] = M;
  j["controls"] = p.controls;
  j["J_root"] = run.J_root;
  j["J_controlled"] = run.J_controlled;
  j["J_uncontrolled"] = run.J_uncontrolled;
  j["nodes"] = run.nodes;
  j["ratio_p"] = run.ratio_p;
  std::ofstream(dir / ("control_M" + std::to_string(M) + ".json")) << j.dump(2) << "\n";
  std::cout << "control: M=" << M << " J_controlled=" << run.J_controlled
            << " J_uncontrolled=" << run.J_uncontrolled << " nodes=" << run.nodes
            << " Ratio_p=" << run.ratio_p << "\n";
  return 0;
}

int cmdReport(const Config& cfg) {
  fs::path dir = cfg.out;
  std::vector<json> runs;
  if (fs::exists(dir))
    for (const auto& e : fs::directory_iterator(dir)) {
      std::string name = e.path().filename().string();
      if (name.rfind("control_M", 0) == 0 && e.path().extension() == ".json") {
        json j;
        std::ifstream(e.path()) >> j;
        runs.push_back(j);
      }
    }
  bool haveTiming = fs::exists(dir / "timing.csv");
  if (runs.empty() && !haveTiming)
    throw std::runtime_error("missing-artifacts: no command outputs in " + cfg.out);

  std::sort(runs.begin(), runs.end(),
            [](const json& a, const json& b) { return a.at("M") < b.at("M"); });

  std::vector<std::vector<double>> table;
  std::ofstream md(dir / "report.md");
  md << "# Run summary\n\n";
  if (!runs.empty()) {
    md << "| M | J | nodes | Ratio_p |\n|---|---|---|---|\n";
    md << "| uncontrolled | " << runs.front().at("J_uncontrolled").get<double>()
       << " | | |\n";
    for (const auto& r : runs) {
      md << "| " << r.at("M").get<int>() << " | " << r.at("J_controlled").get<double>()
         << " | " << r.at("nodes").get<std::size_t>() << " | "
         << r.at("ratio_p").get<double>() << " |\n";
      table.push_back({double(r.at("M").get<int>()), r.at("J_controlled").get<double>(),
                       double(r.at("nodes").get<std::size_t>()),
                       r.at("ratio_p").get<double>()});
    }
  }
  if (haveTiming) {
    md << "\nTimings: see `timing.csv` (model 0 = sparse baseline, 1 = matrix "
          "solver, 2 = reduced model).\n";
  }
  if (!table.empty())
    write_csv(dir / "report.csv", {"M", "J", "nodes", "Ratio_p"}, table);
  std::cout << "report: " << runs.size() << " control runs"
            << (haveTiming ? " + timings" : "") << " -> " << (dir / "report.md").string()
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staggered-grid flow solver with tensor model reduction and "
               "tree-based optimal control"};
  app.require_subcommand(1);

  std::string configPath, controlsFlag, outFlag;
  int testFlag = 0, nFlag = 0;
  double dtFlag = 0, tolFlag = 0;

  auto addCommon = [&](CLI::App* sub) {
    sub->add_option("--config", configPath, "JSON config file");
    sub->add_option("--test", testFlag, "test id 1..4");
    sub->add_option("--n", nFlag, "grid points per side");
    sub->add_option("--dt", dtFlag, "time step");
    sub->add_option("--tol", tolFlag, "reduction tolerance");
    sub->add_option("--controls", controlsFlag, "comma-separated control set");
    sub->add_option("--out", outFlag, "output directory");
  };
  CLI::App* sim = app.add_subcommand("simulate", "full and reduced model runs");
  CLI::App* offline = app.add_subcommand("offline", "snapshot exploration and reduction");
  CLI::App* control = app.add_subcommand("control", "reduced tree control run");
  CLI::App* report = app.add_subcommand("report", "merge artifacts into a summary");
  for (CLI::App* s : {sim, offline, control, report}) addCommon(s);

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg;
    if (!configPath.empty()) {
      std::ifstream is(configPath);
      if (!is) throw std::runtime_error("config: cannot open " + configPath);
      json j;
      is >> j;
      cfg = Config::fromJson(j);
    }
    if (testFlag) cfg.test = testFlag;
    if (nFlag) cfg.n = {nFlag};
    if (dtFlag > 0) cfg.dt = dtFlag;
    if (tolFlag > 0) cfg.tol = tolFlag;
    if (!controlsFlag.empty()) cfg.controls = parseControls(controlsFlag);
    if (!outFlag.empty()) cfg.out = outFlag;
    if (cfg.test < 1 || cfg.test > 4)
      throw std::invalid_argument("config: test id must be in 1..4");

    if (sim->parsed()) return cmdSimulate(cfg);
    if (offline->parsed()) return cmdOffline(cfg);
    if (control->parsed()) return cmdControl(cfg);
    return cmdReport(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: bad-input: " << e.what() << "\n";
    return 2;
  } catch (const std::runtime_error& e) {
    std::cerr << "error: runtime: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: internal: " << e.what() << "\n";
    return 3;
  }
}
