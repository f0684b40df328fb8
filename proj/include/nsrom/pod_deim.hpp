#pragma once

// Offline model reduction: two-sided POD bases from snapshot matrices,
// Q-DEIM interpolation indices, and the assembly of every rank-sized
// matrix the online integrator needs. The nonlinear terms are evaluated
// online through sampled basis rows only, so no operation here or in
// ns_reduced touches a full-order dimension after assembly.

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "nsrom/grid.hpp"
#include "nsrom/ns_full.hpp"
#include "nsrom/sylvester.hpp"

namespace nsrom {

struct PodBasisPair {
  Mat left, right;
  Vec sigma_left, sigma_right;  // singular values of the stacked matrices
};

namespace detail {

// minimal k with sqrt(sum_{i>=k} s_i^2) / sqrt(sum s_i^2) <= tol
inline int energyRank(const Vec& s, double tol) {
  double total = s.squaredNorm();
  if (total <= 0.0) throw std::invalid_argument("energyRank: zero snapshot family");
  double tail = total;
  for (int k = 0; k < s.size(); ++k) {
    if (std::sqrt(tail / total) <= tol && k > 0) return k;
    tail -= s(k) * s(k);
  }
  // full rank, but never count trailing numerically-zero directions
  int k = static_cast<int>(s.size());
  while (k > 1 && s(k - 1) <= 1e-14 * s(0)) --k;
  return k;
}

inline Mat stackHorizontal(const std::vector<Mat>& snaps, bool transposed) {
  const auto r = transposed ? snaps[0].cols() : snaps[0].rows();
  const auto c = transposed ? snaps[0].rows() : snaps[0].cols();
  Mat S(r, c * static_cast<Eigen::Index>(snaps.size()));
  for (size_t i = 0; i < snaps.size(); ++i) {
    if (snaps[i].rows() != snaps[0].rows() || snaps[i].cols() != snaps[0].cols())
      throw std::invalid_argument("two_sided_pod: inconsistent snapshot dimensions");
    S.middleCols(c * static_cast<Eigen::Index>(i), c) =
        transposed ? snaps[i].transpose() : snaps[i];
  }
  return S;
}

}  // namespace detail

// Left basis: leading left singular vectors of [S_1, ..., S_ns];
// right basis: same for the stacked transposes. Ranks chosen by the
// relative tail-energy rule with tolerance tol on each side.
inline PodBasisPair two_sided_pod(const std::vector<Mat>& snaps, double tol) {
  if (snaps.empty()) throw std::invalid_argument("two_sided_pod: empty snapshot list");
  if (tol <= 0.0 || tol > 1.0) throw std::invalid_argument("two_sided_pod: tol must be in (0,1]");
  PodBasisPair out;
  {
    Eigen::BDCSVD<Mat> svd(detail::stackHorizontal(snaps, false), Eigen::ComputeThinU);
    out.sigma_left = svd.singularValues();
    out.left = svd.matrixU().leftCols(detail::energyRank(out.sigma_left, tol));
  }
  {
    Eigen::BDCSVD<Mat> svd(detail::stackHorizontal(snaps, true), Eigen::ComputeThinU);
    out.sigma_right = svd.singularValues();
    out.right = svd.matrixU().leftCols(detail::energyRank(out.sigma_right, tol));
  }
  return out;
}

// Q-DEIM: the interpolation rows are the column pivots of a column-pivoted
// QR factorization of Phi^T.
inline std::vector<int> qdeim_indices(const Mat& Phi) {
  const int p = static_cast<int>(Phi.cols());
  if (p > Phi.rows()) throw std::invalid_argument("qdeim_indices: more columns than rows");
  Eigen::ColPivHouseholderQR<Mat> qr(Phi.transpose());
  if (qr.rank() < p) throw std::invalid_argument("qdeim_indices: rank-deficient basis");
  auto perm = qr.colsPermutation().indices();
  std::vector<int> idx(p);
  for (int i = 0; i < p; ++i) idx[i] = perm(i);
  return idx;
}

struct SnapshotSet {
  std::vector<Mat> U, V, P, FU, FV;

  int count() const { return static_cast<int>(U.size()); }
};

struct ReducedBasis {
  Mat Ul, Ur;        // (nx-1) x k1l, ny x k1r
  Mat Vl, Vr;        // nx x k2l, (ny-1) x k2r
  Mat Pl, Pr;        // nx x k3l, ny x k3r
  Mat PhiUl, PhiUr;  // DEIM bases for F_U
  Mat PhiVl, PhiVr;  // DEIM bases for F_V
  std::vector<int> idxUl, idxUr, idxVl, idxVr;
  double tol = 0.0;

  int k1l() const { return static_cast<int>(Ul.cols()); }
  int k1r() const { return static_cast<int>(Ur.cols()); }
  int k2l() const { return static_cast<int>(Vl.cols()); }
  int k2r() const { return static_cast<int>(Vr.cols()); }
  int k3l() const { return static_cast<int>(Pl.cols()); }
  int k3r() const { return static_cast<int>(Pr.cols()); }
};

inline ReducedBasis build_reduced_basis(const SnapshotSet& snaps, double tol,
                                        double deim_tol = -1.0) {
  if (deim_tol <= 0.0) deim_tol = tol;
  auto nonzero = [](const std::vector<Mat>& fam, const char* name) {
    if (fam.empty()) throw std::invalid_argument(std::string("build_reduced_basis: empty ") + name + " snapshot family");
    double m = 0.0;
    for (const auto& s : fam) m = std::max(m, s.cwiseAbs().maxCoeff());
    if (m == 0.0) throw std::invalid_argument(std::string("build_reduced_basis: all-zero ") + name + " snapshot family");
  };
  nonzero(snaps.U, "U");
  nonzero(snaps.V, "V");
  nonzero(snaps.P, "P");
  nonzero(snaps.FU, "F_U");
  nonzero(snaps.FV, "F_V");

  ReducedBasis b;
  b.tol = tol;
  PodBasisPair u = two_sided_pod(snaps.U, tol);
  PodBasisPair v = two_sided_pod(snaps.V, tol);
  PodBasisPair p = two_sided_pod(snaps.P, tol);
  PodBasisPair fu = two_sided_pod(snaps.FU, deim_tol);
  PodBasisPair fv = two_sided_pod(snaps.FV, deim_tol);
  b.Ul = u.left;   b.Ur = u.right;
  b.Vl = v.left;   b.Vr = v.right;
  b.Pl = p.left;   b.Pr = p.right;
  b.PhiUl = fu.left;  b.PhiUr = fu.right;
  b.PhiVl = fv.left;  b.PhiVr = fv.right;
  b.idxUl = qdeim_indices(b.PhiUl);
  b.idxUr = qdeim_indices(b.PhiUr);
  b.idxVl = qdeim_indices(b.PhiVl);
  b.idxVr = qdeim_indices(b.PhiVr);
  return b;
}

// A boundary trace sampled once at a fixed set of points; online evaluation
// is sum over terms of (stored profile values) * theta(t, alpha).
struct SampledTrace {
  std::vector<TraceTerm> terms;
  std::vector<Vec> prof;
  int n = 0;

  static SampledTrace build(const WallTrace& w, const std::vector<double>& coords) {
    SampledTrace st;
    st.n = static_cast<int>(coords.size());
    for (const auto& tm : w.terms) {
      Vec p(st.n);
      for (int i = 0; i < st.n; ++i) p(i) = tm.profile(coords[i]);
      st.terms.push_back(tm);
      st.prof.push_back(p);
    }
    return st;
  }
  Vec eval(double t, double a) const {
    Vec v = Vec::Zero(n);
    for (size_t k = 0; k < terms.size(); ++k) v += prof[k] * terms[k].theta(t, a);
    return v;
  }
};

// A projected boundary contribution: constant matrix times the separable
// time/control factor of one trace term.
struct BoundaryConstant {
  Mat C;
  TraceTerm term;
};

inline void accumulate_boundary(Mat& acc, const std::vector<BoundaryConstant>& terms,
                                double t, double alpha) {
  for (const auto& bcn : terms) acc += bcn.C * bcn.term.theta(t, alpha);
}

namespace detail {

// rows idx[a] + offset of B; out-of-range rows zeroed, validity in ok
inline Mat sampleRows(const Mat& B, const std::vector<int>& idx, int offset,
                      std::vector<char>* ok = nullptr) {
  Mat S = Mat::Zero(static_cast<Eigen::Index>(idx.size()), B.cols());
  if (ok) ok->assign(idx.size(), 0);
  for (size_t a = 0; a < idx.size(); ++a) {
    int r = idx[a] + offset;
    if (r >= 0 && r < B.rows()) {
      S.row(static_cast<Eigen::Index>(a)) = B.row(r);
      if (ok) (*ok)[a] = 1;
    }
  }
  return S;
}

}  // namespace detail

// Everything needed to evaluate the sampled entries D_l^T F_U D_r from the
// reduced coordinates alone: basis rows at the interpolation indices and
// their stencil neighbours, plus the wall traces sampled at the same points.
struct DeimUData {
  std::vector<int> I, J;  // sampled rows of F_U (u-faces) and columns (cells)
  int ny = 0;
  double hx = 0.0, hy = 0.0;

  Mat UlRm, UlR0, UlRp;   // Ul rows I-1, I, I+1 (masked)
  Mat UrCm, UrC0, UrCp;   // Ur rows J-1, J, J+1 (masked)
  Mat VlR0, VlRp;         // Vl rows I, I+1
  Mat VrCm, VrC0;         // Vr rows J-1, J (masked)
  std::vector<char> rowm_ok, rowp_ok;

  SampledTrace uW_J, uE_J;        // at yCenter(J)
  SampledTrace uS_I, uN_I;        // at xFace(I+1)
  SampledTrace vS_I, vS_Ip;       // at xCenter(I), xCenter(I+1)
  SampledTrace vN_I, vN_Ip;

  static DeimUData build(const ReducedBasis& b, const GridSpec& g,
                         const BoundaryConditions& bc) {
    DeimUData d;
    d.I = b.idxUl;
    d.J = b.idxUr;
    d.ny = g.ny;
    d.hx = g.hx();
    d.hy = g.hy();
    d.UlRm = detail::sampleRows(b.Ul, d.I, -1, &d.rowm_ok);
    d.UlR0 = detail::sampleRows(b.Ul, d.I, 0);
    d.UlRp = detail::sampleRows(b.Ul, d.I, +1, &d.rowp_ok);
    d.UrCm = detail::sampleRows(b.Ur, d.J, -1);
    d.UrC0 = detail::sampleRows(b.Ur, d.J, 0);
    d.UrCp = detail::sampleRows(b.Ur, d.J, +1);
    d.VlR0 = detail::sampleRows(b.Vl, d.I, 0);
    d.VlRp = detail::sampleRows(b.Vl, d.I, +1);
    d.VrCm = detail::sampleRows(b.Vr, d.J, -1);
    d.VrC0 = detail::sampleRows(b.Vr, d.J, 0);

    std::vector<double> ycJ, xfI, xcI, xcIp;
    for (int j : d.J) ycJ.push_back(g.yCenter(j));
    for (int i : d.I) {
      xfI.push_back(g.xFace(i + 1));
      xcI.push_back(g.xCenter(i));
      xcIp.push_back(g.xCenter(i + 1));
    }
    d.uW_J = SampledTrace::build(bc.uW, ycJ);
    d.uE_J = SampledTrace::build(bc.uE, ycJ);
    d.uS_I = SampledTrace::build(bc.uS, xfI);
    d.uN_I = SampledTrace::build(bc.uN, xfI);
    d.vS_I = SampledTrace::build(bc.vS, xcI);
    d.vS_Ip = SampledTrace::build(bc.vS, xcIp);
    d.vN_I = SampledTrace::build(bc.vN, xcI);
    d.vN_Ip = SampledTrace::build(bc.vN, xcIp);
    return d;
  }

  // D_l^T F_U(lift(Uh), lift(Vh)) D_r without lifting anything.
  Mat eval(const Mat& Uh, const Mat& Vh, double t, double alpha, double gamma) const {
    const int pl = static_cast<int>(I.size()), pr = static_cast<int>(J.size());
    Mat Mrm = UlRm * Uh * UrC0.transpose();  // U(i-1, j)
    Mat Mr0 = UlR0 * Uh * UrC0.transpose();  // U(i,   j)
    Mat Mrp = UlRp * Uh * UrC0.transpose();  // U(i+1, j)
    Mat Mcm = UlR0 * Uh * UrCm.transpose();  // U(i, j-1)
    Mat Mcp = UlR0 * Uh * UrCp.transpose();  // U(i, j+1)
    Mat V0m = VlR0 * Vh * VrCm.transpose();  // V(i,   j-1)
    Mat V0c = VlR0 * Vh * VrC0.transpose();  // V(i,   j)
    Mat Vpm = VlRp * Vh * VrCm.transpose();  // V(i+1, j-1)
    Mat Vpc = VlRp * Vh * VrC0.transpose();  // V(i+1, j)

    Vec uW = uW_J.eval(t, alpha), uE = uE_J.eval(t, alpha);
    Vec uS = uS_I.eval(t, alpha), uN = uN_I.eval(t, alpha);
    Vec vS0 = vS_I.eval(t, alpha), vSp = vS_Ip.eval(t, alpha);
    Vec vN0 = vN_I.eval(t, alpha), vNp = vN_Ip.eval(t, alpha);

    Mat S(pl, pr);
    for (int a = 0; a < pl; ++a)
      for (int b = 0; b < pr; ++b) {
        const int j = J[b];
        const double u0 = Mr0(a, b);
        const double um = rowm_ok[a] ? Mrm(a, b) : uW(b);
        const double up = rowp_ok[a] ? Mrp(a, b) : uE(b);
        // x part: cells i and i+1 of q = uc^2 - gamma |uc| udx
        double uc0 = 0.5 * (um + u0), ud0 = 0.5 * (u0 - um);
        double uc1 = 0.5 * (u0 + up), ud1 = 0.5 * (up - u0);
        double q0 = uc0 * uc0 - gamma * std::abs(uc0) * ud0;
        double q1 = uc1 * uc1 - gamma * std::abs(uc1) * ud1;
        double s = (q1 - q0) / hx;
        // y part: corner fluxes at interfaces j and j+1
        double ua0, udy0, va0;
        if (j == 0) {
          ua0 = uS(a);
          udy0 = u0 - uS(a);
          va0 = 0.5 * (vS0(a) + vSp(a));
        } else {
          ua0 = 0.5 * (Mcm(a, b) + u0);
          udy0 = 0.5 * (u0 - Mcm(a, b));
          va0 = 0.5 * (V0m(a, b) + Vpm(a, b));
        }
        double ua1, udy1, va1;
        if (j == ny - 1) {
          ua1 = uN(a);
          udy1 = uN(a) - u0;
          va1 = 0.5 * (vN0(a) + vNp(a));
        } else {
          ua1 = 0.5 * (u0 + Mcp(a, b));
          udy1 = 0.5 * (Mcp(a, b) - u0);
          va1 = 0.5 * (V0c(a, b) + Vpc(a, b));
        }
        double h0 = ua0 * va0 - gamma * udy0 * std::abs(va0);
        double h1 = ua1 * va1 - gamma * udy1 * std::abs(va1);
        S(a, b) = s + (h1 - h0) / hy;
      }
    return S;
  }
};

// Mirror structure for F_V: sampled rows are v-faces (x direction), sampled
// columns are cells in y.
struct DeimVData {
  std::vector<int> I, J;
  int nx = 0, ny = 0;
  double hx = 0.0, hy = 0.0;

  Mat VlRm, VlR0, VlRp;   // Vl rows I-1, I, I+1 (masked)
  Mat VrCm, VrC0, VrCp;   // Vr rows J-1, J, J+1 (masked)
  Mat UlRm, UlR0;         // Ul rows I-1, I (masked)
  Mat UrC0, UrCp;         // Ur rows J, J+1
  std::vector<char> rowm_ok, rowp_ok, ulm_ok, ul0_ok;

  SampledTrace vS_I, vN_I;        // at xCenter(I)
  SampledTrace vW_J, vE_J;        // at yFace(J+1)
  SampledTrace uW_J, uW_Jp;       // at yCenter(J), yCenter(J+1)
  SampledTrace uE_J, uE_Jp;

  static DeimVData build(const ReducedBasis& b, const GridSpec& g,
                         const BoundaryConditions& bc) {
    DeimVData d;
    d.I = b.idxVl;
    d.J = b.idxVr;
    d.nx = g.nx;
    d.ny = g.ny;
    d.hx = g.hx();
    d.hy = g.hy();
    d.VlRm = detail::sampleRows(b.Vl, d.I, -1, &d.rowm_ok);
    d.VlR0 = detail::sampleRows(b.Vl, d.I, 0);
    d.VlRp = detail::sampleRows(b.Vl, d.I, +1, &d.rowp_ok);
    d.VrCm = detail::sampleRows(b.Vr, d.J, -1);
    d.VrC0 = detail::sampleRows(b.Vr, d.J, 0);
    d.VrCp = detail::sampleRows(b.Vr, d.J, +1);
    d.UlRm = detail::sampleRows(b.Ul, d.I, -1, &d.ulm_ok);
    d.UlR0 = detail::sampleRows(b.Ul, d.I, 0, &d.ul0_ok);
    d.UrC0 = detail::sampleRows(b.Ur, d.J, 0);
    d.UrCp = detail::sampleRows(b.Ur, d.J, +1);

    std::vector<double> xcI, yfJ, ycJ, ycJp;
    for (int i : d.I) xcI.push_back(g.xCenter(i));
    for (int j : d.J) {
      yfJ.push_back(g.yFace(j + 1));
      ycJ.push_back(g.yCenter(j));
      ycJp.push_back(g.yCenter(j + 1));
    }
    d.vS_I = SampledTrace::build(bc.vS, xcI);
    d.vN_I = SampledTrace::build(bc.vN, xcI);
    d.vW_J = SampledTrace::build(bc.vW, yfJ);
    d.vE_J = SampledTrace::build(bc.vE, yfJ);
    d.uW_J = SampledTrace::build(bc.uW, ycJ);
    d.uW_Jp = SampledTrace::build(bc.uW, ycJp);
    d.uE_J = SampledTrace::build(bc.uE, ycJ);
    d.uE_Jp = SampledTrace::build(bc.uE, ycJp);
    return d;
  }

  Mat eval(const Mat& Uh, const Mat& Vh, double t, double alpha, double gamma) const {
    const int pl = static_cast<int>(I.size()), pr = static_cast<int>(J.size());
    Mat Vrm = VlRm * Vh * VrC0.transpose();  // V(i-1, j)
    Mat Vr0 = VlR0 * Vh * VrC0.transpose();  // V(i,   j)
    Mat Vrp = VlRp * Vh * VrC0.transpose();  // V(i+1, j)
    Mat Vcm = VlR0 * Vh * VrCm.transpose();  // V(i, j-1)
    Mat Vcp = VlR0 * Vh * VrCp.transpose();  // V(i, j+1)
    Mat Umj = UlRm * Uh * UrC0.transpose();  // U(i-1, j)
    Mat Ump = UlRm * Uh * UrCp.transpose();  // U(i-1, j+1)
    Mat U0j = UlR0 * Uh * UrC0.transpose();  // U(i,   j)
    Mat U0p = UlR0 * Uh * UrCp.transpose();  // U(i,   j+1)

    Vec vS = vS_I.eval(t, alpha), vN = vN_I.eval(t, alpha);
    Vec vW = vW_J.eval(t, alpha), vE = vE_J.eval(t, alpha);
    Vec uWj = uW_J.eval(t, alpha), uWp = uW_Jp.eval(t, alpha);
    Vec uEj = uE_J.eval(t, alpha), uEp = uE_Jp.eval(t, alpha);

    Mat S(pl, pr);
    for (int a = 0; a < pl; ++a)
      for (int b = 0; b < pr; ++b) {
        const int i = I[a], j = J[b];
        const double v0 = Vr0(a, b);
        const double vm = (j > 0) ? Vcm(a, b) : vS(a);
        const double vp = (j < ny - 2) ? Vcp(a, b) : vN(a);
        // y part: cells j and j+1 of p = vc^2 - gamma |vc| vdy
        double vc0 = 0.5 * (vm + v0), vd0 = 0.5 * (v0 - vm);
        double vc1 = 0.5 * (v0 + vp), vd1 = 0.5 * (vp - v0);
        double p0 = vc0 * vc0 - gamma * std::abs(vc0) * vd0;
        double p1 = vc1 * vc1 - gamma * std::abs(vc1) * vd1;
        double s = (p1 - p0) / hy;
        // x part: corner fluxes at interfaces i and i+1
        double va0, vdx0, ua0;
        if (i == 0) {
          va0 = vW(b);
          vdx0 = v0 - vW(b);
          ua0 = 0.5 * (uWj(b) + uWp(b));
        } else {
          va0 = 0.5 * (Vrm(a, b) + v0);
          vdx0 = 0.5 * (v0 - Vrm(a, b));
          ua0 = 0.5 * (Umj(a, b) + Ump(a, b));
        }
        double va1, vdx1, ua1;
        if (i == nx - 1) {
          va1 = vE(b);
          vdx1 = vE(b) - v0;
          ua1 = 0.5 * (uEj(b) + uEp(b));
        } else {
          va1 = 0.5 * (v0 + Vrp(a, b));
          vdx1 = 0.5 * (Vrp(a, b) - v0);
          ua1 = 0.5 * (U0j(a, b) + U0p(a, b));
        }
        double h0 = ua0 * va0 - gamma * vdx0 * std::abs(ua0);
        double h1 = ua1 * va1 - gamma * vdx1 * std::abs(ua1);
        S(a, b) = s + (h1 - h0) / hx;
      }
    return S;
  }
};

struct ReducedOperators {
  GridSpec grid;
  ReducedBasis basis;

  // projected viscous operators
  Mat A1U, A2U, A1V, A2V;
  // projected pressure Laplacian pair, factorized (dt-independent)
  Mat Lp1, Lp2;
  SylvesterFactorization pressure;
  // reduced divergence products: rhs = DivUL * Uh * UrPr + PlVl * Vh * DivVR
  Mat DivUL;  // Pl^T B1_U Ul
  Mat UrPr;   // Ur^T Pr
  Mat PlVl;   // Pl^T Vl
  Mat DivVR;  // Vr^T B2_V^T Pr
  // velocity correction: Uh -= GxUP * Qh * UrPr^T, Vh -= PlVl^T^T... (see reduced_step)
  Mat GxUP;     // Ul^T Gx Pl
  Mat GyPrVr;   // (Gy Pr)^T Vr
  // DEIM oblique projectors and sampled data
  Mat PLu, PRu, PLv, PRv;
  DeimUData deimU;
  DeimVData deimV;
  double condDUl = 0, condDUr = 0, condDVl = 0, condDVr = 0;
  // boundary contributions (constant matrix times separable factor)
  std::vector<BoundaryConstant> viscBU, viscBV;  // viscous rhs, k1/k2 sized
  std::vector<BoundaryConstant> divB;            // padded divergence, k3 sized
  // projected body force / actuation fields
  Mat fU, fV, actU, actV;
  // frozen upwind parameter for online use (set by the offline pipeline)
  double gamma_up = 0.0;
};

namespace detail {

// oblique projector pair for one DEIM family; records cond(D^T Phi)
inline void deimProjectors(const Mat& Bl, const Mat& Br, const Mat& PhiL, const Mat& PhiR,
                           const std::vector<int>& idxL, const std::vector<int>& idxR,
                           Mat& PL, Mat& PR, double& condL, double& condR) {
  Mat DPhiL = sampleRows(PhiL, idxL, 0);  // pl x pl
  Mat DPhiR = sampleRows(PhiR, idxR, 0);  // pr x pr
  Eigen::JacobiSVD<Mat> sl(DPhiL), sr(DPhiR);
  condL = sl.singularValues()(0) / sl.singularValues().tail(1)(0);
  condR = sr.singularValues()(0) / sr.singularValues().tail(1)(0);
  if (!std::isfinite(condL) || !std::isfinite(condR))
    throw std::runtime_error("assemble_reduced: singular DEIM interpolation factor");
  // PL = Bl^T PhiL (D^T PhiL)^{-1};  PR = (PhiR^T D)^{-1} PhiR^T Br
  PL = DPhiL.transpose().partialPivLu().solve(PhiL.transpose() * Bl).transpose();
  PR = DPhiR.transpose().partialPivLu().solve(PhiR.transpose() * Br);
}

}  // namespace detail

inline ReducedOperators assemble_reduced(const OperatorSet& ops, const ReducedBasis& b,
                                         const BoundaryConditions& bc) {
  const GridSpec& g = ops.grid;
  ReducedOperators r;
  r.grid = g;
  r.basis = b;

  r.A1U = b.Ul.transpose() * ops.A1_U * b.Ul;
  r.A2U = b.Ur.transpose() * ops.A2_U * b.Ur;
  r.A1V = b.Vl.transpose() * ops.A1_V * b.Vl;
  r.A2V = b.Vr.transpose() * ops.A2_V * b.Vr;

  r.Lp1 = b.Pl.transpose() * ops.Lp1 * b.Pl;
  r.Lp2 = b.Pr.transpose() * ops.Lp2 * b.Pr;
  r.pressure = SylvesterFactorization::factorize(r.Lp1, r.Lp2);

  r.DivUL = b.Pl.transpose() * ops.B1_U * b.Ul;
  r.UrPr = b.Ur.transpose() * b.Pr;
  r.PlVl = b.Pl.transpose() * b.Vl;
  r.DivVR = b.Vr.transpose() * ops.B2_V.transpose() * b.Pr;

  r.GxUP = b.Ul.transpose() * ops.Gx * b.Pl;
  r.GyPrVr = (ops.Gy * b.Pr).transpose() * b.Vr;

  detail::deimProjectors(b.Ul, b.Ur, b.PhiUl, b.PhiUr, b.idxUl, b.idxUr,
                         r.PLu, r.PRu, r.condDUl, r.condDUr);
  detail::deimProjectors(b.Vl, b.Vr, b.PhiVl, b.PhiVr, b.idxVl, b.idxVr,
                         r.PLv, r.PRv, r.condDVl, r.condDVr);
  r.deimU = DeimUData::build(b, g, bc);
  r.deimV = DeimVData::build(b, g, bc);

  // boundary contributions, one constant matrix per separable trace term
  const double eps = g.viscosity(), hx = g.hx(), hy = g.hy();
  for (const auto& tt : bc.allTerms()) {
    Vec prof = BoundaryConditions::sampleTermProfile(g, tt.wall, *tt.term);
    switch (tt.wall) {
      case 0:  // uN: viscous col ny-1 of the U rhs
        r.viscBU.push_back({(2.0 * eps / (hy * hy)) *
                                (b.Ul.transpose() * prof) * b.Ur.row(g.ny - 1),
                            *tt.term});
        break;
      case 1:  // uS
        r.viscBU.push_back({(2.0 * eps / (hy * hy)) *
                                (b.Ul.transpose() * prof) * b.Ur.row(0),
                            *tt.term});
        break;
      case 2:  // uE: viscous row nx-2; divergence row nx-1 (+)
        r.viscBU.push_back({(eps / (hx * hx)) *
                                (b.Ul.row(g.nx - 2).transpose() * (prof.transpose() * b.Ur)),
                            *tt.term});
        r.divB.push_back({(1.0 / hx) *
                              (b.Pl.row(g.nx - 1).transpose() * (prof.transpose() * b.Pr)),
                          *tt.term});
        break;
      case 3:  // uW: viscous row 0; divergence row 0 (-)
        r.viscBU.push_back({(eps / (hx * hx)) *
                                (b.Ul.row(0).transpose() * (prof.transpose() * b.Ur)),
                            *tt.term});
        r.divB.push_back({(-1.0 / hx) *
                              (b.Pl.row(0).transpose() * (prof.transpose() * b.Pr)),
                          *tt.term});
        break;
      case 4:  // vN: viscous col ny-2 of V rhs; divergence col ny-1 (+)
        r.viscBV.push_back({(eps / (hy * hy)) *
                                (b.Vl.transpose() * prof) * b.Vr.row(g.ny - 2),
                            *tt.term});
        r.divB.push_back({(1.0 / hy) * (b.Pl.transpose() * prof) * b.Pr.row(g.ny - 1),
                          *tt.term});
        break;
      case 5:  // vS: viscous col 0; divergence col 0 (-)
        r.viscBV.push_back({(eps / (hy * hy)) * (b.Vl.transpose() * prof) * b.Vr.row(0),
                            *tt.term});
        r.divB.push_back({(-1.0 / hy) * (b.Pl.transpose() * prof) * b.Pr.row(0),
                          *tt.term});
        break;
      case 6:  // vE: viscous row nx-1
        r.viscBV.push_back({(2.0 * eps / (hx * hx)) *
                                (b.Vl.row(g.nx - 1).transpose() * (prof.transpose() * b.Vr)),
                            *tt.term});
        break;
      case 7:  // vW: viscous row 0
        r.viscBV.push_back({(2.0 * eps / (hx * hx)) *
                                (b.Vl.row(0).transpose() * (prof.transpose() * b.Vr)),
                            *tt.term});
        break;
    }
  }
  return r;
}

// Reduced nonlinear terms, cost independent of the grid size.
inline Mat deim_nonlinear_U(const Mat& Uh, const Mat& Vh, const ReducedOperators& r,
                            double t, double alpha, double gamma) {
  return r.PLu * r.deimU.eval(Uh, Vh, t, alpha, gamma) * r.PRu;
}

inline Mat deim_nonlinear_V(const Mat& Uh, const Mat& Vh, const ReducedOperators& r,
                            double t, double alpha, double gamma) {
  return r.PLv * r.deimV.eval(Uh, Vh, t, alpha, gamma) * r.PRv;
}

}  // namespace nsrom
