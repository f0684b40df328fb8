#pragma once

// Vectorized (Kronecker-form) full-order baseline: the same semi-implicit
// scheme as ns_full, but solved through sparse LU factorizations of the
// stacked systems instead of Sylvester eigendecompositions, with the
// advective terms evaluated by pointwise stencil loops. Serves as an
// independent correctness and timing reference at moderate grid sizes.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <vector>

#include "nsrom/grid.hpp"
#include "nsrom/ns_full.hpp"

namespace nsrom {

namespace vecdetail {

using SpMat = Eigen::SparseMatrix<double>;

// I (x) A + B (x) I for symmetric dense blocks, column-major vec layout
inline SpMat kronSum(const Mat& A, const Mat& B) {
  const int m = static_cast<int>(A.rows()), k = static_cast<int>(B.rows());
  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < k; ++j)
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c)
        if (A(r, c) != 0.0) trip.emplace_back(j * m + r, j * m + c, A(r, c));
  for (int r = 0; r < k; ++r)
    for (int c = 0; c < k; ++c)
      if (B(r, c) != 0.0)
        for (int i = 0; i < m; ++i) trip.emplace_back(r * m + i, c * m + i, B(r, c));
  SpMat s(m * k, m * k);
  s.setFromTriplets(trip.begin(), trip.end());
  return s;
}

// pointwise staggered advection, boundary traces inlined
inline double uAt(const Mat& U, const GridSpec& g, const BoundaryConditions& bc,
                  double t, double a, int i, int j) {
  if (i == 0) return bc.uW.eval(g.yCenter(j), t, a);
  if (i == g.nx) return bc.uE.eval(g.yCenter(j), t, a);
  return U(i - 1, j);
}
inline double vAt(const Mat& V, const GridSpec& g, const BoundaryConditions& bc,
                  double t, double a, int i, int j) {
  if (j == 0) return bc.vS.eval(g.xCenter(i), t, a);
  if (j == g.ny) return bc.vN.eval(g.xCenter(i), t, a);
  return V(i, j - 1);
}

inline Mat advectionU(const Mat& U, const Mat& V, const GridSpec& g,
                      const BoundaryConditions& bc, double t, double a, double gamma) {
  const int m = g.nx - 1, ny = g.ny;
  const double hx = g.hx(), hy = g.hy();
  Mat F(m, ny);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < ny; ++j) {
      auto q = [&](int cell) {
        double ul = uAt(U, g, bc, t, a, cell, j), ur = uAt(U, g, bc, t, a, cell + 1, j);
        double uc = 0.5 * (ul + ur), ud = 0.5 * (ur - ul);
        return uc * uc - gamma * std::abs(uc) * ud;
      };
      auto H = [&](int jj) {  // corner flux at y interface jj (0..ny)
        double ua, udy;
        if (jj == 0) {
          double uw = bc.uS.eval(g.xFace(i + 1), t, a);
          ua = uw;
          udy = U(i, 0) - uw;
        } else if (jj == ny) {
          double uw = bc.uN.eval(g.xFace(i + 1), t, a);
          ua = uw;
          udy = uw - U(i, ny - 1);
        } else {
          ua = 0.5 * (U(i, jj - 1) + U(i, jj));
          udy = 0.5 * (U(i, jj) - U(i, jj - 1));
        }
        double va = 0.5 * (vAt(V, g, bc, t, a, i, jj) + vAt(V, g, bc, t, a, i + 1, jj));
        return ua * va - gamma * udy * std::abs(va);
      };
      F(i, j) = (q(i + 1) - q(i)) / hx + (H(j + 1) - H(j)) / hy;
    }
  return F;
}

inline Mat advectionV(const Mat& U, const Mat& V, const GridSpec& g,
                      const BoundaryConditions& bc, double t, double a, double gamma) {
  const int nx = g.nx, q = g.ny - 1;
  const double hx = g.hx(), hy = g.hy();
  Mat F(nx, q);
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < q; ++j) {
      auto p = [&](int cell) {
        double vl = vAt(V, g, bc, t, a, i, cell), vr = vAt(V, g, bc, t, a, i, cell + 1);
        double vc = 0.5 * (vl + vr), vd = 0.5 * (vr - vl);
        return vc * vc - gamma * std::abs(vc) * vd;
      };
      auto H = [&](int ii) {  // corner flux at x interface ii (0..nx)
        double va, vdx;
        if (ii == 0) {
          double vw = bc.vW.eval(g.yFace(j + 1), t, a);
          va = vw;
          vdx = V(0, j) - vw;
        } else if (ii == nx) {
          double vw = bc.vE.eval(g.yFace(j + 1), t, a);
          va = vw;
          vdx = vw - V(nx - 1, j);
        } else {
          va = 0.5 * (V(ii - 1, j) + V(ii, j));
          vdx = 0.5 * (V(ii, j) - V(ii - 1, j));
        }
        double ua = 0.5 * (uAt(U, g, bc, t, a, ii, j) + uAt(U, g, bc, t, a, ii, j + 1));
        return ua * va - gamma * vdx * std::abs(ua);
      };
      F(i, j) = (p(j + 1) - p(j)) / hy + (H(i + 1) - H(i)) / hx;
    }
  return F;
}

}  // namespace vecdetail

class VecModel {
 public:
  VecModel(const OperatorSet& ops, double dt, BoundaryConditions bc, ForcingSpec forcing)
      : ops_(ops), g_(ops.grid), dt_(dt), bc_(std::move(bc)), forcing_(std::move(forcing)) {
    if (dt <= 0) throw std::invalid_argument("VecModel: dt must be positive");
    using vecdetail::kronSum;
    const int m = g_.nx - 1, nx = g_.nx;
    vecdetail::SpMat iU = kronSum(Mat(Mat::Identity(m, m) - dt * ops.A1_U), Mat(-dt * ops.A2_U));
    viscU_.compute(iU);
    vecdetail::SpMat iV = kronSum(Mat(Mat::Identity(nx, nx) - dt * ops.A1_V), Mat(-dt * ops.A2_V));
    viscV_.compute(iV);
    // pressure Poisson, singular constant mode pinned at the first cell
    vecdetail::SpMat lp = kronSum(ops.Lp1, ops.Lp2);
    for (vecdetail::SpMat::InnerIterator it(lp, 0); it; ++it)
      it.valueRef() = (it.row() == 0) ? 1.0 : 0.0;
    lp.prune(0.0);
    // also clear remaining row-0 entries in other columns
    for (int c = 1; c < lp.cols(); ++c)
      for (vecdetail::SpMat::InnerIterator it(lp, c); it; ++it)
        if (it.row() == 0) it.valueRef() = 0.0;
    lp.prune(0.0);
    press_.compute(lp);
    if (viscU_.info() != Eigen::Success || viscV_.info() != Eigen::Success ||
        press_.info() != Eigen::Success)
      throw std::runtime_error("VecModel: sparse factorization failed");
  }

  FullState step(const FullState& s, double alpha) const {
    const double t = s.t, dt = dt_;
    double gamma = forcing_.gamma_up >= 0 ? forcing_.gamma_up
                                          : upwind_gamma(s.U, s.V, dt, g_);
    Mat FU = vecdetail::advectionU(s.U, s.V, g_, bc_, t, alpha, gamma);
    Mat FV = vecdetail::advectionV(s.U, s.V, g_, bc_, t, alpha, gamma);
    Mat RU = s.U - dt * FU + dt * viscous_boundary_U(g_, bc_, t + dt, alpha);
    Mat RV = s.V - dt * FV + dt * viscous_boundary_V(g_, bc_, t + dt, alpha);
    if (forcing_.f_u.size()) RU += dt * forcing_.f_u;
    if (forcing_.f_v.size()) RV += dt * forcing_.f_v;
    if (forcing_.actU.size()) RU += dt * alpha * forcing_.actU;
    if (forcing_.actV.size()) RV += dt * alpha * forcing_.actV;

    Mat Un = solveMat(viscU_, RU);
    Mat Vn = solveMat(viscV_, RV);

    Mat D = padded_divergence(Un, Vn, ops_, bc_, t + dt, alpha);
    D.array() -= D.mean();  // project out the incompatible constant mode
    D(0, 0) = 0.0;          // pinned cell
    Mat Q = solveMat(press_, D);
    FullState out;
    out.U = Un - ops_.Gx * Q;
    out.V = Vn - Q * ops_.Gy.transpose();
    out.P = (Q.array() - Q.mean()) / dt;  // mean-free convention
    out.t = t + dt;
    return out;
  }

  std::vector<FullState> integrate(const FullState& init, int n_t,
                                   const std::vector<double>& control = {}) const {
    std::vector<FullState> tr{init};
    FullState cur = init;
    for (int i = 0; i < n_t; ++i) {
      cur = step(cur, control.empty() ? 0.0 : control[i]);
      tr.push_back(cur);
    }
    return tr;
  }

 private:
  static Mat solveMat(const Eigen::SparseLU<vecdetail::SpMat>& lu, const Mat& rhs) {
    Eigen::Map<const Vec> b(rhs.data(), rhs.size());
    Vec x = lu.solve(b);
    return Eigen::Map<const Mat>(x.data(), rhs.rows(), rhs.cols());
  }

  OperatorSet ops_;
  GridSpec g_;
  double dt_;
  BoundaryConditions bc_;
  ForcingSpec forcing_;
  Eigen::SparseLU<vecdetail::SpMat> viscU_, viscV_, press_;
};

}  // namespace nsrom
