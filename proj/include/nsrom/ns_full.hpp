#pragma once

// Full-order matrix Navier-Stokes integrator: upwinded nonlinear terms on
// the staggered grid, semi-implicit Euler step with viscous Sylvester
// solves, Chorin pressure projection closing each step. The projection is
// performed at the end of the step so that every completed state is
// discretely divergence free.

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "nsrom/grid.hpp"
#include "nsrom/sylvester.hpp"

namespace nsrom {

struct FullState {
  Mat U;  // (nx-1) x ny
  Mat V;  // nx x (ny-1)
  Mat P;  // nx x ny
  double t = 0.0;

  static FullState zero(const GridSpec& g, double t0 = 0.0) {
    return {Mat::Zero(g.nx - 1, g.ny), Mat::Zero(g.nx, g.ny - 1),
            Mat::Zero(g.nx, g.ny), t0};
  }
};

struct ForcingSpec {
  Mat f_u, f_v;      // constant body force fields (empty -> zero)
  Mat actU, actV;    // actuation shape fields, scaled by the control value
  double gamma_up = -1.0;  // upwind parameter; < 0 -> recompute per step

  bool hasBodyForce() const { return f_u.size() > 0 || f_v.size() > 0; }
  bool hasActuation() const { return actU.size() > 0 || actV.size() > 0; }
};

// Seibold-style CFL-based upwind weight, clipped to [0,1].
inline double upwind_gamma(const Mat& U, const Mat& V, double dt, const GridSpec& g) {
  double mu = U.size() ? U.cwiseAbs().maxCoeff() : 0.0;
  double mv = V.size() ? V.cwiseAbs().maxCoeff() : 0.0;
  return std::min(1.2 * dt * std::max(mu / g.hx(), mv / g.hy()), 1.0);
}

// F_U = d(u^2)/dx + d(uv)/dy at the u points, with upwind blending gamma.
inline Mat nonlinear_U(const Mat& U, const Mat& V, const OperatorSet& ops,
                       const BoundaryConditions& bc, double t, double alpha,
                       double gamma) {
  const GridSpec& g = ops.grid;
  const int nx = g.nx, ny = g.ny, m = nx - 1;
  const double hx = g.hx(), hy = g.hy();
  if (U.rows() != m || U.cols() != ny || V.rows() != nx || V.cols() != ny - 1)
    throw std::invalid_argument("nonlinear_U: dimension mismatch");

  Mat Ub = pad_boundary_U(U, g, bc, t, alpha);   // (nx+1) x ny
  Mat Vb = pad_boundary_V(V, g, bc, t, alpha);   // nx x (ny+1)

  // x part: cells -> faces differencing of uc^2 - gamma |uc| udx
  Mat uc = ops.CxU * Ub;   // nx x ny
  Mat udx = ops.DxU * Ub;  // nx x ny
  Mat q = uc.cwiseProduct(uc) - gamma * uc.cwiseAbs().cwiseProduct(udx);
  Mat F = (q.bottomRows(m) - q.topRows(m)) / hx;

  // y part: corner fluxes H = ua*va - gamma*udy*|va| at y interfaces 0..ny
  Vec uS = bc.sample_uS(g, t, alpha), uN = bc.sample_uN(g, t, alpha);
  Mat ua(m, ny + 1), udy(m, ny + 1);
  ua.col(0) = uS;
  udy.col(0) = U.col(0) - uS;
  for (int j = 1; j < ny; ++j) {
    ua.col(j) = 0.5 * (U.col(j - 1) + U.col(j));
    udy.col(j) = 0.5 * (U.col(j) - U.col(j - 1));
  }
  ua.col(ny) = uN;
  udy.col(ny) = uN - U.col(ny - 1);
  Mat va = 0.5 * (Vb.topRows(m) + Vb.middleRows(1, m));  // m x (ny+1)
  Mat H = ua.cwiseProduct(va) - gamma * udy.cwiseProduct(va.cwiseAbs());
  F += (H.rightCols(ny) - H.leftCols(ny)) / hy;
  return F;
}

// F_V = d(v^2)/dy + d(uv)/dx at the v points; mirror of nonlinear_U.
inline Mat nonlinear_V(const Mat& U, const Mat& V, const OperatorSet& ops,
                       const BoundaryConditions& bc, double t, double alpha,
                       double gamma) {
  const GridSpec& g = ops.grid;
  const int nx = g.nx, ny = g.ny, q = ny - 1;
  const double hx = g.hx(), hy = g.hy();
  if (U.rows() != nx - 1 || U.cols() != ny || V.rows() != nx || V.cols() != q)
    throw std::invalid_argument("nonlinear_V: dimension mismatch");

  Mat Ub = pad_boundary_U(U, g, bc, t, alpha);
  Mat Vb = pad_boundary_V(V, g, bc, t, alpha);

  // y part
  Mat vc = Vb * ops.CyV.transpose();   // nx x ny
  Mat vdy = Vb * ops.DyV.transpose();  // nx x ny
  Mat p = vc.cwiseProduct(vc) - gamma * vc.cwiseAbs().cwiseProduct(vdy);
  Mat F = (p.rightCols(q) - p.leftCols(q)) / hy;

  // x part: corner fluxes H = ua*va - gamma*|ua|*vdx at x interfaces 0..nx
  Vec vW = bc.sample_vW(g, t, alpha), vE = bc.sample_vE(g, t, alpha);
  Mat va(nx + 1, q), vdx(nx + 1, q);
  va.row(0) = vW.transpose();
  vdx.row(0) = V.row(0) - vW.transpose();
  for (int i = 1; i < nx; ++i) {
    va.row(i) = 0.5 * (V.row(i - 1) + V.row(i));
    vdx.row(i) = 0.5 * (V.row(i) - V.row(i - 1));
  }
  va.row(nx) = vE.transpose();
  vdx.row(nx) = vE.transpose() - V.row(nx - 1);
  Mat ua = 0.5 * (Ub.leftCols(q) + Ub.middleCols(1, q));  // (nx+1) x q
  Mat H = ua.cwiseProduct(va) - gamma * vdx.cwiseProduct(ua.cwiseAbs());
  F += (H.bottomRows(nx) - H.topRows(nx)) / hx;
  return F;
}

// Factorizations reused across every time step.
struct FullSolvers {
  GridSpec grid;
  double dt = 0.0;
  SylvesterFactorization viscU, viscV, pressure;

  static FullSolvers build(const OperatorSet& ops, double dt) {
    if (dt <= 0) throw std::invalid_argument("FullSolvers: dt must be positive");
    FullSolvers s;
    s.grid = ops.grid;
    s.dt = dt;
    const int m = ops.grid.nx - 1, nyy = ops.grid.ny;
    s.viscU = SylvesterFactorization::factorize(
        Mat::Identity(m, m) - dt * ops.A1_U, -dt * ops.A2_U);
    s.viscV = SylvesterFactorization::factorize(
        Mat::Identity(ops.grid.nx, ops.grid.nx) - dt * ops.A1_V, -dt * ops.A2_V);
    (void)nyy;
    s.pressure = SylvesterFactorization::factorize(ops.Lp1, ops.Lp2);
    return s;
  }
};

// Projection potential: solves Lp1 Q + Q Lp2^T = padded divergence, with the
// constant nullspace deflated. Subtracting (Gx Q, Q Gy^T) from the velocity
// zeroes the padded divergence. P = Q / dt is the physical pressure.
inline Mat pressure_correct_potential(const Mat& U, const Mat& V, const OperatorSet& ops,
                                      const SylvesterFactorization& pfact,
                                      const BoundaryConditions& bc, double t,
                                      double alpha) {
  Mat D = padded_divergence(U, V, ops, bc, t, alpha);
  return pfact.solve(D, /*deflate=*/true);
}

inline Mat pressure_correct(const Mat& U, const Mat& V, const OperatorSet& ops,
                            const SylvesterFactorization& pfact,
                            const BoundaryConditions& bc, double t, double alpha,
                            double dt = 1.0) {
  return pressure_correct_potential(U, V, ops, pfact, bc, t, alpha) / dt;
}

struct StepOutput {
  FullState state;
  Mat FU, FV;        // nonlinear terms evaluated at the step start
  double gamma = 0;  // upwind weight used
};

inline StepOutput step_full(const FullState& s, const OperatorSet& ops,
                            const FullSolvers& fs, const BoundaryConditions& bc,
                            const ForcingSpec& forcing, double alpha) {
  const GridSpec& g = ops.grid;
  const double dt = fs.dt, t = s.t;

  StepOutput out;
  out.gamma = forcing.gamma_up >= 0 ? forcing.gamma_up : upwind_gamma(s.U, s.V, dt, g);
  out.FU = nonlinear_U(s.U, s.V, ops, bc, t, alpha, out.gamma);
  out.FV = nonlinear_V(s.U, s.V, ops, bc, t, alpha, out.gamma);

  Mat RU = s.U - dt * out.FU + dt * viscous_boundary_U(g, bc, t + dt, alpha);
  Mat RV = s.V - dt * out.FV + dt * viscous_boundary_V(g, bc, t + dt, alpha);
  if (forcing.f_u.size()) RU += dt * forcing.f_u;
  if (forcing.f_v.size()) RV += dt * forcing.f_v;
  if (forcing.actU.size()) RU += dt * alpha * forcing.actU;
  if (forcing.actV.size()) RV += dt * alpha * forcing.actV;

  Mat Un = fs.viscU.solve(RU);
  Mat Vn = fs.viscV.solve(RV);

  Mat Q = pressure_correct_potential(Un, Vn, ops, fs.pressure, bc, t + dt, alpha);
  out.state.U = Un - ops.Gx * Q;
  out.state.V = Vn - Q * ops.Gy.transpose();
  out.state.P = Q / dt;
  out.state.t = t + dt;

  if (!out.state.U.allFinite() || !out.state.V.allFinite())
    throw std::runtime_error("step_full: non-finite state (blow-up) at t=" +
                             std::to_string(t + dt));
  return out;
}

struct Trajectory {
  std::vector<FullState> states;                // n_t + 1 entries
  std::vector<Mat> snapFU, snapFV;              // nonlinear snapshots, if recorded
};

// control_signal: one value per step, or empty for alpha = 0.
inline Trajectory integrate_full(const FullState& init, const OperatorSet& ops,
                                 double dt, int n_t, const BoundaryConditions& bc,
                                 const ForcingSpec& forcing,
                                 const std::vector<double>& control_signal = {},
                                 bool record_nonlinear = false) {
  if (!control_signal.empty() && static_cast<int>(control_signal.size()) < n_t)
    throw std::invalid_argument("integrate_full: control signal shorter than n_t");
  Trajectory tr;
  tr.states.reserve(n_t + 1);
  tr.states.push_back(init);
  if (n_t == 0) return tr;
  FullSolvers fs = FullSolvers::build(ops, dt);
  FullState cur = init;
  for (int i = 0; i < n_t; ++i) {
    double a = control_signal.empty() ? 0.0 : control_signal[i];
    StepOutput so = step_full(cur, ops, fs, bc, forcing, a);
    if (record_nonlinear) {
      tr.snapFU.push_back(so.FU);
      tr.snapFV.push_back(so.FV);
    }
    cur = so.state;
    tr.states.push_back(cur);
  }
  return tr;
}

}  // namespace nsrom
