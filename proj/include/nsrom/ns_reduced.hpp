#pragma once

// Online reduced-order integrator. Mirrors the full-order step (explicit
// nonlinear terms, implicit viscous Sylvester solves, pressure projection
// last) but operates on rank-sized matrices only: the nonlinear terms come
// from the sampled DEIM evaluation and every boundary contribution is a
// precomputed constant times its separable time/control factor.

#include <Eigen/Dense>
#include <cassert>
#include <stdexcept>
#include <vector>

#include "nsrom/ns_full.hpp"
#include "nsrom/pod_deim.hpp"

namespace nsrom {

struct ReducedState {
  Mat U;  // k1l x k1r
  Mat V;  // k2l x k2r
  Mat P;  // k3l x k3r
  double t = 0.0;
};

inline ReducedState project(const FullState& s, const ReducedBasis& b) {
  if (s.U.rows() != b.Ul.rows() || s.U.cols() != b.Ur.rows() ||
      s.V.rows() != b.Vl.rows() || s.V.cols() != b.Vr.rows() ||
      s.P.rows() != b.Pl.rows() || s.P.cols() != b.Pr.rows())
    throw std::invalid_argument("project: full state does not match basis dimensions");
  return {b.Ul.transpose() * s.U * b.Ur, b.Vl.transpose() * s.V * b.Vr,
          b.Pl.transpose() * s.P * b.Pr, s.t};
}

inline FullState lift(const ReducedState& s, const ReducedBasis& b) {
  if (s.U.rows() != b.k1l() || s.U.cols() != b.k1r() ||
      s.V.rows() != b.k2l() || s.V.cols() != b.k2r() ||
      s.P.rows() != b.k3l() || s.P.cols() != b.k3r())
    throw std::invalid_argument("lift: reduced state does not match basis ranks");
  return {b.Ul * s.U * b.Ur.transpose(), b.Vl * s.V * b.Vr.transpose(),
          b.Pl * s.P * b.Pr.transpose(), s.t};
}

// dt-dependent factorizations of the reduced viscous pencils
struct ReducedSolvers {
  double dt = 0.0;

  static ReducedSolvers build(const ReducedOperators& r, double dt) {
    if (dt <= 0) throw std::invalid_argument("ReducedSolvers: dt must be positive");
    ReducedSolvers s;
    s.dt = dt;
    s.viscU = SylvesterFactorization::factorize(
        Mat::Identity(r.A1U.rows(), r.A1U.rows()) - dt * r.A1U, -dt * r.A2U);
    s.viscV = SylvesterFactorization::factorize(
        Mat::Identity(r.A1V.rows(), r.A1V.rows()) - dt * r.A1V, -dt * r.A2V);
    return s;
  }

  SylvesterFactorization viscU, viscV;
};

// Projection potential: reduced analogue of pressure_correct_potential.
// Solves Lp1 Qh + Qh Lp2 = projected padded divergence, constant mode
// deflated as in the full model.
inline Mat reduced_pressure_correct_potential(const Mat& Uh, const Mat& Vh,
                                              const ReducedOperators& r, double t,
                                              double alpha) {
  Mat D = r.DivUL * Uh * r.UrPr + r.PlVl * Vh * r.DivVR;
  accumulate_boundary(D, r.divB, t, alpha);
  return r.pressure.solve(D, /*deflate=*/true);
}

inline Mat reduced_pressure_correct(const Mat& Uh, const Mat& Vh,
                                    const ReducedOperators& r, double t, double alpha,
                                    double dt = 1.0) {
  return reduced_pressure_correct_potential(Uh, Vh, r, t, alpha) / dt;
}

namespace detail {

// debug guard: no online matrix may exceed the largest basis rank
inline void assertRankSized(const Mat& M, const ReducedBasis& b) {
#ifndef NDEBUG
  int mr = std::max({b.k1l(), b.k1r(), b.k2l(), b.k2r(), b.k3l(), b.k3r(),
                     static_cast<int>(b.idxUl.size()), static_cast<int>(b.idxUr.size()),
                     static_cast<int>(b.idxVl.size()), static_cast<int>(b.idxVr.size())});
  assert(M.rows() <= mr + 1 && M.cols() <= mr + 1 && "online matrix exceeds rank size");
#else
  (void)M;
  (void)b;
#endif
}

}  // namespace detail

inline ReducedState reduced_step(const ReducedState& s, const ReducedOperators& r,
                                 const ReducedSolvers& rs, double alpha) {
  const double dt = rs.dt, t = s.t;
  const double gamma = r.gamma_up;

  Mat FU = deim_nonlinear_U(s.U, s.V, r, t, alpha, gamma);
  Mat FV = deim_nonlinear_V(s.U, s.V, r, t, alpha, gamma);
  detail::assertRankSized(FU, r.basis);
  detail::assertRankSized(FV, r.basis);

  Mat RU = s.U - dt * FU;
  Mat RV = s.V - dt * FV;
  {
    Mat BU = Mat::Zero(s.U.rows(), s.U.cols());
    Mat BV = Mat::Zero(s.V.rows(), s.V.cols());
    accumulate_boundary(BU, r.viscBU, t + dt, alpha);
    accumulate_boundary(BV, r.viscBV, t + dt, alpha);
    RU += dt * BU;
    RV += dt * BV;
  }
  if (r.fU.size()) RU += dt * r.fU;
  if (r.fV.size()) RV += dt * r.fV;
  if (r.actU.size()) RU += dt * alpha * r.actU;
  if (r.actV.size()) RV += dt * alpha * r.actV;

  Mat Un = rs.viscU.solve(RU);
  Mat Vn = rs.viscV.solve(RV);

  Mat Qh = reduced_pressure_correct_potential(Un, Vn, r, t + dt, alpha);
  detail::assertRankSized(Qh, r.basis);

  ReducedState out;
  out.U = Un - r.GxUP * Qh * r.UrPr.transpose();
  out.V = Vn - r.PlVl.transpose() * Qh * r.GyPrVr;
  out.P = Qh / dt;
  out.t = t + dt;
  if (!out.U.allFinite() || !out.V.allFinite())
    throw std::runtime_error("reduced_step: non-finite state (blow-up) at t=" +
                             std::to_string(out.t));
  return out;
}

inline std::vector<ReducedState> reduced_integrate(
    const ReducedState& init, const ReducedOperators& r, double dt, int n_t,
    const std::vector<double>& control_signal = {}) {
  if (!control_signal.empty() && static_cast<int>(control_signal.size()) < n_t)
    throw std::invalid_argument("reduced_integrate: control signal shorter than n_t");
  std::vector<ReducedState> tr;
  tr.reserve(n_t + 1);
  tr.push_back(init);
  if (n_t == 0) return tr;
  ReducedSolvers rs = ReducedSolvers::build(r, dt);
  ReducedState cur = init;
  for (int i = 0; i < n_t; ++i) {
    double a = control_signal.empty() ? 0.0 : control_signal[i];
    cur = reduced_step(cur, r, rs, a);
    tr.push_back(cur);
  }
  return tr;
}

}  // namespace nsrom
