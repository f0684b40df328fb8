#pragma once

// Experiment pipeline: the four benchmark problems (cavity comparison,
// stationary-target tracking, subdomain control, Dirichlet boundary
// control), snapshot generation on a coarse full-order tree, offline
// reduction, and the online tree-based dynamic programming run with a
// full-order replay of the synthesized control.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nsrom/control.hpp"
#include "nsrom/ns_full.hpp"
#include "nsrom/ns_reduced.hpp"
#include "nsrom/pod_deim.hpp"
#include "nsrom/tsa.hpp"

namespace nsrom {

// ---------------------------------------------------------------- flattening

inline Vec flatten_full(const FullState& s) {
  Vec x(s.U.size() + s.V.size() + s.P.size());
  x << Eigen::Map<const Vec>(s.U.data(), s.U.size()),
      Eigen::Map<const Vec>(s.V.data(), s.V.size()),
      Eigen::Map<const Vec>(s.P.data(), s.P.size());
  return x;
}

inline FullState unflatten_full(const Vec& x, const GridSpec& g, double t) {
  const Eigen::Index nu = (g.nx - 1) * g.ny, nv = g.nx * (g.ny - 1), np = g.nx * g.ny;
  if (x.size() != nu + nv + np)
    throw std::invalid_argument("unflatten_full: size mismatch");
  FullState s;
  s.U = Eigen::Map<const Mat>(x.data(), g.nx - 1, g.ny);
  s.V = Eigen::Map<const Mat>(x.data() + nu, g.nx, g.ny - 1);
  s.P = Eigen::Map<const Mat>(x.data() + nu + nv, g.nx, g.ny);
  s.t = t;
  return s;
}

inline Vec flatten_reduced(const ReducedState& s) {
  Vec x(s.U.size() + s.V.size() + s.P.size());
  x << Eigen::Map<const Vec>(s.U.data(), s.U.size()),
      Eigen::Map<const Vec>(s.V.data(), s.V.size()),
      Eigen::Map<const Vec>(s.P.data(), s.P.size());
  return x;
}

inline ReducedState unflatten_reduced(const Vec& x, const ReducedBasis& b, double t) {
  const Eigen::Index nu = b.k1l() * b.k1r(), nv = b.k2l() * b.k2r(),
                     np = b.k3l() * b.k3r();
  if (x.size() != nu + nv + np)
    throw std::invalid_argument("unflatten_reduced: size mismatch");
  ReducedState s;
  s.U = Eigen::Map<const Mat>(x.data(), b.k1l(), b.k1r());
  s.V = Eigen::Map<const Mat>(x.data() + nu, b.k2l(), b.k2r());
  s.P = Eigen::Map<const Mat>(x.data() + nu + nv, b.k3l(), b.k3r());
  s.t = t;
  return s;
}

// ------------------------------------------------------------ test problems

struct TestProblem {
  int test = 1;
  GridSpec grid;
  BoundaryConditions bc;      // conditions seen by the controlled dynamics
  BoundaryConditions bcRef;   // reference-trajectory conditions (test 4)
  FullState init;
  Actuation act;
  CostSpec cost;
  double dt = 0.05, T = 20.0, tol = 1e-3, epsT = -1;  // epsT < 0 -> dt^2
  std::vector<double> controls{0.0};

  int n_t() const { return static_cast<int>(std::round(T / dt)); }
  double pruneTol() const { return epsT >= 0 ? epsT : dt * dt; }
  // keep only the velocity block of the flattened reduced state when
  // merging tree nodes for the pressure-tracking problem
  int pruneDim(const ReducedBasis& b) const {
    return test == 4 ? static_cast<int>(b.k1l() * b.k1r() + b.k2l() * b.k2r()) : -1;
  }
};

namespace pipedetail {

inline Mat sinSinU(const GridSpec& g) {
  Mat U(g.nx - 1, g.ny);
  for (int i = 0; i < g.nx - 1; ++i)
    for (int j = 0; j < g.ny; ++j)
      U(i, j) = std::sin(M_PI * g.xFace(i + 1)) * std::sin(M_PI * g.yCenter(j));
  return U;
}

inline Mat sinSinV(const GridSpec& g) {
  Mat V(g.nx, g.ny - 1);
  for (int i = 0; i < g.nx; ++i)
    for (int j = 0; j < g.ny - 1; ++j)
      V(i, j) = std::sin(M_PI * g.xCenter(i)) * std::sin(M_PI * g.yFace(j + 1));
  return V;
}

}  // namespace pipedetail

// Assemble one of the four benchmark problems on an n x n grid. Targets that
// require a preliminary full-order run (tests 2 and 4) are computed here.
inline TestProblem make_problem(int test, int n, double tol) {
  TestProblem p;
  p.test = test;
  p.grid.nx = n;
  p.grid.ny = n;
  p.tol = tol;
  switch (test) {
    case 1: {  // lid-driven cavity, uncontrolled model comparison
      p.bc = BoundaryConditions::lidDrivenCavity();
      p.init = FullState::zero(p.grid);
      p.dt = 0.05;
      p.T = 20.0;
      p.controls = {0.0};
      break;
    }
    case 2: {  // distributed control towards the stationary cavity flow
      p.bc = BoundaryConditions::lidDrivenCavity();
      p.init = FullState::zero(p.grid);
      p.dt = 0.1;
      p.T = 2.0;
      p.controls = {0.0, 0.5, 1.0};
      p.act = Actuation::distributed(Mat::Ones(n - 1, n), Mat::Ones(n, n - 1));
      OperatorSet ops = build_operators(p.grid);
      StationaryTarget st = make_target_stationary(ops, p.bc, 0.05, 20.0);
      p.cost.targetU = {st.state.U};
      p.cost.targetV = {st.state.V};
      p.cost.gamma_pen = 1e-3;
      p.cost.terminal_weight = 1.0;
      break;
    }
    case 3: {  // subdomain control driving the flow to rest
      p.bc = BoundaryConditions::homogeneous();
      p.init = FullState::zero(p.grid);
      p.init.U = pipedetail::sinSinU(p.grid);
      p.init.V = pipedetail::sinSinV(p.grid);
      p.dt = 0.1;
      p.T = 2.0;
      p.controls = {0.0, 1.0};
      p.act = Actuation::subdomain(p.grid, 0.3, 0.7, 0.3, 0.7);
      p.cost.targetU = {Mat::Zero(n - 1, n)};
      p.cost.targetV = {Mat::Zero(n, n - 1)};
      p.cost.terminal_only = true;
      p.cost.terminal_weight = 1.0;
      break;
    }
    case 4: {  // Dirichlet boundary control tracking a reference pressure
      p.init = FullState::zero(p.grid);
      p.init.U = pipedetail::sinSinU(p.grid);
      p.init.V = pipedetail::sinSinV(p.grid);
      p.dt = 0.1;
      p.T = 1.0;
      p.controls = {0.0, 1.0};
      p.act = Actuation::dirichletBoundary();
      auto parab = [](double x) { return x * (1.0 - x); };
      p.bcRef.uN.terms.push_back({parab, [](double t) { return std::sin(t); }, false});
      p.bc.uN.terms.push_back({parab, nullptr, true});
      OperatorSet ops = build_operators(p.grid);
      Trajectory ref = integrate_full(p.init, ops, p.dt, p.n_t(), p.bcRef, {});
      p.cost.targetP = ref.states.back().P;
      p.cost.terminal_only = true;
      p.cost.pressure_terminal = true;
      p.cost.terminal_weight = 1.0;
      break;
    }
    default:
      throw std::invalid_argument("make_problem: test id must be in 1..4");
  }
  return p;
}

// -------------------------------------------------------------- offline phase

struct OfflineOptions {
  int Mhat = 2;        // coarse control-set size for snapshot exploration
  double dtHat = -1;   // coarse step; < 0 -> two online steps
  double epsHat = -1;  // coarse merge tolerance; < 0 -> dtHat^2
  int maxLevels = 10;  // depth cap on the exploration tree
};

struct OfflineArtifacts {
  SnapshotSet snaps;
  ReducedBasis basis;
  double gamma_up = 0.0;  // upwind weight frozen to the snapshot maximum
};

// Explore the controlled dynamics on a coarse pruned tree in the full order
// and collect state + nonlinear-term snapshots from every evaluated step.
inline OfflineArtifacts build_offline(const TestProblem& p, const OfflineOptions& o = {}) {
  const GridSpec& g = p.grid;
  OperatorSet ops = build_operators(g);

  double dtHat = o.dtHat > 0 ? o.dtHat : 2.0 * p.dt;
  int levels = std::min(o.maxLevels, std::max(1, static_cast<int>(std::round(p.T / dtHat))));
  dtHat = p.T / levels;
  double epsHat = o.epsHat >= 0 ? o.epsHat : dtHat * dtHat;

  double lo = *std::min_element(p.controls.begin(), p.controls.end());
  double hi = *std::max_element(p.controls.begin(), p.controls.end());
  ControlGrid coarse = (p.controls.size() == 1 || lo == hi)
                           ? ControlGrid::of({lo})
                           : ControlGrid::uniform(lo, hi, o.Mhat);

  FullSolvers fsv = FullSolvers::build(ops, dtHat);
  ForcingSpec forcing = with_actuation({}, p.act);

  OfflineArtifacts out;
  out.snaps.U.push_back(p.init.U);
  out.snaps.V.push_back(p.init.V);
  out.snaps.P.push_back(p.init.P);

  TreeDynamics dyn = [&](const Vec& x, double a, double t) {
    FullState s = unflatten_full(x, g, t);
    StepOutput so = step_full(s, ops, fsv, p.bc, forcing, a);
    out.snaps.U.push_back(so.state.U);
    out.snaps.V.push_back(so.state.V);
    out.snaps.P.push_back(so.state.P);
    out.snaps.FU.push_back(so.FU);
    out.snaps.FV.push_back(so.FV);
    return flatten_full(so.state);
  };
  build_tree(dyn, flatten_full(p.init), coarse, dtHat, levels, epsHat);

  out.basis = build_reduced_basis(out.snaps, p.tol);
  out.gamma_up = 0.0;
  for (std::size_t i = 0; i < out.snaps.U.size(); ++i)
    out.gamma_up = std::max(out.gamma_up,
                            upwind_gamma(out.snaps.U[i], out.snaps.V[i], p.dt, g));
  return out;
}

// --------------------------------------------------------------- online phase

// Reduced operators with the problem's forcing projected and the upwind
// weight frozen to the offline value.
inline ReducedOperators make_reduced_operators(const TestProblem& p,
                                               const ReducedBasis& basis,
                                               double gamma_up) {
  OperatorSet ops = build_operators(p.grid);
  ReducedOperators r = assemble_reduced(ops, basis, p.bc);
  r.gamma_up = gamma_up;
  ForcingSpec f = with_actuation({}, p.act);
  if (f.f_u.size()) r.fU = basis.Ul.transpose() * f.f_u * basis.Ur;
  if (f.f_v.size()) r.fV = basis.Vl.transpose() * f.f_v * basis.Vr;
  if (f.actU.size()) r.actU = basis.Ul.transpose() * f.actU * basis.Ur;
  if (f.actV.size()) r.actV = basis.Vl.transpose() * f.actV * basis.Vr;
  return r;
}

struct ControlRun {
  Tree tree;
  ValueTable values;
  SynthesizedControl synth;
  double J_root = 0;          // value function at the tree root
  double J_controlled = 0;    // full-order replay of the synthesized control
  double J_uncontrolled = 0;  // full-order run with zero control
  std::size_t nodes = 0;
  double ratio_p = 1.0;
};

// Total discrete cost of a full-order trajectory under a control signal.
inline double full_cost(const std::vector<FullState>& states,
                        const std::vector<double>& control, const TestProblem& p) {
  const GridSpec& g = p.grid;
  const int n_t = static_cast<int>(states.size()) - 1;
  double J = 0.0;
  for (int k = 0; k < n_t; ++k) {
    double a = control.empty() ? 0.0 : control[k];
    J += p.dt * std::exp(-p.cost.lambda * k * p.dt) *
         running_cost(states[k], k, a, p.cost, g);
  }
  double disc = std::exp(-p.cost.lambda * n_t * p.dt);
  if (p.cost.pressure_terminal)
    J += disc * terminal_cost_pressure(states.back().P, p.cost.targetP, p.cost, g);
  else
    J += disc * terminal_cost(states.back().U, states.back().V, p.cost.targetUAt(n_t),
                              p.cost.targetVAt(n_t), p.cost, g);
  return J;
}

// Build the reduced tree, run backward dynamic programming, synthesize the
// control and replay it through the full-order model.
inline ControlRun run_control(const TestProblem& p, const ReducedBasis& basis,
                              double gamma_up,
                              const std::vector<double>& controlSet = {}) {
  const GridSpec& g = p.grid;
  const std::vector<double>& cs = controlSet.empty() ? p.controls : controlSet;
  ControlGrid grid = ControlGrid::of(cs);

  ReducedOperators rops = make_reduced_operators(p, basis, gamma_up);
  ReducedSolvers rsolve = ReducedSolvers::build(rops, p.dt);

  // projected targets for the reduced running/terminal costs
  std::vector<Mat> tUr, tVr;
  for (const Mat& m : p.cost.targetU)
    tUr.push_back(basis.Ul.transpose() * m * basis.Ur);
  for (const Mat& m : p.cost.targetV)
    tVr.push_back(basis.Vl.transpose() * m * basis.Vr);
  const double area = g.hx() * g.hy();

  TreeDynamics dyn = [&](const Vec& x, double a, double t) {
    ReducedState s = unflatten_reduced(x, basis, t);
    return flatten_reduced(reduced_step(s, rops, rsolve, a));
  };
  RunningCost L = [&](const Vec& x, double a, double t) {
    double J = p.cost.gamma_pen * a * a;
    if (p.cost.terminal_only) return J;
    ReducedState s = unflatten_reduced(x, basis, t);
    int level = static_cast<int>(std::round(t / p.dt));
    auto pick = [&](const std::vector<Mat>& v) -> const Mat& {
      return v[std::min<std::size_t>(level, v.size() - 1)];
    };
    // orthonormal bases: the lifted L2 mismatch equals the reduced one
    J += area * ((s.U - pick(tUr)).squaredNorm() + (s.V - pick(tVr)).squaredNorm());
    return J;
  };
  TerminalCost gterm = [&](const Vec& x) {
    ReducedState s = unflatten_reduced(x, basis, p.T);
    if (p.cost.pressure_terminal) {
      Mat P = basis.Pl * s.P * basis.Pr.transpose();
      return terminal_cost_pressure(P, p.cost.targetP, p.cost, g);
    }
    int last = p.n_t();
    auto pick = [&](const std::vector<Mat>& v) -> const Mat& {
      return v[std::min<std::size_t>(last, v.size() - 1)];
    };
    return p.cost.terminal_weight *
           area * ((s.U - pick(tUr)).squaredNorm() + (s.V - pick(tVr)).squaredNorm());
  };

  ReducedState r0 = project(p.init, basis);
  ControlRun run;
  run.tree = build_tree(dyn, flatten_reduced(r0), grid, p.dt, p.n_t(), p.pruneTol(),
                        p.pruneDim(basis));
  run.values = backward_dp(run.tree, L, gterm, grid, p.cost.lambda, p.dt);
  run.synth = synthesize_control(run.tree, run.values, L, grid, p.cost.lambda, p.dt);
  run.J_root = run.values.value[run.tree.levels[0][0]];
  run.nodes = run.tree.size();
  run.ratio_p = pruning_ratio(run.tree);

  OperatorSet ops = build_operators(g);
  ForcingSpec forcing = with_actuation({}, p.act);
  Trajectory ctrl = integrate_full(p.init, ops, p.dt, p.n_t(), p.bc, forcing,
                                   run.synth.controls);
  run.J_controlled = full_cost(ctrl.states, run.synth.controls, p);
  Trajectory unc = integrate_full(p.init, ops, p.dt, p.n_t(), p.bc, forcing);
  run.J_uncontrolled = full_cost(unc.states, {}, p);
  return run;
}

}  // namespace nsrom
