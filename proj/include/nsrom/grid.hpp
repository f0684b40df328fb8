#pragma once

// Staggered-grid geometry, boundary traces and the finite-difference
// coefficient matrices shared by the full and reduced Navier-Stokes solvers.
//
// Grid layout on [0,bx] x [0,by] with nx x ny cells:
//   u on vertical cell faces   -> interior U is (nx-1) x ny
//   v on horizontal cell faces -> interior V is nx x (ny-1)
//   p at cell centres          -> P is nx x ny
// Row index is the x direction throughout.

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>
#include <cmath>

namespace nsrom {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

struct GridSpec {
  int nx = 0;
  int ny = 0;
  double bx = 1.0;
  double by = 1.0;
  double reynolds = 100.0;

  double hx() const { return bx / nx; }
  double hy() const { return by / ny; }
  double viscosity() const { return 1.0 / reynolds; }

  // coordinates: faces at i*h, centres at (i+1/2)*h (0-based)
  double xFace(int i) const { return i * hx(); }
  double yFace(int j) const { return j * hy(); }
  double xCenter(int i) const { return (i + 0.5) * hx(); }
  double yCenter(int j) const { return (j + 0.5) * hy(); }

  void validate() const {
    if (nx < 2 || ny < 2) throw std::invalid_argument("GridSpec: nx, ny must be >= 2");
    if (bx <= 0 || by <= 0) throw std::invalid_argument("GridSpec: domain lengths must be positive");
    if (reynolds <= 0) throw std::invalid_argument("GridSpec: Reynolds number must be positive");
  }
};

// A wall trace is a sum of separable terms profile(s) * theta(t, alpha),
// where theta is either 1, a time signal, or the control value itself.
// The separable form is what lets the reduced model precompute every
// boundary contribution offline and rescale it online.
struct TraceTerm {
  std::function<double(double)> profile;             // function of the arc coordinate
  std::function<double(double)> time_factor;         // nullptr -> 1
  bool control_scaled = false;                       // multiply by alpha

  double theta(double t, double alpha) const {
    double s = time_factor ? time_factor(t) : 1.0;
    if (control_scaled) s *= alpha;
    return s;
  }
  double eval(double s, double t, double alpha) const {
    return profile(s) * theta(t, alpha);
  }
};

struct WallTrace {
  std::vector<TraceTerm> terms;

  double eval(double s, double t, double alpha) const {
    double v = 0.0;
    for (const auto& tm : terms) v += tm.eval(s, t, alpha);
    return v;
  }
  bool empty() const { return terms.empty(); }
};

// Velocity traces on the four walls. Naming: uN is the u-velocity on the
// top wall (y = by) as a function of x, vE the v-velocity on the right
// wall (x = bx) as a function of y, and so on.
struct BoundaryConditions {
  WallTrace uN, uS, uE, uW;
  WallTrace vN, vS, vE, vW;

  static BoundaryConditions homogeneous() { return {}; }

  // Lid-driven cavity: u = speed on the top wall, no-slip elsewhere.
  static BoundaryConditions lidDrivenCavity(double speed = 1.0) {
    BoundaryConditions bc;
    bc.uN.terms.push_back({[speed](double) { return speed; }, nullptr, false});
    return bc;
  }

  // Enumerate every trace term with a wall tag, for offline boundary
  // precomputation. Tags: 0 uN, 1 uS, 2 uE, 3 uW, 4 vN, 5 vS, 6 vE, 7 vW.
  struct TaggedTerm {
    int wall;
    const TraceTerm* term;
  };
  std::vector<TaggedTerm> allTerms() const {
    std::vector<TaggedTerm> out;
    const WallTrace* walls[8] = {&uN, &uS, &uE, &uW, &vN, &vS, &vE, &vW};
    for (int w = 0; w < 8; ++w)
      for (const auto& tm : walls[w]->terms) out.push_back({w, &tm});
    return out;
  }

  // sampled traces at the grid locations the solvers need
  Vec sample_uN(const GridSpec& g, double t, double a) const { return sampleFaceX(g, uN, t, a); }
  Vec sample_uS(const GridSpec& g, double t, double a) const { return sampleFaceX(g, uS, t, a); }
  Vec sample_uE(const GridSpec& g, double t, double a) const { return sampleCenterY(g, uE, t, a); }
  Vec sample_uW(const GridSpec& g, double t, double a) const { return sampleCenterY(g, uW, t, a); }
  Vec sample_vN(const GridSpec& g, double t, double a) const { return sampleCenterX(g, vN, t, a); }
  Vec sample_vS(const GridSpec& g, double t, double a) const { return sampleCenterX(g, vS, t, a); }
  Vec sample_vE(const GridSpec& g, double t, double a) const { return sampleFaceY(g, vE, t, a); }
  Vec sample_vW(const GridSpec& g, double t, double a) const { return sampleFaceY(g, vW, t, a); }

  // same samplings for a single term (profile only, no theta)
  static Vec sampleTermProfile(const GridSpec& g, int wall, const TraceTerm& tm) {
    auto prof = [&tm](double s) { return tm.profile(s); };
    switch (wall) {
      case 0: case 1: return sampleVec(prof, g.nx - 1, [&g](int i) { return g.xFace(i + 1); });
      case 2: case 3: return sampleVec(prof, g.ny, [&g](int j) { return g.yCenter(j); });
      case 4: case 5: return sampleVec(prof, g.nx, [&g](int i) { return g.xCenter(i); });
      default:        return sampleVec(prof, g.ny - 1, [&g](int j) { return g.yFace(j + 1); });
    }
  }

private:
  template <class F, class X>
  static Vec sampleVec(F&& f, int n, X&& x) {
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = f(x(i));
    return v;
  }
  // u in x: interior faces i=1..nx-1
  Vec sampleFaceX(const GridSpec& g, const WallTrace& w, double t, double a) const {
    return sampleVec([&](double s) { return w.eval(s, t, a); }, g.nx - 1,
                     [&g](int i) { return g.xFace(i + 1); });
  }
  Vec sampleCenterY(const GridSpec& g, const WallTrace& w, double t, double a) const {
    return sampleVec([&](double s) { return w.eval(s, t, a); }, g.ny,
                     [&g](int j) { return g.yCenter(j); });
  }
  Vec sampleCenterX(const GridSpec& g, const WallTrace& w, double t, double a) const {
    return sampleVec([&](double s) { return w.eval(s, t, a); }, g.nx,
                     [&g](int i) { return g.xCenter(i); });
  }
  Vec sampleFaceY(const GridSpec& g, const WallTrace& w, double t, double a) const {
    return sampleVec([&](double s) { return w.eval(s, t, a); }, g.ny - 1,
                     [&g](int j) { return g.yFace(j + 1); });
  }
};

// All coefficient matrices. Second-derivative matrices carry the 1/r
// viscosity factor. Rows whose stencil touches a wall use Dirichlet
// folding: -2 on the diagonal when the unknown sits on the wall line
// itself, -3 when it sits half a mesh width away (ghost-value fold).
struct OperatorSet {
  GridSpec grid;

  Mat A1_U;  // (nx-1)^2, d^2/dx^2 for u, 1/r scaled
  Mat A2_U;  // ny^2,     d^2/dy^2 for u (ghost fold at walls)
  Mat A1_V;  // nx^2,     d^2/dx^2 for v (ghost fold at walls)
  Mat A2_V;  // (ny-1)^2, d^2/dy^2 for v

  Mat B1_U;  // nx x (nx-1), x-differencing of interior u into cells
  Mat B2_V;  // ny x (ny-1), y-differencing of interior v into cells

  Mat Gx;    // (nx-1) x nx, cell -> x-face differencing (pressure gradient)
  Mat Gy;    // (ny-1) x ny, cell -> y-face differencing

  Mat Lp1;   // nx^2, pressure Laplacian in x = -B1_U * B1_U^T
  Mat Lp2;   // ny^2, pressure Laplacian in y = -B2_V * B2_V^T

  // averaging / half-differencing of x-padded u rows onto cell centres
  Mat CxU;   // nx x (nx+1), 1/2 on main and upper diagonal
  Mat DxU;   // nx x (nx+1), half difference
  // same in y for y-padded v columns (to be applied from the right, transposed)
  Mat CyV;   // ny x (ny+1)
  Mat DyV;   // ny x (ny+1)

  Mat divergence(const Mat& U, const Mat& V) const {
    if (U.rows() != grid.nx - 1 || U.cols() != grid.ny ||
        V.rows() != grid.nx || V.cols() != grid.ny - 1)
      throw std::invalid_argument("divergence: staggered dimensions do not match grid");
    return B1_U * U + V * B2_V.transpose();
  }
};

namespace detail {

inline Mat tridiag(int n, double lo, double di, double up) {
  Mat m = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    m(i, i) = di;
    if (i > 0) m(i, i - 1) = lo;
    if (i + 1 < n) m(i, i + 1) = up;
  }
  return m;
}

// second derivative with Dirichlet folding; fold=false keeps -2 at the
// ends (unknown on the wall line), fold=true uses -3 (wall midpoint ghost)
inline Mat secondDerivative(int n, double h, bool fold) {
  Mat m = tridiag(n, 1.0, -2.0, 1.0);
  if (fold) {
    m(0, 0) = -3.0;
    m(n - 1, n - 1) = -3.0;
  }
  return m / (h * h);
}

}  // namespace detail

inline OperatorSet build_operators(const GridSpec& grid) {
  grid.validate();
  OperatorSet ops;
  ops.grid = grid;
  const int nx = grid.nx, ny = grid.ny;
  const double hx = grid.hx(), hy = grid.hy(), eps = grid.viscosity();

  ops.A1_U = eps * detail::secondDerivative(nx - 1, hx, false);
  ops.A2_U = eps * detail::secondDerivative(ny, hy, true);
  ops.A1_V = eps * detail::secondDerivative(nx, hx, true);
  ops.A2_V = eps * detail::secondDerivative(ny - 1, hy, false);

  ops.B1_U = Mat::Zero(nx, nx - 1);
  for (int i = 0; i < nx; ++i) {
    if (i < nx - 1) ops.B1_U(i, i) = 1.0 / hx;
    if (i > 0) ops.B1_U(i, i - 1) = -1.0 / hx;
  }
  ops.B2_V = Mat::Zero(ny, ny - 1);
  for (int j = 0; j < ny; ++j) {
    if (j < ny - 1) ops.B2_V(j, j) = 1.0 / hy;
    if (j > 0) ops.B2_V(j, j - 1) = -1.0 / hy;
  }

  ops.Gx = Mat::Zero(nx - 1, nx);
  for (int i = 0; i < nx - 1; ++i) {
    ops.Gx(i, i) = -1.0 / hx;
    ops.Gx(i, i + 1) = 1.0 / hx;
  }
  ops.Gy = Mat::Zero(ny - 1, ny);
  for (int j = 0; j < ny - 1; ++j) {
    ops.Gy(j, j) = -1.0 / hy;
    ops.Gy(j, j + 1) = 1.0 / hy;
  }

  ops.Lp1 = -ops.B1_U * ops.B1_U.transpose();
  ops.Lp2 = -ops.B2_V * ops.B2_V.transpose();

  auto avgPad = [](int n) {
    Mat m = Mat::Zero(n, n + 1);
    for (int i = 0; i < n; ++i) { m(i, i) = 0.5; m(i, i + 1) = 0.5; }
    return m;
  };
  auto difPad = [](int n) {
    Mat m = Mat::Zero(n, n + 1);
    for (int i = 0; i < n; ++i) { m(i, i) = -0.5; m(i, i + 1) = 0.5; }
    return m;
  };
  ops.CxU = avgPad(nx);
  ops.DxU = difPad(nx);
  ops.CyV = avgPad(ny);
  ops.DyV = difPad(ny);

  return ops;
}

// U padded with the x-wall traces in the first and last rows: (nx+1) x ny
inline Mat pad_boundary_U(const Mat& U, const GridSpec& g, const BoundaryConditions& bc,
                          double t, double alpha) {
  if (U.rows() != g.nx - 1 || U.cols() != g.ny)
    throw std::invalid_argument("pad_boundary_U: wrong interior dimensions");
  Mat Ub(g.nx + 1, g.ny);
  Ub.row(0) = bc.sample_uW(g, t, alpha).transpose();
  Ub.middleRows(1, g.nx - 1) = U;
  Ub.row(g.nx) = bc.sample_uE(g, t, alpha).transpose();
  return Ub;
}

// V padded with the y-wall traces in the first and last columns: nx x (ny+1)
inline Mat pad_boundary_V(const Mat& V, const GridSpec& g, const BoundaryConditions& bc,
                          double t, double alpha) {
  if (V.rows() != g.nx || V.cols() != g.ny - 1)
    throw std::invalid_argument("pad_boundary_V: wrong interior dimensions");
  Mat Vb(g.nx, g.ny + 1);
  Vb.col(0) = bc.sample_vS(g, t, alpha);
  Vb.middleCols(1, g.ny - 1) = V;
  Vb.col(g.ny) = bc.sample_vN(g, t, alpha);
  return Vb;
}

// Divergence of the boundary-padded field: interior differencing plus the
// wall-normal traces entering the first/last cell rows and columns.
inline Mat padded_divergence(const Mat& U, const Mat& V, const OperatorSet& ops,
                             const BoundaryConditions& bc, double t, double alpha) {
  const GridSpec& g = ops.grid;
  Mat D = ops.divergence(U, V);
  D.row(0) -= bc.sample_uW(g, t, alpha).transpose() / g.hx();
  D.row(g.nx - 1) += bc.sample_uE(g, t, alpha).transpose() / g.hx();
  D.col(0) -= bc.sample_vS(g, t, alpha) / g.hy();
  D.col(g.ny - 1) += bc.sample_vN(g, t, alpha) / g.hy();
  return D;
}

// Boundary contribution of the implicit viscous operators to the u
// right-hand side: neighbours outside the domain folded into constants.
inline Mat viscous_boundary_U(const GridSpec& g, const BoundaryConditions& bc,
                              double t, double alpha) {
  const double eps = g.viscosity();
  Mat G = Mat::Zero(g.nx - 1, g.ny);
  G.row(0) += eps / (g.hx() * g.hx()) * bc.sample_uW(g, t, alpha).transpose();
  G.row(g.nx - 2) += eps / (g.hx() * g.hx()) * bc.sample_uE(g, t, alpha).transpose();
  G.col(0) += 2.0 * eps / (g.hy() * g.hy()) * bc.sample_uS(g, t, alpha);
  G.col(g.ny - 1) += 2.0 * eps / (g.hy() * g.hy()) * bc.sample_uN(g, t, alpha);
  return G;
}

inline Mat viscous_boundary_V(const GridSpec& g, const BoundaryConditions& bc,
                              double t, double alpha) {
  const double eps = g.viscosity();
  Mat G = Mat::Zero(g.nx, g.ny - 1);
  G.row(0) += 2.0 * eps / (g.hx() * g.hx()) * bc.sample_vW(g, t, alpha).transpose();
  G.row(g.nx - 1) += 2.0 * eps / (g.hx() * g.hx()) * bc.sample_vE(g, t, alpha).transpose();
  G.col(0) += eps / (g.hy() * g.hy()) * bc.sample_vS(g, t, alpha);
  G.col(g.ny - 2) += eps / (g.hy() * g.hy()) * bc.sample_vN(g, t, alpha);
  return G;
}

}  // namespace nsrom
