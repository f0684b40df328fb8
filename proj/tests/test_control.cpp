#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nsrom/control.hpp"

using namespace nsrom;

namespace {

Mat randomMat(int r, int c, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

constexpr double kPi = 3.14159265358979323846;

}  // namespace

TEST_CASE("running cost vanishes on the target and prices the control") {
  GridSpec g{16, 16};
  std::mt19937 rng(1);
  CostSpec c;
  c.gamma_pen = 1e-3;
  c.targetU = {randomMat(15, 16, rng)};
  c.targetV = {randomMat(16, 15, rng)};

  FullState y;
  y.U = c.targetU[0];
  y.V = c.targetV[0];
  CHECK(running_cost(y, 0, 0.0, c, g) == 0.0);
  CHECK(running_cost(y, 0, 1.0, c, g) == Catch::Approx(1e-3));
  CHECK(running_cost(y, 5, -1.0, c, g) == Catch::Approx(1e-3));  // clamped lookup
}

TEST_CASE("discrete L2 quadrature matches the analytic integral") {
  GridSpec g{64, 64};
  Mat W(g.nx - 1, g.ny);
  for (int i = 0; i < g.nx - 1; ++i)
    for (int j = 0; j < g.ny; ++j)
      W(i, j) = std::sin(kPi * g.xFace(i + 1)) * std::sin(kPi * g.yCenter(j));
  CHECK(l2_sq(W, g) == Catch::Approx(0.25).margin(1e-3));
}

TEST_CASE("mismatch term is homogeneous of degree two") {
  GridSpec g{8, 8};
  std::mt19937 rng(3);
  Mat W = randomMat(7, 8, rng);
  CHECK(l2_sq(3.0 * W, g) == Catch::Approx(9.0 * l2_sq(W, g)));
}

TEST_CASE("running cost is nonnegative and zero only at the target") {
  GridSpec g{8, 8};
  std::mt19937 rng(5);
  CostSpec c;
  c.gamma_pen = 0.5;
  c.targetU = {Mat::Zero(7, 8)};
  c.targetV = {Mat::Zero(8, 7)};
  FullState y;
  y.U = randomMat(7, 8, rng);
  y.V = randomMat(8, 7, rng);
  CHECK(running_cost(y, 0, 0.3, c, g) > 0.0);
  y.U.setZero();
  y.V.setZero();
  CHECK(running_cost(y, 0, 0.0, c, g) == 0.0);
}

TEST_CASE("terminal-only cost drops the running mismatch") {
  GridSpec g{8, 8};
  std::mt19937 rng(7);
  CostSpec c;
  c.terminal_only = true;
  c.gamma_pen = 2.0;
  FullState y;
  y.U = randomMat(7, 8, rng);
  y.V = randomMat(8, 7, rng);
  CHECK(running_cost(y, 0, 0.5, c, g) == Catch::Approx(0.5));
}

TEST_CASE("terminal cost on velocity and pressure variants") {
  GridSpec g{10, 10};
  std::mt19937 rng(9);
  CostSpec c;
  Mat U = randomMat(9, 10, rng), V = randomMat(10, 9, rng);
  CHECK(terminal_cost(U, V, U, V, c, g) == 0.0);

  Mat P = randomMat(10, 10, rng), Pbar = randomMat(10, 10, rng);
  double base = terminal_cost_pressure(P, Pbar, c, g);
  // invariant under constant shifts of either field (mean-free convention)
  CHECK(terminal_cost_pressure(P.array() + 3.7, Pbar.array() + 3.7, c, g) ==
        Catch::Approx(base));
  CHECK(terminal_cost_pressure(P.array() - 1.2, Pbar.array() + 8.0, c, g) ==
        Catch::Approx(base));
  CHECK(terminal_cost_pressure(Pbar, Pbar, c, g) == 0.0);
}

TEST_CASE("reduced-coordinate cost equals the lifted cost") {
  GridSpec g{12, 12};
  std::mt19937 rng(11);
  auto orth = [&rng](int r, int c) {
    Eigen::HouseholderQR<Mat> qr(randomMat(r, c, rng));
    return Mat(Mat(qr.householderQ()) * Mat::Identity(r, c));
  };
  Mat Bl = orth(11, 4), Br = orth(12, 5);
  Mat Uh = randomMat(4, 5, rng), Th = randomMat(4, 5, rng);
  double red = g.hx() * g.hy() * (Uh - Th).squaredNorm();
  double full = l2_sq(Bl * (Uh - Th) * Br.transpose(), g);
  CHECK(red == Catch::Approx(full));
}

TEST_CASE("subdomain actuation marks exactly the cells inside the box") {
  GridSpec g{10, 10};
  Actuation a = Actuation::subdomain(g, 0.3, 0.7, 0.3, 0.7);
  for (int i = 0; i < g.nx - 1; ++i)
    for (int j = 0; j < g.ny; ++j) {
      bool in = g.xFace(i + 1) >= 0.3 && g.xFace(i + 1) <= 0.7 &&
                g.yCenter(j) >= 0.3 && g.yCenter(j) <= 0.7;
      CHECK(a.shapeU(i, j) == (in ? 1.0 : 0.0));
    }
  CHECK(a.shapeU.sum() > 0);
  CHECK(a.shapeV.sum() > 0);

  Mat RU = Mat::Zero(g.nx - 1, g.ny), RV = Mat::Zero(g.nx, g.ny - 1);
  apply_actuation(RU, RV, a, 1.0, 0.1);
  CHECK((RU - 0.1 * a.shapeU).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero control leaves the right-hand sides unchanged") {
  GridSpec g{8, 8};
  std::mt19937 rng(13);
  Mat RU = randomMat(7, 8, rng), RV = randomMat(8, 7, rng);
  Mat RU0 = RU, RV0 = RV;
  Actuation a = Actuation::distributed(Mat::Ones(7, 8), Mat::Ones(8, 7));
  apply_actuation(RU, RV, a, 0.0, 0.1);
  CHECK((RU - RU0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((RV - RV0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("uniform distributed actuation adds a uniform increment") {
  GridSpec g{8, 8};
  Actuation a = Actuation::distributed(Mat::Ones(7, 8), Mat::Ones(8, 7));
  Mat RU = Mat::Zero(7, 8), RV = Mat::Zero(8, 7);
  apply_actuation(RU, RV, a, 0.5, 0.1);
  CHECK((RU.array() - 0.05).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((RV.array() - 0.05).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("boundary actuation never touches the momentum right-hand sides") {
  Mat RU = Mat::Ones(5, 5), RV = Mat::Ones(5, 5);
  apply_actuation(RU, RV, Actuation::dirichletBoundary(), 2.0, 0.1);
  CHECK((RU.array() - 1.0).cwiseAbs().maxCoeff() == 0.0);

  ForcingSpec f = with_actuation(ForcingSpec{}, Actuation::dirichletBoundary());
  CHECK(!f.hasActuation());
}

TEST_CASE("stationary target construction") {
  GridSpec g{24, 24};
  OperatorSet ops = build_operators(g);

  SECTION("zero horizon returns the zero initial state") {
    StationaryTarget t =
        make_target_stationary(ops, BoundaryConditions::lidDrivenCavity(), 0.05, 0.0);
    CHECK(t.state.U.cwiseAbs().maxCoeff() == 0.0);
  }

  SECTION("homogeneous data stay at zero") {
    StationaryTarget t =
        make_target_stationary(ops, BoundaryConditions::homogeneous(), 0.05, 1.0);
    CHECK(t.state.U.cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.rel_change == 0.0);
  }

  SECTION("cavity flow is near steady by t = 20") {
    StationaryTarget t =
        make_target_stationary(ops, BoundaryConditions::lidDrivenCavity(), 0.05, 20.0);
    CHECK(t.state.U.cwiseAbs().maxCoeff() > 0.0);
    CHECK(t.rel_change <= 1e-2);
  }
}
