#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "nsrom/grid.hpp"
#include "oracles.hpp"

using namespace nsrom;

namespace {
Mat randomMat(int r, int c, std::mt19937& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Mat m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}
}  // namespace

TEST_CASE("1D second derivative with Dirichlet folding on the smallest grid") {
  GridSpec g{2, 2, 1.0, 1.0, 1.0};
  OperatorSet ops = build_operators(g);
  REQUIRE(ops.A1_U.rows() == 1);
  REQUIRE(ops.A1_U.cols() == 1);
  // three-point stencil (1,-2,1)/h^2 with both neighbours on the walls
  CHECK(ops.A1_U(0, 0) == Catch::Approx(-8.0));
}

TEST_CASE("operator dimensions and stencil row sums") {
  GridSpec g{6, 5, 1.0, 2.0, 50.0};
  OperatorSet ops = build_operators(g);

  CHECK(ops.A1_U.rows() == 5);
  CHECK(ops.A2_U.rows() == 5);
  CHECK(ops.A1_V.rows() == 6);
  CHECK(ops.A2_V.rows() == 4);
  CHECK(ops.B1_U.rows() == 6);
  CHECK(ops.B1_U.cols() == 5);
  CHECK(ops.B2_V.rows() == 5);
  CHECK(ops.B2_V.cols() == 4);

  // interior rows of second-derivative matrices sum to zero
  for (int i = 1; i + 1 < ops.A1_U.rows(); ++i)
    CHECK(std::abs(ops.A1_U.row(i).sum()) < 1e-12);
  for (int i = 1; i + 1 < ops.A1_V.rows(); ++i)
    CHECK(std::abs(ops.A1_V.row(i).sum()) < 1e-12);

  // symmetry
  CHECK((ops.A1_U - ops.A1_U.transpose()).norm() == 0.0);
  CHECK((ops.A2_U - ops.A2_U.transpose()).norm() == 0.0);

  // differencing matrices annihilate constants on interior rows
  Vec ones = Vec::Ones(ops.B1_U.cols());
  Vec r = ops.B1_U * ones;
  for (int i = 1; i + 1 < r.size(); ++i) CHECK(std::abs(r(i)) < 1e-13);

  // averaging rows sum to one
  Vec s = ops.CxU * Vec::Ones(g.nx + 1);
  for (int i = 0; i < s.size(); ++i) CHECK(s(i) == Catch::Approx(1.0));
}

TEST_CASE("padding with boundary traces") {
  GridSpec g{5, 5, 1.0, 1.0, 100.0};
  auto bcz = BoundaryConditions::homogeneous();
  Mat U = Mat::Zero(4, 5);

  SECTION("homogeneous bc keeps zero field zero") {
    Mat Ub = pad_boundary_U(U, g, bcz, 0.0, 0.0);
    CHECK(Ub.norm() == 0.0);
  }
  SECTION("lid-driven cavity pads the top row of V-direction averages") {
    auto bc = BoundaryConditions::lidDrivenCavity(1.0);
    // u padding is in x (uW/uE): stays zero for the cavity
    Mat Ub = pad_boundary_U(U, g, bc, 0.0, 0.0);
    CHECK(Ub.norm() == 0.0);
    // the lid enters through the uN trace
    Vec lid = bc.sample_uN(g, 0.0, 0.0);
    CHECK(lid.minCoeff() == Catch::Approx(1.0));
    CHECK(lid.maxCoeff() == Catch::Approx(1.0));
    Vec bottom = bc.sample_uS(g, 0.0, 0.0);
    CHECK(bottom.norm() == 0.0);
  }
  SECTION("control-scaled boundary trace vanishes at alpha = 0") {
    BoundaryConditions bc;
    bc.uN.terms.push_back({[](double x) { return x * (1 - x); }, nullptr, true});
    CHECK(bc.sample_uN(g, 0.3, 0.0).norm() == 0.0);
    CHECK(bc.sample_uN(g, 0.3, 2.0).norm() > 0.0);
  }
}

TEST_CASE("matricial divergence equals the stencil oracle") {
  std::mt19937 rng(7);
  auto bc = BoundaryConditions::homogeneous();
  for (int n = 3; n <= 8; ++n) {
    GridSpec g{n, n, 1.0, 1.0, 100.0};
    OperatorSet ops = build_operators(g);
    Mat U = randomMat(n - 1, n, rng), V = randomMat(n, n - 1, rng);
    Mat D = ops.divergence(U, V);
    Mat Dref = oracle::divergence(U, V, g, bc);
    CHECK((D - Dref).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("divergence of zero fields is zero and shape mismatch throws") {
  GridSpec g{6, 6, 1.0, 1.0, 100.0};
  OperatorSet ops = build_operators(g);
  CHECK(ops.divergence(Mat::Zero(5, 6), Mat::Zero(6, 5)).norm() == 0.0);
  CHECK_THROWS_AS(ops.divergence(Mat::Zero(6, 6), Mat::Zero(6, 5)),
                  std::invalid_argument);
}

TEST_CASE("pressure Laplacian matches -B B^T and has the constant nullspace") {
  GridSpec g{7, 4, 1.0, 1.0, 10.0};
  OperatorSet ops = build_operators(g);
  CHECK((ops.Lp1 + ops.B1_U * ops.B1_U.transpose()).norm() < 1e-14);
  // constant vector in the joint nullspace: row sums of Lp1 vanish
  CHECK((ops.Lp1 * Vec::Ones(g.nx)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ops.Lp2 * Vec::Ones(g.ny)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("averaging maps constant padded fields to the same constant") {
  GridSpec g{6, 6, 1.0, 1.0, 100.0};
  OperatorSet ops = build_operators(g);
  Mat Ub = Mat::Constant(g.nx + 1, g.ny, 3.5);
  Mat uc = ops.CxU * Ub;
  CHECK((uc.array() - 3.5).abs().maxCoeff() < 1e-13);
  Mat ud = ops.DxU * Ub;
  CHECK(ud.cwiseAbs().maxCoeff() < 1e-13);
}
