#include <catch_amalgamated.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>

#include "ssvb/core_math.hpp"
#include "test_support.hpp"

using namespace ssvb;
using Catch::Approx;
using ssvb::testing::Gen;

TEST_CASE("expit values and symmetry") {
  CHECK(expit(0.0) == 0.5);
  const double x = 1.2345;
  CHECK(std::abs(expit(x) + expit(-x) - 1.0) <= 1e-15);
  CHECK(expit(-3.0) == Approx(0.04742587317756679).epsilon(1e-14));
  CHECK(expit(700.0) == 1.0);
  CHECK(expit(-700.0) > 0.0);
  CHECK(std::isfinite(expit(-700.0)));
  CHECK_THROWS_AS(expit(std::nan("")), DomainError);
  CHECK_THROWS_AS(expit(INFINITY), DomainError);
}

TEST_CASE("expit tail bound on the integer grid") {
  // Double cannot resolve e^{-2x} next to 1 - e^{-x} past x ~ 18, so the
  // same formula is evaluated at 50 digits.
  using Big = boost::multiprecision::cpp_bin_float_50;
  for (int k = 1; k <= 30; ++k) {
    const Big x = k;
    const Big bound = exp(Big(-2 * k));
    CHECK(abs(expit_branchwise(-x) - exp(-x)) <= bound);
    CHECK(abs(expit_branchwise(x) - (1 - exp(-x))) <= bound);
  }
  for (int k = 1; k <= 15; ++k) {
    const double x = k;
    CHECK(std::abs(expit(-x) - std::exp(-x)) <= std::exp(-2.0 * x) + 1e-16 * std::exp(-x));
    CHECK(std::abs(expit(x) - static_cast<double>(expit_branchwise(Big(k)))) <= 2.0 * std::numeric_limits<double>::epsilon());
  }
}

TEST_CASE("expit is strictly increasing and logit inverts it") {
  double prev = expit(-30.0);
  for (int k = -299; k <= 300; ++k) {
    const double x = k / 10.0;
    const double v = expit(x);
    CHECK(v > prev);
    prev = v;
    // 1 - v loses digits as v approaches 1.
    CHECK(std::abs(logit(v) - x) <= 1e-12 + 4.0 * std::numeric_limits<double>::epsilon() * std::exp(std::max(x, 0.0)));
  }
}

TEST_CASE("logit values and domain") {
  CHECK(logit(0.5) == 0.0);
  CHECK(logit(0.75) == Approx(std::log(3.0)).epsilon(1e-15));
  CHECK(std::abs(logit(0.2689414213699951) + 1.0) <= 1e-7);
  for (double p : {0.001, 0.3, 0.9, 0.999}) CHECK(std::abs(expit(logit(p)) - p) <= 1e-12);
  CHECK_THROWS_AS(logit(0.0), DomainError);
  CHECK_THROWS_AS(logit(1.0), DomainError);
  CHECK_THROWS_AS(logit(-0.2), DomainError);
}

TEST_CASE("spd_solve small cases") {
  const Eigen::Vector3d b(1.0, -2.0, 3.0);
  const SolveReport r = spd_solve(Eigen::Matrix3d::Identity(), b);
  CHECK((r.solution - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(r.factorization_ok);

  Eigen::Matrix2d m = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  const SolveReport r2 = spd_solve(m, Eigen::Vector2d(2.0, 4.0));
  CHECK(r2.solution(0, 0) == Approx(1.0));
  CHECK(r2.solution(1, 0) == Approx(1.0));
}

TEST_CASE("spd_solve residual and inverse on random SPD matrices") {
  Gen g(11);
  for (int rep = 0; rep < 20; ++rep) {
    const auto p = static_cast<Eigen::Index>(g.index(1, 12));
    const MatrixXd m = ssvb::testing::random_spd(g, p);
    const MatrixXd rhs = g.normal_matrix(p, 3);
    const SolveReport r = spd_solve(m, rhs, true);
    const double resid = (m * r.solution - rhs).cwiseAbs().maxCoeff() / (1.0 + rhs.cwiseAbs().maxCoeff());
    CHECK(resid <= 1e-10);
    CHECK(r.residual_norm <= 1e-10);
    REQUIRE(r.inverse.has_value());
    const MatrixXd& inv = *r.inverse;
    CHECK((inv - inv.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
    for (int k = 0; k < 20; ++k) {
      const VectorXd x = g.normal_vector(p);
      CHECK(x.dot(inv * x) > 0.0);
    }
  }
}

TEST_CASE("spd_solve errors") {
  MatrixXd asym(2, 2);
  asym << 2.0, 1.0, 0.0, 2.0;
  CHECK_THROWS_AS(spd_solve(asym, VectorXd::Ones(2)), DomainError);

  MatrixXd indef(2, 2);
  indef << 1.0, 2.0, 2.0, 1.0;
  try {
    spd_solve(indef, VectorXd::Ones(2));
    FAIL("expected SingularityError");
  } catch (const SingularityError& e) {
    CHECK(e.pivot() == 1);
  }
  CHECK_THROWS_AS(spd_solve(MatrixXd::Identity(2, 2), VectorXd::Ones(3)), DimensionError);
}

TEST_CASE("CholeskyFactor log determinant") {
  Gen g(5);
  const MatrixXd m = ssvb::testing::random_spd(g, 6);
  CHECK(CholeskyFactor(m).log_det() == Approx(std::log(m.determinant())).epsilon(1e-12));
}

TEST_CASE("validate_dataset") {
  const Dataset d = validate_dataset(MatrixXd::Identity(2, 2), Eigen::Vector2d(1.0, 0.0),
                                     ResponseKind::continuous);
  CHECK(d.n() == 2);
  CHECK(d.p() == 2);
  CHECK(d.full_rank());
  CHECK(d.yty() == 1.0);

  Gen g(3);
  MatrixXd dup = g.normal_matrix(6, 3);
  dup.col(2) = dup.col(0);
  CHECK_FALSE(validate_dataset(dup, g.normal_vector(6), ResponseKind::continuous).full_rank());

  CHECK_THROWS_AS(validate_dataset(g.normal_matrix(5, 3), g.normal_vector(4), ResponseKind::continuous),
                  DimensionError);
  MatrixXd bad = g.normal_matrix(3, 2);
  bad(1, 1) = std::nan("");
  CHECK_THROWS_AS(validate_dataset(bad, g.normal_vector(3), ResponseKind::continuous), DataError);
  CHECK_THROWS_AS(validate_dataset(g.normal_matrix(3, 2), Eigen::Vector3d(0.0, 1.0, 0.5),
                                   ResponseKind::binary),
                  DataError);
  CHECK_NOTHROW(validate_dataset(g.normal_matrix(3, 2), Eigen::Vector3d(0.0, 1.0, 1.0),
                                 ResponseKind::binary));
  CHECK_FALSE(validate_dataset(g.normal_matrix(2, 4), g.normal_vector(2), ResponseKind::continuous)
                  .full_rank());
}

TEST_CASE("SpikeSlabHyper validation") {
  const SpikeSlabHyper h;
  CHECK(h.v0() == 0.01);
  CHECK(h.v1() == 100.0);
  CHECK(h.lambda() == 0.0);
  CHECK(SpikeSlabHyper::create(0.1, 1.0, 1.0, 1.0, 0.2).lambda() == logit(0.2));
  CHECK_THROWS_AS(SpikeSlabHyper::create(1.0, 1.0, 0.5, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(SpikeSlabHyper::create(0.0, 1.0, 0.5, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(SpikeSlabHyper::create(0.1, 1.0, 0.0, 0.5, 0.5), DomainError);
  CHECK_THROWS_AS(SpikeSlabHyper::create(0.1, 1.0, 0.5, -1.0, 0.5), DomainError);
  CHECK_THROWS_AS(SpikeSlabHyper::create(0.1, 1.0, 0.5, 0.5, 1.0), DomainError);
}
