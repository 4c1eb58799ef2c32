#include <catch_amalgamated.hpp>

#include <cmath>

#include "ssvb/experiments.hpp"

using namespace ssvb;
using Catch::Approx;

namespace {

TruthSpec truth_of(const VectorXd& beta, double sigma0 = 1.0) {
  TruthSpec t;
  t.beta0 = beta;
  t.sigma0 = sigma0;
  return t;
}

VectorXd ten_with_three_signals() {
  VectorXd b = VectorXd::Zero(10);
  b[0] = 1.5;
  b[3] = -1.0;
  b[7] = 2.0;
  return b;
}

}  // namespace

TEST_CASE("truth accessors and validation") {
  TruthSpec t = truth_of(Eigen::Vector4d(0.0, -0.5, 2.0, 0.0));
  CHECK(t.support() == std::vector<std::size_t>{1, 2});
  CHECK(t.l0() == 0.5);
  CHECK(truth_of(VectorXd::Zero(3)).l0() == 0.0);
  t.sigma0 = 0.0;
  CHECK_THROWS_AS(t.validate(), DomainError);
  TruthSpec c = truth_of(VectorXd::Ones(2));
  c.x_dist = XDistribution::equicorrelated(1.0);
  CHECK_THROWS_AS(c.validate(), DomainError);
  CHECK_THROWS_AS(simulate(SimModel::linear, truth_of(VectorXd::Ones(2)), 0, 1), DomainError);
}

TEST_CASE("null response is centered") {
  const std::size_t n = 2000;
  const SimulatedData s = simulate(SimModel::linear, truth_of(VectorXd::Zero(3)), n, 42);
  CHECK(std::abs(s.data.y().mean()) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("simulation is reproducible and streams are independent") {
  const TruthSpec t = truth_of(Eigen::Vector3d(1.0, 0.0, -1.0));
  const SimulatedData a = simulate(SimModel::linear, t, 50, 7);
  const SimulatedData b = simulate(SimModel::linear, t, 50, 7);
  CHECK(a.data.x() == b.data.x());
  CHECK(a.data.y() == b.data.y());
  const SimulatedData c = simulate(SimModel::linear, t, 50, 8);
  CHECK(a.data.x() != c.data.x());

  const SimulatedData s1 = simulate_with_streams(SimModel::linear, t, 50, 100, 200);
  const SimulatedData s2 = simulate_with_streams(SimModel::linear, t, 50, 100, 999);
  CHECK(s1.data.x() == s2.data.x());
  CHECK(s1.data.y() != s2.data.y());

  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
}

TEST_CASE("design second moments") {
  const SimulatedData s = simulate(SimModel::linear, truth_of(VectorXd::Zero(4)), 10000, 3);
  const MatrixXd m = s.data.gram() / 10000.0;
  CHECK((m - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 0.1);

  TruthSpec t = truth_of(VectorXd::Zero(3));
  t.x_dist = XDistribution::equicorrelated(0.6);
  const SimulatedData e = simulate(SimModel::linear, t, 10000, 4);
  const MatrixXd me = e.data.gram() / 10000.0;
  CHECK(me(0, 1) == Approx(0.6).margin(0.05));
  CHECK(me(2, 2) == Approx(1.0).margin(0.05));
}

TEST_CASE("quantile and logistic generators") {
  TruthSpec t = truth_of(Eigen::Vector2d(1.0, -2.0), 0.7);
  t.q_level = 0.2;
  const SimulatedData q = simulate(SimModel::quantile, t, 20000, 5);
  const VectorXd resid = q.data.y() - q.data.x() * t.beta0;
  const double below = (resid.array() < 0.0).cast<double>().mean();
  CHECK(below == Approx(0.2).margin(0.01));

  const SimulatedData l = simulate(SimModel::logistic, truth_of(Eigen::Vector2d(1.0, 0.0)), 300, 6);
  CHECK(l.data.kind() == ResponseKind::binary);
  CHECK(l.data.y().minCoeff() == 0.0);
  CHECK(l.data.y().maxCoeff() == 1.0);
}

TEST_CASE("v0 admissibility") {
  const SpikeSlabHyper h;
  CHECK(check_v0_admissible(h, 1.0, 0.1));
  CHECK(1.0 / 0.01 + std::log(0.01) == Approx(95.39482981).epsilon(1e-9));
  CHECK(std::log(100.0) + 0.01 + 0.2 == Approx(4.815170185988091).epsilon(1e-12));
  CHECK(check_v0_admissible(h.with_v0(1e-12), 1.0, 5.0));
  CHECK_FALSE(check_v0_admissible(SpikeSlabHyper::create(0.25, 100.0, 0.5, 0.5, 0.5), 0.5, 0.1));
  CHECK_FALSE(check_v0_admissible(SpikeSlabHyper::create(0.5, 100.0, 0.5, 0.5, 0.5), 1.0, 10.0));
  // rho near one pushes v1 exp(-2 lambda) below v0.
  CHECK_FALSE(check_v0_admissible(SpikeSlabHyper::create(0.01, 100.0, 0.5, 0.5, 0.9999), 1.0, 0.1));
  CHECK(check_v0_admissible(h, 0.0, 0.1));
  CHECK_THROWS_AS(check_v0_admissible(h, 1.0, 0.0), DomainError);
}

TEST_CASE("experiment results do not depend on worker count") {
  ExperimentConfig cfg;
  cfg.truth = truth_of(Eigen::Vector4d(1.5, 0.0, -1.0, 0.0));
  cfg.n_grid = {50, 100};
  cfg.reps = 12;
  cfg.seed = 99;
  const ExperimentReport a = consistency_experiment(cfg);
  cfg.workers = 3;
  const ExperimentReport b = consistency_experiment(cfg);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t c = 0; c < a.cells.size(); ++c) {
    CHECK(a.cells[c].recovery_rate == b.cells[c].recovery_rate);
    CHECK(a.cells[c].mean_linf_error == b.cells[c].mean_linf_error);
    CHECK(*a.cells[c].mean_noise_error == *b.cells[c].mean_noise_error);
    CHECK(*a.cells[c].median_null_w == *b.cells[c].median_null_w);
    CHECK(a.cells[c].cell_seed == b.cells[c].cell_seed);
    CHECK(a.cells[c].failures == 0);
    CHECK_FALSE(a.cells[c].degraded);
    CHECK(a.cells[c].recovery_rate >= 0.0);
    CHECK(a.cells[c].recovery_rate <= 1.0);
  }
}

TEST_CASE("global null is recovered") {
  ExperimentConfig cfg;
  cfg.truth = truth_of(VectorXd::Zero(5));
  cfg.n_grid = {1600};
  cfg.reps = 40;
  cfg.seed = 5;
  const ExperimentReport r = consistency_experiment(cfg);
  CHECK(r.cells[0].recovery_rate >= 0.9);
  CHECK_FALSE(r.cells[0].min_signal_w.has_value());
}

TEST_CASE("estimation error shrinks with n") {
  ExperimentConfig cfg;
  cfg.truth = truth_of(ten_with_three_signals());
  cfg.n_grid = {100, 400, 1600};
  cfg.reps = 30;
  cfg.seed = 11;
  const ExperimentReport r = consistency_experiment(cfg);
  CHECK(r.linf_decreasing);
  CHECK(r.cells[0].mean_linf_error > r.cells[2].mean_linf_error);
}

TEST_CASE("scaled v0 and admissibility precondition") {
  ExperimentConfig cfg;
  cfg.algorithm = Algorithm::collapsed;
  cfg.truth = truth_of(Eigen::Vector3d(1.0, 0.0, 0.0));
  cfg.n_grid = {100, 400};
  cfg.reps = 4;
  cfg.v0_scaling = V0Scaling::inv_sqrt_n;
  cfg.v0_constant = 0.1;
  const ExperimentReport r = consistency_experiment(cfg);
  CHECK(r.cells[0].cell.v0 == Approx(0.01));
  CHECK(r.cells[1].cell.v0 == Approx(0.005));
  CHECK_FALSE(r.cells[0].mean_noise_error.has_value());
  CHECK(r.null_w_loglog_slope.has_value());

  cfg.v0_scaling = V0Scaling::sqrt_n;
  cfg.v0_constant = 1.0;
  CHECK_THROWS_AS(consistency_experiment(cfg), PreconditionError);

  ExperimentConfig empty;
  empty.truth = truth_of(VectorXd::Ones(2));
  CHECK_THROWS_AS(consistency_experiment(empty), DomainError);
}
