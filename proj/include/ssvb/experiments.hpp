#pragma once

// Synthetic data with known truth and replicated simulate -> fit studies that
// track how estimation error, exact support recovery and null inclusion
// probabilities move with n.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ssvb/core_math.hpp"
#include "ssvb/fit.hpp"

namespace ssvb {

enum class SimModel { linear, quantile, logistic };

struct XDistribution {
  enum class Kind { iid_normal, equicorrelated };
  Kind kind = Kind::iid_normal;
  double r = 0.0;  // common correlation, equicorrelated only

  static XDistribution iid() { return {}; }
  static XDistribution equicorrelated(double r) { return {Kind::equicorrelated, r}; }
};

struct TruthSpec {
  VectorXd beta0;
  double sigma0 = 1.0;    // noise sd (linear) or ALD scale (quantile); unused for logistic
  double q_level = 0.5;   // quantile model only
  XDistribution x_dist;

  /// Throws DomainError on empty or non-finite beta0, sigma0 <= 0,
  /// q_level outside (0, 1), or r outside [0, 1).
  void validate() const;
  /// {j : beta0_j != 0}, ascending.
  std::vector<std::size_t> support() const;
  /// min |beta0_j| over the support; 0 when the support is empty.
  double l0() const;
};

struct SimulatedData {
  Dataset data;
  TruthSpec truth;
};

/// Draws n rows from the truth. X and the noise come from two independent
/// streams derived from `seed`.
SimulatedData simulate(SimModel model, const TruthSpec& truth, std::size_t n, std::uint64_t seed);

/// Same as simulate with explicit stream seeds, so the noise stream can be
/// replaced while X stays fixed.
SimulatedData simulate_with_streams(SimModel model, const TruthSpec& truth, std::size_t n,
                                    std::uint64_t x_seed, std::uint64_t noise_seed);

/// Mixes (seed, a, b) into an independent 64-bit stream seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

/// (i) v0 < min(v1 exp(-2 lambda), v1), and when l0 > 0 additionally
/// v0 < l0^2 and l0^2/v0 + ln v0 >= ln v1 + l0^2/v1 - 2 lambda + 2 delta.
/// Throws DomainError unless delta > 0 and l0 >= 0.
bool check_v0_admissible(const SpikeSlabHyper& hyper, double l0, double delta);

enum class Algorithm { linear, collapsed, quantile, logistic };

/// v0 per cell: fixed uses hyper.v0(); the others use v0_constant * n^{-1/2}
/// or v0_constant * n^{1/2}.
enum class V0Scaling { fixed, inv_sqrt_n, sqrt_n };

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::linear;
  TruthSpec truth;
  std::vector<std::size_t> n_grid;
  SpikeSlabHyper hyper;
  V0Scaling v0_scaling = V0Scaling::fixed;
  double v0_constant = 0.1;
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  double delta = 0.1;  // margin in the admissibility check
  FitOptions fit{1e-6, 500, false};
  unsigned workers = 1;

  void validate() const;
};

struct GridCell {
  std::size_t n;
  std::size_t p;
  double v0;
  double v1;
};

struct CellMetrics {
  GridCell cell;
  std::uint64_t cell_seed = 0;   // replication r uses derive_seed(cell_seed, r)
  std::size_t reps = 0;
  std::size_t failures = 0;
  bool degraded = false;          // more than 5% of fits failed
  double recovery_rate = 0.0;     // fraction with selected == support
  double mean_linf_error = 0.0;   // mean ||mu - beta0||_inf
  /// Mean |1/tau - sigma0^2| (linear) or |1/tau - sigma0| (quantile).
  std::optional<double> mean_noise_error;
  std::optional<double> median_null_w;   // pooled over reps and null coordinates
  std::optional<double> min_signal_w;    // over reps and signal coordinates
};

struct ExperimentReport {
  Algorithm algorithm = Algorithm::linear;
  SimModel model = SimModel::linear;
  std::uint64_t seed = 0;
  std::vector<CellMetrics> cells;
  bool recovery_nondecreasing = false;
  bool linf_decreasing = false;
  std::optional<bool> noise_decreasing;
  std::optional<bool> null_w_decreasing;
  /// Least-squares slope of log(median null w) against log n.
  std::optional<double> null_w_loglog_slope;
};

/// Model used to generate data for an algorithm.
SimModel sim_model_for(Algorithm algorithm);

/// Runs config.reps simulate -> fit cycles per n. Replications are independent
/// of execution order and worker count. Throws PreconditionError when the
/// truth has signals and some cell's hyperparameters fail check_v0_admissible.
ExperimentReport consistency_experiment(const ExperimentConfig& config);

}  // namespace ssvb
