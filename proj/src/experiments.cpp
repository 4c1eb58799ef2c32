#include "ssvb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "ssvb/collapsed_vb.hpp"
#include "ssvb/linear_vb.hpp"
#include "ssvb/logistic_vb.hpp"
#include "ssvb/quantile_vb.hpp"

namespace ssvb {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

MatrixXd draw_design(const XDistribution& dist, std::size_t n, std::size_t p, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
  const bool shared = dist.kind == XDistribution::Kind::equicorrelated;
  const double own = shared ? std::sqrt(1.0 - dist.r) : 1.0;
  const double common = shared ? std::sqrt(dist.r) : 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double z0 = shared ? normal(rng) : 0.0;
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = own * normal(rng) + common * z0;
  }
  return x;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

FitReport run_fit(Algorithm algorithm, const Dataset& data, const SpikeSlabHyper& hyper,
                  const TruthSpec& truth, const FitOptions& opts) {
  switch (algorithm) {
    case Algorithm::linear:
      return fit_linear(data, hyper, opts);
    case Algorithm::collapsed:
      return fit_collapsed(data, hyper, opts);
    case Algorithm::quantile:
      return fit_quantile(data, truth.q_level, hyper, opts);
    case Algorithm::logistic:
      return fit_logistic(data, hyper, opts);
  }
  throw DomainError("unknown algorithm");
}

struct RepOutcome {
  bool ok = false;
  bool recovered = false;
  double linf = 0.0;
  std::optional<double> noise;
  std::vector<double> null_w;
  std::vector<double> signal_w;
};

bool strictly_decreasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i] < v[i - 1])) return false;
  }
  return true;
}

}  // namespace

void TruthSpec::validate() const {
  if (beta0.size() == 0) throw DomainError("truth: beta0 must be non-empty");
  if (!beta0.allFinite()) throw DomainError("truth: beta0 must be finite");
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw DomainError("truth: sigma0 must be positive");
  if (!(q_level > 0.0 && q_level < 1.0)) throw DomainError("truth: q_level must lie in (0, 1)");
  if (x_dist.kind == XDistribution::Kind::equicorrelated && !(x_dist.r >= 0.0 && x_dist.r < 1.0)) {
    throw DomainError("truth: correlation must lie in [0, 1)");
  }
}

std::vector<std::size_t> TruthSpec::support() const {
  std::vector<std::size_t> s;
  for (Eigen::Index j = 0; j < beta0.size(); ++j) {
    if (beta0[j] != 0.0) s.push_back(static_cast<std::size_t>(j));
  }
  return s;
}

double TruthSpec::l0() const {
  double best = 0.0;
  for (Eigen::Index j = 0; j < beta0.size(); ++j) {
    const double a = std::abs(beta0[j]);
    if (a > 0.0 && (best == 0.0 || a < best)) best = a;
  }
  return best;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

SimulatedData simulate(SimModel model, const TruthSpec& truth, std::size_t n, std::uint64_t seed) {
  return simulate_with_streams(model, truth, n, derive_seed(seed, 0), derive_seed(seed, 1));
}

SimulatedData simulate_with_streams(SimModel model, const TruthSpec& truth, std::size_t n,
                                    std::uint64_t x_seed, std::uint64_t noise_seed) {
  truth.validate();
  if (n < 1) throw DomainError("simulate: n must be at least 1");
  const std::size_t p = static_cast<std::size_t>(truth.beta0.size());

  std::mt19937_64 x_rng(x_seed);
  std::mt19937_64 noise_rng(noise_seed);
  MatrixXd x = draw_design(truth.x_dist, n, p, x_rng);
  const VectorXd lin = x * truth.beta0;
  VectorXd y(static_cast<Eigen::Index>(n));

  std::normal_distribution<double> normal(0.0, 1.0);
  ResponseKind kind = ResponseKind::continuous;
  switch (model) {
    case SimModel::linear:
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = lin[i] + truth.sigma0 * normal(noise_rng);
      break;
    case SimModel::quantile: {
      // Normal / exponential mixture whose q-quantile is zero.
      const ALDConstants k = ald_constants(truth.q_level);
      std::exponential_distribution<double> expo(1.0 / truth.sigma0);
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        const double e = expo(noise_rng);
        y[i] = lin[i] + k.c1 * e + std::sqrt(k.c2 * truth.sigma0 * e) * normal(noise_rng);
      }
      break;
    }
    case SimModel::logistic: {
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = unif(noise_rng) < expit(lin[i]) ? 1.0 : 0.0;
      kind = ResponseKind::binary;
      break;
    }
  }
  return SimulatedData{validate_dataset(std::move(x), std::move(y), kind), truth};
}

bool check_v0_admissible(const SpikeSlabHyper& hyper, double l0, double delta) {
  if (!(delta > 0.0)) throw DomainError("check_v0_admissible: delta must be positive");
  if (!(l0 >= 0.0) || !std::isfinite(l0)) throw DomainError("check_v0_admissible: l0 must be >= 0");
  const double v0 = hyper.v0();
  const double v1 = hyper.v1();
  const double lambda = hyper.lambda();
  if (!(v0 < std::min(v1 * std::exp(-2.0 * lambda), v1))) return false;
  if (l0 == 0.0) return true;
  const double l2 = l0 * l0;
  if (!(v0 < l2)) return false;
  return l2 / v0 + std::log(v0) >= std::log(v1) + l2 / v1 - 2.0 * lambda + 2.0 * delta;
}

SimModel sim_model_for(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::linear:
    case Algorithm::collapsed:
      return SimModel::linear;
    case Algorithm::quantile:
      return SimModel::quantile;
    case Algorithm::logistic:
      return SimModel::logistic;
  }
  throw DomainError("unknown algorithm");
}

void ExperimentConfig::validate() const {
  truth.validate();
  fit.validate();
  if (n_grid.empty()) throw DomainError("experiment: n grid is empty");
  for (std::size_t n : n_grid) {
    if (n < 1) throw DomainError("experiment: grid sizes must be positive");
  }
  if (reps < 1) throw DomainError("experiment: reps must be at least 1");
  if (!(delta > 0.0)) throw DomainError("experiment: delta must be positive");
  if (v0_scaling != V0Scaling::fixed && !(v0_constant > 0.0)) {
    throw DomainError("experiment: v0 constant must be positive");
  }
}

ExperimentReport consistency_experiment(const ExperimentConfig& config) {
  config.validate();
  const SimModel model = sim_model_for(config.algorithm);
  const std::vector<std::size_t> support = config.truth.support();
  const std::size_t p = static_cast<std::size_t>(config.truth.beta0.size());
  std::vector<bool> is_signal(p, false);
  for (std::size_t j : support) is_signal[j] = true;

  // Resolve and vet every cell before any fitting starts.
  std::vector<SpikeSlabHyper> hypers;
  for (std::size_t n : config.n_grid) {
    const double root_n = std::sqrt(static_cast<double>(n));
    double v0 = config.hyper.v0();
    if (config.v0_scaling == V0Scaling::inv_sqrt_n) v0 = config.v0_constant / root_n;
    if (config.v0_scaling == V0Scaling::sqrt_n) v0 = config.v0_constant * root_n;
    const SpikeSlabHyper h = config.hyper.with_v0(v0);
    if (!support.empty() && !check_v0_admissible(h, config.truth.l0(), config.delta)) {
      throw PreconditionError("experiment: v0 = " + std::to_string(v0) + " at n = " +
                              std::to_string(n) + " is not admissible");
    }
    hypers.push_back(h);
  }

  ExperimentReport report;
  report.algorithm = config.algorithm;
  report.model = model;
  report.seed = config.seed;

  for (std::size_t c = 0; c < config.n_grid.size(); ++c) {
    const std::size_t n = config.n_grid[c];
    const SpikeSlabHyper& hyper = hypers[c];
    const std::uint64_t cell_seed = derive_seed(config.seed, c + 1);
    std::vector<RepOutcome> outcomes(config.reps);

    const auto run_rep = [&](std::size_t r) {
      RepOutcome& out = outcomes[r];
      try {
        const SimulatedData sim = simulate(model, config.truth, n, derive_seed(cell_seed, r));
        const FitReport fit = run_fit(config.algorithm, sim.data, hyper, config.truth, config.fit);
        out.recovered = fit.selected == support;
        out.linf = (fit.mu - config.truth.beta0).cwiseAbs().maxCoeff();
        if (fit.tau) {
          const double target = model == SimModel::quantile
                                    ? config.truth.sigma0
                                    : config.truth.sigma0 * config.truth.sigma0;
          out.noise = std::abs(1.0 / *fit.tau - target);
        }
        for (std::size_t j = 0; j < p; ++j) {
          const double wj = fit.w[static_cast<Eigen::Index>(j)];
          (is_signal[j] ? out.signal_w : out.null_w).push_back(wj);
        }
        out.ok = true;
      } catch (const std::exception&) {
        out.ok = false;
      }
    };

    const unsigned workers = std::max(1U, config.workers);
    if (workers == 1) {
      for (std::size_t r = 0; r < config.reps; ++r) run_rep(r);
    } else {
      std::atomic<std::size_t> next{0};
      std::vector<std::thread> pool;
      for (unsigned t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
          for (std::size_t r = next++; r < config.reps; r = next++) run_rep(r);
        });
      }
      for (auto& th : pool) th.join();
    }

    // Reduce in replication order.
    CellMetrics m;
    m.cell = GridCell{n, p, hyper.v0(), hyper.v1()};
    m.cell_seed = cell_seed;
    m.reps = config.reps;
    std::size_t ok = 0;
    std::size_t recovered = 0;
    double linf_sum = 0.0;
    double noise_sum = 0.0;
    std::size_t noise_count = 0;
    std::vector<double> null_w;
    std::vector<double> signal_w;
    for (const RepOutcome& o : outcomes) {
      if (!o.ok) {
        ++m.failures;
        continue;
      }
      ++ok;
      recovered += o.recovered ? 1 : 0;
      linf_sum += o.linf;
      if (o.noise) {
        noise_sum += *o.noise;
        ++noise_count;
      }
      null_w.insert(null_w.end(), o.null_w.begin(), o.null_w.end());
      signal_w.insert(signal_w.end(), o.signal_w.begin(), o.signal_w.end());
    }
    m.degraded = static_cast<double>(m.failures) > 0.05 * static_cast<double>(m.reps);
    if (ok > 0) {
      m.recovery_rate = static_cast<double>(recovered) / static_cast<double>(ok);
      m.mean_linf_error = linf_sum / static_cast<double>(ok);
    }
    if (noise_count > 0) m.mean_noise_error = noise_sum / static_cast<double>(noise_count);
    if (!null_w.empty()) m.median_null_w = median(null_w);
    if (!signal_w.empty()) m.min_signal_w = *std::min_element(signal_w.begin(), signal_w.end());
    report.cells.push_back(m);
  }

  std::vector<double> rec;
  std::vector<double> linf;
  std::vector<double> noise;
  std::vector<double> null_w;
  for (const CellMetrics& m : report.cells) {
    rec.push_back(m.recovery_rate);
    linf.push_back(m.mean_linf_error);
    if (m.mean_noise_error) noise.push_back(*m.mean_noise_error);
    if (m.median_null_w) null_w.push_back(*m.median_null_w);
  }
  report.recovery_nondecreasing = true;
  for (std::size_t i = 1; i < rec.size(); ++i) {
    if (rec[i] < rec[i - 1]) report.recovery_nondecreasing = false;
  }
  report.linf_decreasing = strictly_decreasing(linf);
  if (noise.size() == report.cells.size()) report.noise_decreasing = strictly_decreasing(noise);
  if (null_w.size() == report.cells.size()) {
    report.null_w_decreasing = strictly_decreasing(null_w);
    const bool positive = std::all_of(null_w.begin(), null_w.end(), [](double v) { return v > 0.0; });
    if (positive && null_w.size() >= 2) {
      double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
      const double k = static_cast<double>(null_w.size());
      for (std::size_t i = 0; i < null_w.size(); ++i) {
        const double lx = std::log(static_cast<double>(report.cells[i].cell.n));
        const double ly = std::log(null_w[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
      }
      const double denom = k * sxx - sx * sx;
      if (denom > 0.0) report.null_w_loglog_slope = (k * sxy - sx * sy) / denom;
    }
  }
  return report;
}

}  // namespace ssvb
