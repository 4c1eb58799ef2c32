#include "ssvb/linear_vb.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ssvb {

void FitOptions::validate() const {
  if (!(tol > 0.0)) throw DomainError("FitOptions: tol must be positive");
  if (max_iter < 1) throw DomainError("FitOptions: max_iter must be at least 1");
}

std::vector<std::size_t> select_by_threshold(const VectorXd& w) {
  std::vector<std::size_t> out;
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w[j] > kSelectionThreshold) out.push_back(static_cast<std::size_t>(j));
  }
  return out;
}

VectorXd precision_diag(const VectorXd& w, const SpikeSlabHyper& hyper) {
  const double inv_v0 = 1.0 / hyper.v0();
  const double slope = 1.0 / hyper.v1() - inv_v0;
  return (inv_v0 + slope * w.array()).matrix();
}

GaussianFactor update_beta(const Dataset& data, double tau, const VectorXd& d) {
  if (!(tau > 0.0)) throw DomainError("update_beta: tau must be positive");
  if (d.size() != static_cast<Eigen::Index>(data.p())) {
    throw DimensionError("update_beta: precision diagonal has wrong length");
  }
  MatrixXd precision = tau * data.gram();
  precision.diagonal() += d;
  const CholeskyFactor chol(precision);
  GaussianFactor out;
  out.mu = chol.solve(VectorXd(tau * data.xty()));
  out.sigma = chol.inverse();
  return out;
}

NoiseUpdate update_sigma(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                         const SpikeSlabHyper& hyper) {
  const double rss = (data.y() - data.x() * mu).squaredNorm();
  const double trace = data.gram().cwiseProduct(sigma).sum();
  NoiseUpdate out;
  out.a1 = hyper.a() + 0.5 * static_cast<double>(data.n());
  out.b1 = hyper.b() + 0.5 * (rss + trace);
  out.tau = out.a1 / out.b1;
  return out;
}

VectorXd update_gamma(const VectorXd& mu, const VectorXd& sigma_diag, const SpikeSlabHyper& hyper) {
  if (mu.size() != sigma_diag.size()) throw DimensionError("update_gamma: length mismatch");
  const double base = hyper.lambda() + 0.5 * std::log(hyper.v0() / hyper.v1());
  const double gap = 1.0 / hyper.v0() - 1.0 / hyper.v1();
  VectorXd w(mu.size());
  for (Eigen::Index j = 0; j < mu.size(); ++j) {
    w[j] = expit(base + 0.5 * (mu[j] * mu[j] + sigma_diag[j]) * gap);
  }
  return w;
}

FitReport fit_linear(const Dataset& data, const SpikeSlabHyper& hyper, const FitOptions& opts,
                     const LinearObserver& observer) {
  opts.validate();
  if (data.kind() != ResponseKind::continuous) {
    throw DataError("fit_linear: requires a continuous response");
  }
  const auto p = static_cast<Eigen::Index>(data.p());

  LinearState state;
  state.w = VectorXd::Constant(p, 0.5);
  state.mu = VectorXd::Zero(p);
  state.tau = 1.0;

  FitReport report;
  for (std::size_t t = 1; t <= opts.max_iter; ++t) {
    const VectorXd d = precision_diag(state.w, hyper);
    GaussianFactor beta = update_beta(data, state.tau, d);
    const NoiseUpdate noise = update_sigma(data, beta.mu, beta.sigma, hyper);
    VectorXd w = update_gamma(beta.mu, beta.sigma.diagonal(), hyper);

    const double delta = std::max({(beta.mu - state.mu).cwiseAbs().maxCoeff(),
                                   (w - state.w).cwiseAbs().maxCoeff(),
                                   std::abs(noise.tau - state.tau) / noise.tau});

    state.mu = std::move(beta.mu);
    state.sigma = std::move(beta.sigma);
    state.w = std::move(w);
    state.tau = noise.tau;
    state.a1 = noise.a1;
    state.b1 = noise.b1;
    state.t = t;
    if (observer) observer(state);
    if (opts.track_trace) report.delta_trace.push_back(delta);
    report.iterations = t;
    if (delta < opts.tol) {
      report.converged = true;
      break;
    }
  }

  report.mu = state.mu;
  report.w = state.w;
  report.tau = state.tau;
  report.selected = select_by_threshold(state.w);
  return report;
}

namespace {

void require_bounds_regime(const Dataset& data, const char* who) {
  if (data.p() > data.n()) {
    throw PreconditionError(std::string(who) + ": requires p <= n");
  }
  if (!data.full_rank()) {
    throw PreconditionError(std::string(who) + ": requires X of full column rank");
  }
}

}  // namespace

TauBounds tau_bounds(const Dataset& data, const SpikeSlabHyper& hyper, double tau0) {
  require_bounds_regime(data, "tau_bounds");
  if (!(tau0 > 0.0)) throw DomainError("tau_bounds: tau0 must be positive");

  const double n = static_cast<double>(data.n());
  const double p = static_cast<double>(data.p());
  const double shape2 = 2.0 * hyper.a() + n;

  const CholeskyFactor gram_chol(data.gram());
  const VectorXd beta_ls = gram_chol.solve(data.xty());
  const double fitted_ss = data.xty().dot(beta_ls);  // y^T X (X^T X)^{-1} X^T y
  const double rss_ls = (data.y() - data.x() * beta_ls).squaredNorm();

  TauBounds out;
  out.tau_l = (shape2 - p) / (2.0 * hyper.b() + 2.0 * data.yty() + 2.0 * fitted_ss +
                              p * (shape2 - p) / (shape2 * tau0));
  out.tau_r = shape2 / (2.0 * hyper.b() + rss_ls);
  return out;
}

SparsityDiagnostics sparsity_diagnostics(const Dataset& data, const SpikeSlabHyper& hyper,
                                         const TauBounds& bounds, std::size_t j, double w_prev_j) {
  require_bounds_regime(data, "sparsity_diagnostics");
  const std::size_t p = data.p();
  if (p < 2) throw PreconditionError("sparsity_diagnostics: requires p >= 2");
  if (j >= p) throw DimensionError("sparsity_diagnostics: coordinate index out of range");

  std::vector<Eigen::Index> rest;
  rest.reserve(p - 1);
  for (std::size_t k = 0; k < p; ++k) {
    if (k != j) rest.push_back(static_cast<Eigen::Index>(k));
  }
  const auto jj = static_cast<Eigen::Index>(j);
  const MatrixXd g_rest = data.gram()(rest, rest);
  const VectorXd cross = data.gram()(rest, jj);
  const VectorXd xty_rest = data.xty()(rest);

  const CholeskyFactor chol(g_rest);
  const double explained = cross.dot(chol.solve(cross));
  const double schur = data.gram()(jj, jj) - explained;
  if (!(schur > 0.0)) {
    throw PreconditionError("sparsity_diagnostics: X_j lies in the span of the other columns");
  }

  SparsityDiagnostics out;
  out.s_j = bounds.tau_l * schur;
  out.h_j = 1.0 / (1.0 / hyper.v0() + out.s_j);
  out.c0 = std::sqrt(std::max(0.0, explained)) *
           std::sqrt(std::max(0.0, xty_rest.dot(chol.solve(xty_rest))));
  out.c_j = bounds.tau_r * (std::abs(data.xty()[jj]) + out.c0);
  out.m_j = hyper.lambda() +
            (out.h_j * out.h_j * out.c_j * out.c_j + out.h_j) / (2.0 * hyper.v0());
  out.sigma_bound =
      1.0 / (1.0 / hyper.v0() + (1.0 / hyper.v1() - 1.0 / hyper.v0()) * w_prev_j + out.s_j);
  return out;
}

}  // namespace ssvb
