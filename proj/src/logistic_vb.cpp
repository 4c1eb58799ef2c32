#include "ssvb/logistic_vb.hpp"

#include <algorithm>
#include <cmath>

namespace ssvb {

double pg_mean(double b, double c) {
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("pg_mean: b must be positive");
  if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("pg_mean: c must be non-negative");
  if (c == 0.0) return 0.25 * b;
  return b / (2.0 * c) * std::tanh(0.5 * c);
}

GaussianFactor update_beta_logistic(const Dataset& data, const VectorXd& v_mean,
                                    const VectorXd& d) {
  if (data.kind() != ResponseKind::binary) {
    throw DataError("update_beta_logistic: requires a binary response");
  }
  if (v_mean.size() != static_cast<Eigen::Index>(data.n())) {
    throw DimensionError("update_beta_logistic: v must have length n");
  }
  if (d.size() != static_cast<Eigen::Index>(data.p())) {
    throw DimensionError("update_beta_logistic: precision diagonal has wrong length");
  }
  if (!(v_mean.array() > 0.0).all()) throw DomainError("update_beta_logistic: v must be positive");

  const MatrixXd& x = data.x();
  MatrixXd precision = x.transpose() * v_mean.asDiagonal() * x;
  precision.diagonal() += d;
  const VectorXd centered = (data.y().array() - 0.5).matrix();

  const CholeskyFactor chol(precision);
  GaussianFactor out;
  out.mu = chol.solve(VectorXd(x.transpose() * centered));
  out.sigma = chol.inverse();
  return out;
}

PolyaGammaUpdate update_v(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                          TiltRule tilt) {
  const MatrixXd& x = data.x();
  const VectorXd lin = x * mu;
  PolyaGammaUpdate out;
  out.second_moment = (x * sigma).cwiseProduct(x).rowwise().sum() + lin.cwiseAbs2();
  const auto n = out.second_moment.size();
  out.c.resize(n);
  out.v_mean.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = std::max(0.0, out.second_moment[i]);
    out.c[i] = tilt == TiltRule::root ? std::sqrt(m) : m;
    out.v_mean[i] = pg_mean(1.0, out.c[i]);
  }
  return out;
}

FitReport fit_logistic(const Dataset& data, const SpikeSlabHyper& hyper, const FitOptions& opts,
                       const LogisticOptions& lopts, const LogisticObserver& observer) {
  opts.validate();
  if (data.kind() != ResponseKind::binary) {
    throw DataError("fit_logistic: requires a binary response");
  }
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto p = static_cast<Eigen::Index>(data.p());

  LogisticState state;
  state.w = VectorXd::Constant(p, 0.5);
  state.mu = VectorXd::Zero(p);
  state.v_mean = VectorXd::Ones(n);
  state.c = VectorXd::Zero(n);

  FitReport report;
  for (std::size_t t = 1; t <= opts.max_iter; ++t) {
    const VectorXd d = precision_diag(state.w, hyper);
    GaussianFactor beta = update_beta_logistic(data, state.v_mean, d);
    PolyaGammaUpdate pg = update_v(data, beta.mu, beta.sigma, lopts.tilt);
    VectorXd w = update_gamma(beta.mu, beta.sigma.diagonal(), hyper);

    const double delta = std::max((beta.mu - state.mu).cwiseAbs().maxCoeff(),
                                  (w - state.w).cwiseAbs().maxCoeff());

    state.mu = std::move(beta.mu);
    state.sigma = std::move(beta.sigma);
    state.w = std::move(w);
    state.c = std::move(pg.c);
    state.v_mean = std::move(pg.v_mean);
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
  report.selected = select_by_threshold(state.w);
  return report;
}

}  // namespace ssvb
