#include "ssvb/quantile_vb.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ssvb {

ALDConstants ald_constants(double q_level) {
  if (!(q_level > 0.0 && q_level < 1.0)) {
    throw DomainError("quantile level must lie in (0, 1), got " + std::to_string(q_level));
  }
  const double spread = q_level * (1.0 - q_level);
  return ALDConstants{q_level, (1.0 - 2.0 * q_level) / spread, 2.0 / spread};
}

GigMoments gig_moments(double lambda1, double lambda2) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0) || !std::isfinite(lambda1) || !std::isfinite(lambda2)) {
    throw DomainError("gig_moments: both parameters must be positive and finite");
  }
  const double ratio = std::sqrt(lambda1 / lambda2);
  return GigMoments{1.0 / ratio, ratio * (1.0 + 1.0 / std::sqrt(lambda1 * lambda2))};
}

GaussianFactor update_beta_quantile(const Dataset& data, const VectorXd& e1, double tau_prec,
                                    const VectorXd& d, const ALDConstants& consts) {
  const auto n = static_cast<Eigen::Index>(data.n());
  if (e1.size() != n) throw DimensionError("update_beta_quantile: E1 must have length n");
  if (d.size() != static_cast<Eigen::Index>(data.p())) {
    throw DimensionError("update_beta_quantile: precision diagonal has wrong length");
  }
  if (!(tau_prec > 0.0)) throw DomainError("update_beta_quantile: tau must be positive");
  if (!(e1.array() > 0.0).all()) throw DomainError("update_beta_quantile: E1 must be positive");

  const double scale = tau_prec / consts.c2;
  const MatrixXd& x = data.x();
  MatrixXd precision = scale * (x.transpose() * e1.asDiagonal() * x);
  precision.diagonal() += d;
  const VectorXd y0 = (e1.array() * data.y().array() - consts.c1).matrix();

  const CholeskyFactor chol(precision);
  GaussianFactor out;
  out.mu = chol.solve(VectorXd(scale * (x.transpose() * y0)));
  out.sigma = chol.inverse();
  return out;
}

namespace {

VectorXd leverage_terms(const MatrixXd& x, const MatrixXd& sigma) {
  return (x * sigma).cwiseProduct(x).rowwise().sum();  // x_i^T Sigma x_i
}

}  // namespace

NoiseUpdate update_sigma_quantile(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                                  const VectorXd& e1, const VectorXd& e2,
                                  const ALDConstants& consts, const SpikeSlabHyper& hyper,
                                  QuantileShape shape) {
  const auto n = static_cast<Eigen::Index>(data.n());
  if (e1.size() != n || e2.size() != n) {
    throw DimensionError("update_sigma_quantile: moment vectors must have length n");
  }
  const VectorXd d1 = data.y() - data.x() * mu;
  const VectorXd d2 = d1.array().square().matrix() + leverage_terms(data.x(), sigma);

  const double c1 = consts.c1;
  const double c2 = consts.c2;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    sum += (1.0 + c1 * c1 / (2.0 * c2)) * e2[i] - (c1 / c2) * d1[i] + d2[i] * e1[i] / (2.0 * c2);
  }

  NoiseUpdate out;
  const double nn = static_cast<double>(data.n());
  out.a1 = hyper.a() + (shape == QuantileShape::derivation ? 1.5 * nn : 0.5 * nn);
  out.b1 = hyper.b() + sum;
  if (!(out.b1 > 0.0)) {
    throw NumericalDomainError("update_sigma_quantile: B1 = " + std::to_string(out.b1) +
                               " is not positive");
  }
  out.tau = out.a1 / out.b1;
  return out;
}

LatentMoments update_latent_e(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                              double tau_prec, const ALDConstants& consts) {
  if (!(tau_prec > 0.0)) throw DomainError("update_latent_e: tau must be positive");
  const VectorXd resid = data.y() - data.x() * mu;
  const VectorXd lev = leverage_terms(data.x(), sigma);
  const double lambda2 = tau_prec * (2.0 * consts.c2 + consts.c1 * consts.c1) / consts.c2;

  const auto n = static_cast<Eigen::Index>(data.n());
  LatentMoments out{VectorXd(n), VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d2 = std::max(resid[i] * resid[i] + lev[i], kResidualFloor);
    const GigMoments m = gig_moments(tau_prec * d2 / consts.c2, lambda2);
    out.e1[i] = m.m_neg1;
    out.e2[i] = m.m_pos1;
  }
  return out;
}

FitReport fit_quantile(const Dataset& data, double q_level, const SpikeSlabHyper& hyper,
                       const FitOptions& opts, const QuantileOptions& qopts,
                       const QuantileObserver& observer) {
  opts.validate();
  if (data.kind() != ResponseKind::continuous) {
    throw DataError("fit_quantile: requires a continuous response");
  }
  const ALDConstants consts = ald_constants(q_level);
  const auto n = static_cast<Eigen::Index>(data.n());
  const auto p = static_cast<Eigen::Index>(data.p());

  QuantileState state;
  state.w = VectorXd::Constant(p, 0.5);
  state.mu = VectorXd::Zero(p);
  state.tau_prec = 1.0;
  state.e1 = VectorXd::Ones(n);
  state.e2 = VectorXd::Ones(n);

  FitReport report;
  for (std::size_t t = 1; t <= opts.max_iter; ++t) {
    const VectorXd d = precision_diag(state.w, hyper);
    GaussianFactor beta = update_beta_quantile(data, state.e1, state.tau_prec, d, consts);
    const NoiseUpdate noise = update_sigma_quantile(data, beta.mu, beta.sigma, state.e1, state.e2,
                                                    consts, hyper, qopts.shape);
    LatentMoments latent = update_latent_e(data, beta.mu, beta.sigma, noise.tau, consts);
    VectorXd w = update_gamma(beta.mu, beta.sigma.diagonal(), hyper);

    const double delta = std::max({(beta.mu - state.mu).cwiseAbs().maxCoeff(),
                                   (w - state.w).cwiseAbs().maxCoeff(),
                                   std::abs(noise.tau - state.tau_prec) / noise.tau});

    state.mu = std::move(beta.mu);
    state.sigma = std::move(beta.sigma);
    state.w = std::move(w);
    state.tau_prec = noise.tau;
    state.a1 = noise.a1;
    state.b1 = noise.b1;
    state.e1 = std::move(latent.e1);
    state.e2 = std::move(latent.e2);
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
  report.tau = state.tau_prec;
  report.selected = select_by_threshold(state.w);
  return report;
}

}  // namespace ssvb
