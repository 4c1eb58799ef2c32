#include "ssvb/oracle.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace ssvb {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

void check_gamma(const Dataset& data, const GammaBits& gamma) {
  if (gamma.size() != data.p()) throw DimensionError("gamma length does not match p");
  for (auto g : gamma) {
    if (g > 1) throw DomainError("gamma entries must be 0 or 1");
  }
}

VectorXd slab_variances(const SpikeSlabHyper& hyper, const GammaBits& gamma) {
  VectorXd c(static_cast<Eigen::Index>(gamma.size()));
  for (std::size_t j = 0; j < gamma.size(); ++j) {
    c[static_cast<Eigen::Index>(j)] = gamma[j] ? hyper.v1() : hyper.v0();
  }
  return c;
}

// log N(y; 0, sigma^2 I + X C X^T) as a function of u = log sigma^2.
class GaussianEvidence {
 public:
  GaussianEvidence(const Dataset& data, const VectorXd& c, MarginalizationPath path)
      : data_(data), c_(c), n_(static_cast<double>(data.n())) {
    const bool dense = path == MarginalizationPath::dense ||
                       (path == MarginalizationPath::automatic && data.n() <= 4 * data.p());
    dense_ = dense;
    if (dense_) {
      xcx_ = data.x() * c.asDiagonal() * data.x().transpose();
      return;
    }
    // K = C^{1/2} X^T X C^{1/2} = V diag(lambda) V^T. With a_k = z_k^2 / lambda_k,
    // z = V^T C^{1/2} X^T y, the quadratic form is r / s + sum_k a_k / (s + lambda_k)
    // where r is the part of ||y||^2 outside the column space.
    const VectorXd root = c.cwiseSqrt();
    const MatrixXd k = root.asDiagonal() * data.gram() * root.asDiagonal();
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    const VectorXd z = eig.eigenvectors().transpose() * root.cwiseProduct(data.xty());
    const double cutoff = 1e-12 * std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    double explained = 0.0;
    for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
      const double lam = eig.eigenvalues()[i];
      if (lam > cutoff) {
        lambda_.push_back(lam);
        a_.push_back(z[i] * z[i] / lam);
        explained += a_.back();
      } else {
        lambda_.push_back(0.0);
        a_.push_back(0.0);
      }
    }
    residual_ = std::max(0.0, data.yty() - explained);
  }

  double operator()(double u, double b_prior) const {
    const double s = std::exp(u);
    if (dense_) return dense_eval(s, u, b_prior);
    double log_det = (n_ - static_cast<double>(lambda_.size())) * u;
    double quad = residual_ / s;
    for (std::size_t k = 0; k < lambda_.size(); ++k) {
      log_det += std::log(s + lambda_[k]);
      quad += a_[k] / (s + lambda_[k]);
    }
    return -0.5 * n_ * kLogTwoPi - 0.5 * log_det - 0.5 * quad;
  }

 private:
  double dense_eval(double s, double u, double b_prior) const {
    MatrixXd cov = xcx_;
    cov.diagonal().array() += s;
    try {
      const CholeskyFactor chol(cov);
      const double quad = data_.y().dot(chol.solve(data_.y()));
      return -0.5 * n_ * kLogTwoPi - 0.5 * chol.log_det() - 0.5 * quad;
    } catch (const SingularityError&) {
      // Only reachable at tiny sigma^2 where the inverse-gamma factor is
      // already below exp(-1000); the integrand is zero there.
      if (b_prior * std::exp(-u) > 1e3) return -std::numeric_limits<double>::infinity();
      throw;
    }
  }

  const Dataset& data_;
  VectorXd c_;
  double n_;
  bool dense_ = false;
  MatrixXd xcx_;
  std::vector<double> lambda_;
  std::vector<double> a_;
  double residual_ = 0.0;
};

}  // namespace

void QuadratureOptions::validate() const {
  if (!std::isfinite(lower) || !std::isfinite(upper) || !(lower < upper)) {
    throw DomainError("quadrature bounds must be finite with lower < upper");
  }
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw DomainError("quadrature rel_tol must lie in (0, 1)");
  if (max_depth == 0) throw DomainError("quadrature max_depth must be positive");
}

double log_prior_gamma(const SpikeSlabHyper& hyper, const GammaBits& gamma) {
  const double log_in = std::log(hyper.rho());
  const double log_out = std::log1p(-hyper.rho());
  double total = 0.0;
  for (auto g : gamma) total += g ? log_in : log_out;
  return total;
}

double log_marginal_collapsed(const Dataset& data, const SpikeSlabHyper& hyper,
                              const GammaBits& gamma) {
  if (data.kind() != ResponseKind::continuous) {
    throw DataError("log_marginal_collapsed: requires a continuous response");
  }
  if (data.p() > kMaxEnumerationP) throw BudgetError("log_marginal_collapsed: p exceeds 20");
  check_gamma(data, gamma);

  const VectorXd c = slab_variances(hyper, gamma);
  MatrixXd inner = data.gram();
  inner.diagonal() += c.cwiseInverse();
  const CholeskyFactor chol(inner);
  const VectorXd fitted = chol.solve(data.xty());
  const double arg = hyper.b() + 0.5 * data.yty() - 0.5 * data.xty().dot(fitted);
  if (!(arg > 0.0)) {
    throw NumericalDomainError("log_marginal_collapsed: residual term " + std::to_string(arg) +
                               " is not positive");
  }
  return log_prior_gamma(hyper, gamma) - 0.5 * c.array().log().sum() - 0.5 * chol.log_det() -
         (hyper.a() + 0.5 * static_cast<double>(data.n())) * std::log(arg);
}

double log_marginal_model2(const Dataset& data, const SpikeSlabHyper& hyper,
                           const GammaBits& gamma, const QuadratureOptions& quad) {
  quad.validate();
  if (data.kind() != ResponseKind::continuous) {
    throw DataError("log_marginal_model2: requires a continuous response");
  }
  if (data.p() > kMaxEnumerationP) throw BudgetError("log_marginal_model2: p exceeds 20");
  check_gamma(data, gamma);

  const GaussianEvidence evidence(data, slab_variances(hyper, gamma), quad.path);
  const double a = hyper.a();
  const double b = hyper.b();
  const double ig_const = a * std::log(b) - std::lgamma(a);
  // Integrand in u, including the Jacobian d sigma^2 = e^u du.
  const auto log_f = [&](double u) {
    return evidence(u, b) + ig_const - a * u - b * std::exp(-u);
  };

  // Coarse scan then golden section for the mode.
  const double step = 0.25;
  double best_u = quad.lower;
  double best = log_f(best_u);
  for (double u = quad.lower + step; u <= quad.upper; u += step) {
    const double v = log_f(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }
  if (!std::isfinite(best)) {
    throw NumericalDomainError("log_marginal_model2: integrand vanishes on the whole range");
  }
  {
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = std::max(quad.lower, best_u - step);
    double hi = std::min(quad.upper, best_u + step);
    for (int it = 0; it < 60; ++it) {
      const double m1 = hi - ratio * (hi - lo);
      const double m2 = lo + ratio * (hi - lo);
      if (log_f(m1) < log_f(m2)) {
        lo = m1;
      } else {
        hi = m2;
      }
    }
    const double u = 0.5 * (lo + hi);
    const double v = log_f(u);
    if (v > best) {
      best = v;
      best_u = u;
    }
  }

  // Pieces of geometrically growing width on both sides of the mode.
  std::vector<double> cuts{best_u};
  for (double width = 0.5; width < 2.0 * (quad.upper - quad.lower); width *= 2.0) {
    if (best_u - width > quad.lower) cuts.push_back(best_u - width);
    if (best_u + width < quad.upper) cuts.push_back(best_u + width);
  }
  cuts.push_back(quad.lower);
  cuts.push_back(quad.upper);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  const auto f = [&](double u) { return std::exp(log_f(u) - best); };
  double total = 0.0;
  double err_total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double err = 0.0;
    const double piece = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, cuts[i], cuts[i + 1], quad.max_depth, 1e-2 * quad.rel_tol, &err);
    total += piece;
    err_total += err;
  }
  const double achieved = err_total / total;
  if (!(total > 0.0) || !(achieved <= quad.rel_tol)) {
    throw AccuracyError("log_marginal_model2: quadrature missed relative error target", achieved);
  }
  return log_prior_gamma(hyper, gamma) + best + std::log(total);
}

ExactPosterior enumerate_posterior(const Dataset& data, const SpikeSlabHyper& hyper,
                                   ModelKind kind, const QuadratureOptions& quad) {
  const std::size_t p = data.p();
  if (p > kMaxEnumerationP) {
    throw BudgetError("enumerate_posterior: p = " + std::to_string(p) + " exceeds 20");
  }
  const std::size_t count = std::size_t{1} << p;

  ExactPosterior out;
  out.models.reserve(count);
  for (std::size_t m = 0; m < count; ++m) {
    GammaBits gamma(p);
    for (std::size_t j = 0; j < p; ++j) gamma[j] = static_cast<std::uint8_t>((m >> j) & 1U);
    const double lw = kind == ModelKind::collapsed ? log_marginal_collapsed(data, hyper, gamma)
                                                   : log_marginal_model2(data, hyper, gamma, quad);
    if (!std::isfinite(lw)) throw NumericalDomainError("enumerate_posterior: non-finite weight");
    out.models.push_back(ModelWeight{std::move(gamma), lw});
  }

  double top = out.models.front().log_weight;
  std::size_t arg_top = 0;
  for (std::size_t m = 1; m < count; ++m) {
    if (out.models[m].log_weight > top) {
      top = out.models[m].log_weight;
      arg_top = m;
    }
  }
  out.probs.resize(static_cast<Eigen::Index>(count));
  double norm = 0.0;
  for (std::size_t m = 0; m < count; ++m) {
    const double e = std::exp(out.models[m].log_weight - top);
    out.probs[static_cast<Eigen::Index>(m)] = e;
    norm += e;
  }
  out.probs /= norm;

  out.inclusion = VectorXd::Zero(static_cast<Eigen::Index>(p));
  for (std::size_t m = 0; m < count; ++m) {
    for (std::size_t j = 0; j < p; ++j) {
      if (out.models[m].gamma[j]) {
        out.inclusion[static_cast<Eigen::Index>(j)] += out.probs[static_cast<Eigen::Index>(m)];
      }
    }
  }
  out.inclusion = out.inclusion.cwiseMin(1.0);
  out.map_model = out.models[arg_top].gamma;
  return out;
}

}  // namespace ssvb
