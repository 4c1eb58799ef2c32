#include "test_support.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace ssvb::testing {

Eigen::MatrixXd Gen::normal_matrix(Eigen::Index rows, Eigen::Index cols) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal();
  return m;
}

Eigen::VectorXd Gen::normal_vector(Eigen::Index size) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = normal();
  return v;
}

Eigen::VectorXd Gen::uniform_vector(Eigen::Index size, double lo, double hi) {
  Eigen::VectorXd v(size);
  for (Eigen::Index i = 0; i < size; ++i) v[i] = uniform(lo, hi);
  return v;
}

Dataset linear_data(Gen& g, std::size_t n, const Eigen::VectorXd& beta, double sigma) {
  Eigen::MatrixXd x = g.normal_matrix(static_cast<Eigen::Index>(n), beta.size());
  Eigen::VectorXd y = x * beta + sigma * g.normal_vector(static_cast<Eigen::Index>(n));
  return validate_dataset(std::move(x), std::move(y), ResponseKind::continuous);
}

Eigen::MatrixXd random_spd(Gen& g, Eigen::Index p) {
  const Eigen::MatrixXd a = g.normal_matrix(p, p);
  return a.transpose() * a + Eigen::MatrixXd::Identity(p, p);
}

double brute_trace_product(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) s += a(i, j) * b(j, i);
  return s;
}

double gig_moment_quadrature(double lambda1, double lambda2, double order) {
  // Scale out the mode so the integrands are O(1) there.
  const double mode = (std::sqrt(0.25 + lambda1 * lambda2) - 0.5) / lambda2;
  const double log_peak = -0.5 * std::log(mode) - 0.5 * (lambda1 / mode + lambda2 * mode);
  const auto kernel = [&](double x, double power) {
    if (x <= 0.0) return 0.0;
    const double e = (power - 0.5) * std::log(x) - 0.5 * (lambda1 / x + lambda2 * x) - log_peak;
    return std::exp(e);
  };
  boost::math::quadrature::exp_sinh<double> integrator;
  const double tol = std::sqrt(std::numeric_limits<double>::epsilon()) * 1e-4;
  const double num = integrator.integrate([&](double x) { return kernel(x, order); }, tol);
  const double den = integrator.integrate([&](double x) { return kernel(x, 0.0); }, tol);
  return num / den;
}

MonteCarloEstimate mc_second_moment(const Eigen::VectorXd& x, const Eigen::VectorXd& mu,
                                    const Eigen::MatrixXd& sigma, std::size_t samples, Gen& g) {
  const Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  const Eigen::MatrixXd l = llt.matrixL();
  const Eigen::VectorXd lx = l.transpose() * x;  // x^T beta = x^T mu + (L^T x)^T z
  const double center = x.dot(mu);
  double sum = 0.0;
  double sum_sq = 0.0;
  Eigen::VectorXd z(mu.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (Eigen::Index k = 0; k < z.size(); ++k) z[k] = g.normal();
    const double v = center + lx.dot(z);
    const double v2 = v * v;
    sum += v2;
    sum_sq += v2 * v2;
  }
  const double m = sum / static_cast<double>(samples);
  const double var = sum_sq / static_cast<double>(samples) - m * m;
  return {m, std::sqrt(var / static_cast<double>(samples))};
}

double single_predictor_evidence_trapezoid(const Eigen::VectorXd& y, const Eigen::VectorXd& x,
                                           double c, double a, double b, std::size_t points,
                                           double lo, double hi) {
  const double n = static_cast<double>(y.size());
  const double xx = x.squaredNorm();
  const double xy = x.dot(y);
  const double yy = y.squaredNorm();
  const double log_two_pi = std::log(2.0 * M_PI);
  const auto log_f = [&](double u) {
    const double s = std::exp(u);
    const double denom = s + c * xx;
    // det(sI + c x x^T) = s^{n-1}(s + c|x|^2); inverse by Sherman-Morrison.
    const double log_det = (n - 1.0) * u + std::log(denom);
    const double quad = (yy - c * xy * xy / denom) / s;
    const double log_normal = -0.5 * n * log_two_pi - 0.5 * log_det - 0.5 * quad;
    const double log_ig = a * std::log(b) - std::lgamma(a) - (a + 1.0) * u - b / s;
    return log_normal + log_ig + u;
  };
  const double h = (hi - lo) / static_cast<double>(points - 1);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < points; ++k) peak = std::max(peak, log_f(lo + h * static_cast<double>(k)));
  double sum = 0.0;
  for (std::size_t k = 0; k < points; ++k) {
    const double weight = (k == 0 || k + 1 == points) ? 0.5 : 1.0;
    sum += weight * std::exp(log_f(lo + h * static_cast<double>(k)) - peak);
  }
  return peak + std::log(sum * h);
}

std::pair<double, double> quantile_band(std::vector<double> sample, double q, double z) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  const double half = z * std::sqrt(n * q * (1.0 - q));
  const auto clamp_rank = [&](double r) {
    const double k = std::clamp(r, 1.0, n);
    return sample[static_cast<std::size_t>(k) - 1];
  };
  return {clamp_rank(std::floor(n * q - half)), clamp_rank(std::ceil(n * q + half))};
}

double empirical_quantile(std::vector<double> sample, double q) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  const double rank = std::clamp(std::ceil(n * q), 1.0, n);
  return sample[static_cast<std::size_t>(rank) - 1];
}

}  // namespace ssvb::testing
