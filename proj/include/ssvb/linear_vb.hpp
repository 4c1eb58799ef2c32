#pragma once

// Mean-field coordinate ascent for the spike-and-slab linear model
//   y | beta, sigma^2 ~ N(X beta, sigma^2 I),  beta_j | gamma_j ~ N(0, v0 or v1),
//   sigma^2 ~ IG(A, B),  gamma_j ~ Bernoulli(rho),
// with q(beta) q(sigma^2) prod_j q(gamma_j). Also hosts the diagnostics that
// bound the iterates (tau bounds, per-coordinate sparsity constants).

#include <cstddef>
#include <functional>

#include "ssvb/core_math.hpp"
#include "ssvb/fit.hpp"

namespace ssvb {

/// Full variational state after one sweep.
struct LinearState {
  VectorXd mu;
  MatrixXd sigma;
  VectorXd w;
  double tau = 1.0;  // E_q[1 / sigma^2]
  double a1 = 0.0;
  double b1 = 0.0;
  std::size_t t = 0;
};

struct GaussianFactor {
  VectorXd mu;
  MatrixXd sigma;
};

struct NoiseUpdate {
  double a1;
  double b1;
  double tau;
};

/// D = (1/v0) I + (1/v1 - 1/v0) diag(w), returned as its diagonal.
VectorXd precision_diag(const VectorXd& w, const SpikeSlabHyper& hyper);

/// Sigma = (tau X^T X + D)^{-1}, mu = tau Sigma X^T y.
GaussianFactor update_beta(const Dataset& data, double tau, const VectorXd& d);

/// A1 = A + n/2, B1 = B + (||y - X mu||^2 + tr(X^T X Sigma)) / 2, tau = A1 / B1.
NoiseUpdate update_sigma(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                         const SpikeSlabHyper& hyper);

/// w_j = expit(lambda + log(v0/v1)/2 + (mu_j^2 + Sigma_jj)(1/v0 - 1/v1)/2).
/// Shared verbatim by the quantile and logistic fitters.
VectorXd update_gamma(const VectorXd& mu, const VectorXd& sigma_diag, const SpikeSlabHyper& hyper);

using LinearObserver = std::function<void(const LinearState&)>;

/// Runs the sweep W, D -> Sigma, mu -> B1, tau -> w from w = 1/2, tau = 1 until
/// max(|dmu|_inf, |dw|_inf, |dtau|/tau) < tol. The observer, when set, sees the
/// state after every sweep.
FitReport fit_linear(const Dataset& data, const SpikeSlabHyper& hyper, const FitOptions& opts = {},
                     const LinearObserver& observer = {});

struct TauBounds {
  double tau_l;
  double tau_r;
};

/// Lower and upper bounds on every tau iterate of fit_linear started at tau0.
/// Requires p <= n and full column rank (PreconditionError otherwise).
TauBounds tau_bounds(const Dataset& data, const SpikeSlabHyper& hyper, double tau0 = 1.0);

/// Per-coordinate constants behind the sparsity argument.
struct SparsityDiagnostics {
  double s_j;  // tau_L times the Schur complement of X_j given X_{-j}
  double h_j;  // (1/v0 + s_j)^{-1}
  double c0;   // Cauchy-Schwarz bound on the cross term
  double c_j;  // tau_R (|X_j^T y| + c0); |mu_j| <= c_j Sigma_jj
  double m_j;  // lambda + (h_j^2 c_j^2 + h_j) / (2 v0); free of v1
  /// Upper bound on Sigma_jj at the next sweep given the previous w_j:
  /// (1/v0 + (1/v1 - 1/v0) w_prev_j + s_j)^{-1}.
  double sigma_bound;
};

/// Requires p >= 2, p <= n and full column rank.
SparsityDiagnostics sparsity_diagnostics(const Dataset& data, const SpikeSlabHyper& hyper,
                                         const TauBounds& bounds, std::size_t j, double w_prev_j);

}  // namespace ssvb
