#pragma once

// Spike-and-slab logistic regression with Polya-Gamma augmentation. Given
// v_i ~ PG(1, c_i) the likelihood is Gaussian in beta, so q(beta) stays normal
// and only E[v_i] = tanh(c_i / 2) / (2 c_i) is needed.

#include <cstddef>
#include <functional>

#include "ssvb/core_math.hpp"
#include "ssvb/fit.hpp"
#include "ssvb/linear_vb.hpp"

namespace ssvb {

/// Mean of PG(b, c): b tanh(c/2) / (2c), with the limit b/4 at c = 0.
double pg_mean(double b, double c);

/// How the tilt c_i is formed from the second moment m_i = E[(x_i^T beta)^2].
/// `root` uses c_i = sqrt(m_i), which matches the exp(-c^2 v / 2) tilt of the
/// PG density; `literal` uses c_i = m_i.
enum class TiltRule { root, literal };

struct LogisticOptions {
  TiltRule tilt = TiltRule::root;
};

struct LogisticState {
  VectorXd mu;
  MatrixXd sigma;
  VectorXd w;
  VectorXd v_mean;
  VectorXd c;
  std::size_t t = 0;
};

/// Sigma = (X^T diag(v) X + D)^{-1}, mu = Sigma X^T (y - 1/2).
GaussianFactor update_beta_logistic(const Dataset& data, const VectorXd& v_mean,
                                    const VectorXd& d);

struct PolyaGammaUpdate {
  VectorXd second_moment;  // x_i^T Sigma x_i + (x_i^T mu)^2
  VectorXd c;
  VectorXd v_mean;
};

PolyaGammaUpdate update_v(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                          TiltRule tilt = TiltRule::root);

using LogisticObserver = std::function<void(const LogisticState&)>;

/// Sweep order W, E, D -> Sigma, mu -> c, v -> w from w = 1/2, v = 1.
/// Stops when max(|dmu|_inf, |dw|_inf) < tol. The report's tau is empty.
FitReport fit_logistic(const Dataset& data, const SpikeSlabHyper& hyper,
                       const FitOptions& opts = {}, const LogisticOptions& lopts = {},
                       const LogisticObserver& observer = {});

}  // namespace ssvb
