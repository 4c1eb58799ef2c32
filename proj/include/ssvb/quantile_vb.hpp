#pragma once

// Spike-and-slab quantile regression under the asymmetric-Laplace likelihood,
// written as a normal / exponential mixture:
//   y_i | e_i ~ N(x_i^T beta + c1 e_i, c2 sigma e_i),  e_i | sigma ~ Exp(mean sigma).
// The variational factor of each e_i is GIG(1/2, lambda1_i, lambda2), whose
// moments reduce to closed forms because K_{3/2}(z) / K_{1/2}(z) = 1 + 1/z.
//
// Naming: `q_level` is the target quantile; `tau_prec` is E_q[1 / sigma].

#include <cstddef>
#include <functional>

#include "ssvb/core_math.hpp"
#include "ssvb/fit.hpp"
#include "ssvb/linear_vb.hpp"

namespace ssvb {

struct ALDConstants {
  double q_level;
  double c1;  // (1 - 2q) / (q (1 - q))
  double c2;  // 2 / (q (1 - q))
};

ALDConstants ald_constants(double q_level);

struct GigMoments {
  double m_neg1;  // E[e^{-1}]
  double m_pos1;  // E[e]
};

/// First positive and negative moments of GIG(1/2, lambda1, lambda2), density
/// proportional to x^{-1/2} exp(-(lambda1 / x + lambda2 x) / 2).
GigMoments gig_moments(double lambda1, double lambda2);

/// Shape of q(sigma). The derivation gives A + 3n/2; the algorithm listing
/// prints A + n/2. Both are kept for comparison.
enum class QuantileShape { derivation, listing };

struct QuantileOptions {
  QuantileShape shape = QuantileShape::derivation;
};

struct QuantileState {
  VectorXd mu;
  MatrixXd sigma;
  VectorXd w;
  double tau_prec = 1.0;
  VectorXd e1;  // E[e_i^{-1}]
  VectorXd e2;  // E[e_i]
  double a1 = 0.0;
  double b1 = 0.0;
  std::size_t t = 0;
};

/// Sigma = (X^T E X tau/c2 + D)^{-1}, mu = Sigma X^T y0 tau/c2, y0 = E y - c1 1.
GaussianFactor update_beta_quantile(const Dataset& data, const VectorXd& e1, double tau_prec,
                                    const VectorXd& d, const ALDConstants& consts);

/// B1 = B + sum_i [(1 + c1^2/(2 c2)) E2_i - (c1/c2) D1_i + D2_i E1_i / (2 c2)],
/// with D1_i = y_i - x_i^T mu and D2_i = D1_i^2 + x_i^T Sigma x_i.
NoiseUpdate update_sigma_quantile(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                                  const VectorXd& e1, const VectorXd& e2,
                                  const ALDConstants& consts, const SpikeSlabHyper& hyper,
                                  QuantileShape shape = QuantileShape::derivation);

struct LatentMoments {
  VectorXd e1;
  VectorXd e2;
};

inline constexpr double kResidualFloor = 1e-12;

/// lambda1_i = tau D2_i / c2 (D2_i floored at 1e-12), lambda2 = tau (2 c2 + c1^2) / c2.
LatentMoments update_latent_e(const Dataset& data, const VectorXd& mu, const MatrixXd& sigma,
                              double tau_prec, const ALDConstants& consts);

using QuantileObserver = std::function<void(const QuantileState&)>;

/// Sweep order: W, E, D, y0 -> Sigma, mu -> residual moments -> B1, tau ->
/// latent e -> w. Starts from w = 1/2, tau = 1, E1 = E2 = 1 (length n).
/// Convergence as in fit_linear. The report's tau is tau_prec.
FitReport fit_quantile(const Dataset& data, double q_level, const SpikeSlabHyper& hyper,
                       const FitOptions& opts = {}, const QuantileOptions& qopts = {},
                       const QuantileObserver& observer = {});

}  // namespace ssvb
