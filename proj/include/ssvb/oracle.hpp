#pragma once

// Exact posterior over the inclusion pattern gamma by enumerating all 2^p
// models. Two marginal likelihoods are available:
//   collapsed: beta_j | sigma^2 ~ N(0, sigma^2 c_j), closed form in beta and sigma^2;
//   model2:    beta_j ~ N(0, c_j) unscaled, beta integrated analytically and
//              sigma^2 by one-dimensional quadrature in u = log sigma^2.
// c_j = v0 when gamma_j = 0 and v1 when gamma_j = 1.
//
// The collapsed log weight omits gamma-independent constants, so only
// differences between models are meaningful. The model2 log weight is a
// complete log density.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ssvb/core_math.hpp"

namespace ssvb {

using GammaBits = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxEnumerationP = 20;

/// log pi(gamma) under independent Bernoulli(rho) indicators.
double log_prior_gamma(const SpikeSlabHyper& hyper, const GammaBits& gamma);

double log_marginal_collapsed(const Dataset& data, const SpikeSlabHyper& hyper,
                              const GammaBits& gamma);

/// How N(y; 0, sigma^2 I + X C X^T) is evaluated. `automatic` takes the dense
/// n x n Cholesky when n <= 4p and the p x p spectral form otherwise.
enum class MarginalizationPath { automatic, dense, woodbury };

struct QuadratureOptions {
  double lower = -40.0;  // bounds on u = log sigma^2
  double upper = 40.0;
  double rel_tol = 1e-8;
  unsigned max_depth = 15;
  MarginalizationPath path = MarginalizationPath::automatic;

  /// Throws DomainError unless lower < upper, both finite, rel_tol in (0, 1).
  void validate() const;
};

double log_marginal_model2(const Dataset& data, const SpikeSlabHyper& hyper,
                           const GammaBits& gamma, const QuadratureOptions& quad = {});

enum class ModelKind { collapsed, model2 };

struct ModelWeight {
  GammaBits gamma;
  double log_weight;
};

struct ExactPosterior {
  std::vector<ModelWeight> models;  // model m has gamma_j = (m >> j) & 1
  VectorXd probs;
  VectorXd inclusion;
  GammaBits map_model;
};

/// Throws BudgetError when p > 20.
ExactPosterior enumerate_posterior(const Dataset& data, const SpikeSlabHyper& hyper,
                                   ModelKind kind, const QuadratureOptions& quad = {});

}  // namespace ssvb
