#pragma once

// Collapsed variational inference over the inclusion indicators only: beta and
// sigma^2 are integrated out under beta | gamma, sigma^2 ~ N(0, sigma^2 C_gamma),
// and each w_j is refreshed in place from the two conditional solves with
// gamma_j forced to 0 and to 1.

#include <cstddef>
#include <functional>

#include "ssvb/core_math.hpp"
#include "ssvb/fit.hpp"

namespace ssvb {

struct CollapsedState {
  VectorXd w;
  double alpha = 0.0;  // logit(rho) - log(n)/2 - log(v1)/2
  std::size_t t = 0;
};

/// logit(rho) - log(n)/2 - log(v1)/2
double collapsed_alpha(const Dataset& data, const SpikeSlabHyper& hyper);

/// (X^T X + (1/v0) I + (1/v1 - 1/v0) W^{(jk)})^{-1} X^T y, where W^{(jk)} is
/// diag(w) with entry j replaced by k (k is 0 or 1).
VectorXd mu_jk(const Dataset& data, const SpikeSlabHyper& hyper, const VectorXd& w,
               std::size_t j, int k);

/// The two log-evidence terms of the coordinate update; t1 already includes alpha.
struct CollapsedTerms {
  double t0;
  double t1;
};

/// T_jk = -(A + n/2) log(B + ||y||^2/2 - y^T X mu^{(jk)} / 2) (+ alpha for k = 1).
/// Throws NumericalDomainError when the log argument falls below 1e-300.
CollapsedTerms collapsed_terms(const Dataset& data, const SpikeSlabHyper& hyper,
                               const VectorXd& w, std::size_t j);

/// New w_j = 1 / (1 + exp(T_j0 - T_j1)).
double collapsed_gamma_update(const Dataset& data, const SpikeSlabHyper& hyper, const VectorXd& w,
                              std::size_t j);

using CollapsedObserver = std::function<void(const CollapsedState&)>;

/// Ascending in-place sweeps over j from w = 1/2 until max |dw| < tol.
/// The report's mu is the solve at the final W; tau is empty.
FitReport fit_collapsed(const Dataset& data, const SpikeSlabHyper& hyper,
                        const FitOptions& opts = {}, const CollapsedObserver& observer = {});

struct QuadFormIdentity {
  double lhs;  // y^T X (Sigma^{(j1)} - Sigma^{(j0)}) X^T y, from two solves
  double rhs;  // (1/v0 - 1/v1) mu_j^{(j0)} mu_j^{(j1)}
};

QuadFormIdentity quad_form_identity(const Dataset& data, const SpikeSlabHyper& hyper,
                                    const VectorXd& w, std::size_t j);

}  // namespace ssvb
