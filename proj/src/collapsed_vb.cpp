#include "ssvb/collapsed_vb.hpp"

#include <cmath>

#include "ssvb/linear_vb.hpp"

namespace ssvb {

namespace {

constexpr double kLogFloor = 1e-300;

void check_coordinate(const Dataset& data, const VectorXd& w, std::size_t j) {
  if (w.size() != static_cast<Eigen::Index>(data.p())) {
    throw DimensionError("inclusion vector length does not match p");
  }
  if (j >= data.p()) throw DimensionError("coordinate index out of range");
}

VectorXd ridge_solve(const Dataset& data, const VectorXd& d) {
  MatrixXd m = data.gram();
  m.diagonal() += d;
  return CholeskyFactor(m).solve(data.xty());
}

double evidence_term(const Dataset& data, const SpikeSlabHyper& hyper, const VectorXd& mu) {
  const double arg = hyper.b() + 0.5 * data.yty() - 0.5 * data.xty().dot(mu);
  if (!(arg >= kLogFloor)) {
    throw NumericalDomainError("collapsed update: log argument " + std::to_string(arg) +
                               " is not positive");
  }
  return -(hyper.a() + 0.5 * static_cast<double>(data.n())) * std::log(arg);
}

}  // namespace

double collapsed_alpha(const Dataset& data, const SpikeSlabHyper& hyper) {
  return hyper.lambda() - 0.5 * std::log(static_cast<double>(data.n())) -
         0.5 * std::log(hyper.v1());
}

VectorXd mu_jk(const Dataset& data, const SpikeSlabHyper& hyper, const VectorXd& w,
               std::size_t j, int k) {
  check_coordinate(data, w, j);
  if (k != 0 && k != 1) throw DomainError("mu_jk: k must be 0 or 1");
  VectorXd wk = w;
  wk[static_cast<Eigen::Index>(j)] = static_cast<double>(k);
  return ridge_solve(data, precision_diag(wk, hyper));
}

CollapsedTerms collapsed_terms(const Dataset& data, const SpikeSlabHyper& hyper,
                               const VectorXd& w, std::size_t j) {
  CollapsedTerms out;
  out.t0 = evidence_term(data, hyper, mu_jk(data, hyper, w, j, 0));
  out.t1 = evidence_term(data, hyper, mu_jk(data, hyper, w, j, 1)) + collapsed_alpha(data, hyper);
  return out;
}

double collapsed_gamma_update(const Dataset& data, const SpikeSlabHyper& hyper, const VectorXd& w,
                              std::size_t j) {
  const CollapsedTerms t = collapsed_terms(data, hyper, w, j);
  return expit(t.t1 - t.t0);
}

FitReport fit_collapsed(const Dataset& data, const SpikeSlabHyper& hyper, const FitOptions& opts,
                        const CollapsedObserver& observer) {
  opts.validate();
  if (data.kind() != ResponseKind::continuous) {
    throw DataError("fit_collapsed: requires a continuous response");
  }
  const std::size_t p = data.p();

  CollapsedState state;
  state.w = VectorXd::Constant(static_cast<Eigen::Index>(p), 0.5);
  state.alpha = collapsed_alpha(data, hyper);

  FitReport report;
  for (std::size_t t = 1; t <= opts.max_iter; ++t) {
    double delta = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      const double updated = collapsed_gamma_update(data, hyper, state.w, j);
      const auto jj = static_cast<Eigen::Index>(j);
      delta = std::max(delta, std::abs(updated - state.w[jj]));
      state.w[jj] = updated;
    }
    state.t = t;
    if (observer) observer(state);
    if (opts.track_trace) report.delta_trace.push_back(delta);
    report.iterations = t;
    if (delta < opts.tol) {
      report.converged = true;
      break;
    }
  }

  report.mu = ridge_solve(data, precision_diag(state.w, hyper));
  report.w = state.w;
  report.selected = select_by_threshold(state.w);
  return report;
}

QuadFormIdentity quad_form_identity(const Dataset& data, const SpikeSlabHyper& hyper,
                                    const VectorXd& w, std::size_t j) {
  const VectorXd mu0 = mu_jk(data, hyper, w, j, 0);
  const VectorXd mu1 = mu_jk(data, hyper, w, j, 1);
  const auto jj = static_cast<Eigen::Index>(j);
  QuadFormIdentity out;
  out.lhs = data.xty().dot(mu1) - data.xty().dot(mu0);
  out.rhs = (1.0 / hyper.v0() - 1.0 / hyper.v1()) * mu0[jj] * mu1[jj];
  return out;
}

}  // namespace ssvb
