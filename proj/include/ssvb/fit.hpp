#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <vector>

namespace ssvb {

struct FitOptions {
  double tol = 1e-6;
  std::size_t max_iter = 500;
  bool track_trace = true;

  /// Throws DomainError unless tol > 0 and max_iter >= 1.
  void validate() const;
};

/// Common output of every fitter. `tau` is empty for models without a noise
/// precision (collapsed, logistic).
struct FitReport {
  Eigen::VectorXd mu;
  Eigen::VectorXd w;
  std::optional<double> tau;
  std::vector<std::size_t> selected;  // zero-based, ascending
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> delta_trace;
};

inline constexpr double kSelectionThreshold = 0.5;

/// {j : w_j > 0.5}, strict.
std::vector<std::size_t> select_by_threshold(const Eigen::VectorXd& w);

}  // namespace ssvb
