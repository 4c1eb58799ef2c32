#pragma once

// Shared numeric primitives for the spike-and-slab fitters: logistic
// transforms, a Cholesky-based SPD solver, hyperparameters and the validated
// Dataset every fitter consumes.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <optional>

#include "ssvb/errors.hpp"

namespace ssvb {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Branchwise logistic function for any real type with an ADL-visible exp.
/// Lets the tail behaviour be checked in arithmetic finer than double.
template <class Real>
Real expit_branchwise(const Real& x) {
  using std::exp;
  if (x >= 0) return Real(1) / (Real(1) + exp(-x));
  const Real e = exp(x);
  return e / (Real(1) + e);
}

/// Numerically stable logistic function exp(x) / (1 + exp(x)).
/// Throws DomainError for non-finite input.
double expit(double x);

/// Inverse of expit; p must lie strictly inside (0, 1).
double logit(double p);

enum class ResponseKind { continuous, binary };

/// Design matrix plus response, validated once and then immutable.
/// Gram quantities are cached because every fitter needs them.
class Dataset {
 public:
  const MatrixXd& x() const noexcept { return x_; }
  const VectorXd& y() const noexcept { return y_; }
  std::size_t n() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  ResponseKind kind() const noexcept { return kind_; }
  /// Smallest-to-largest singular value ratio above 1e-10 (and p <= n).
  bool full_rank() const noexcept { return full_rank_; }

  const MatrixXd& gram() const noexcept { return gram_; }  // X^T X
  const VectorXd& xty() const noexcept { return xty_; }    // X^T y
  double yty() const noexcept { return yty_; }             // ||y||^2

 private:
  friend Dataset validate_dataset(MatrixXd x, VectorXd y, ResponseKind kind);
  Dataset() = default;

  MatrixXd x_;
  VectorXd y_;
  ResponseKind kind_ = ResponseKind::continuous;
  bool full_rank_ = false;
  MatrixXd gram_;
  VectorXd xty_;
  double yty_ = 0.0;
};

inline constexpr double kRankTolerance = 1e-10;

/// Checks shapes, finiteness and binary labels, computes the rank flag.
Dataset validate_dataset(MatrixXd x, VectorXd y, ResponseKind kind);

/// Spike-and-slab prior hyperparameters: beta_j ~ N(0, v0) or N(0, v1),
/// sigma^2 ~ IG(A, B), gamma_j ~ Bernoulli(rho).
class SpikeSlabHyper {
 public:
  /// Defaults A = B = 0.5, rho = 0.5, v0 = 0.01, v1 = 100.
  SpikeSlabHyper() : SpikeSlabHyper(create(0.01, 100.0, 0.5, 0.5, 0.5)) {}

  /// Throws DomainError unless v1 > v0 > 0, A > 0, B > 0, rho in (0, 1).
  static SpikeSlabHyper create(double v0, double v1, double a, double b, double rho);

  double v0() const noexcept { return v0_; }
  double v1() const noexcept { return v1_; }
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double rho() const noexcept { return rho_; }
  /// logit(rho), the prior log-odds of inclusion.
  double lambda() const noexcept { return lambda_; }

  SpikeSlabHyper with_v0(double v0) const { return create(v0, v1_, a_, b_, rho_); }
  SpikeSlabHyper with_v1(double v1) const { return create(v0_, v1, a_, b_, rho_); }
  SpikeSlabHyper with_slabs(double v0, double v1) const {
    return create(v0, v1, a_, b_, rho_);
  }

 private:
  SpikeSlabHyper(double v0, double v1, double a, double b, double rho, double lambda)
      : v0_(v0), v1_(v1), a_(a), b_(b), rho_(rho), lambda_(lambda) {}

  double v0_, v1_, a_, b_, rho_, lambda_;
};

/// Lower Cholesky factor of an SPD matrix. Construction throws
/// SingularityError naming the first non-positive pivot.
class CholeskyFactor {
 public:
  explicit CholeskyFactor(const MatrixXd& m);

  MatrixXd solve(const MatrixXd& rhs) const;
  VectorXd solve(const VectorXd& rhs) const;
  MatrixXd inverse() const;
  /// log det(M) = 2 * sum log L_jj.
  double log_det() const;
  const MatrixXd& lower() const noexcept { return lower_; }

 private:
  MatrixXd lower_;
};

struct SolveReport {
  MatrixXd solution;
  std::optional<MatrixXd> inverse;
  /// ||M x - rhs||_inf / (1 + ||rhs||_inf)
  double residual_norm = 0.0;
  bool factorization_ok = false;
};

/// Solves M X = rhs for symmetric positive-definite M. Symmetry is checked to
/// 1e-10 relative (DomainError); a failed factorization throws SingularityError.
SolveReport spd_solve(const MatrixXd& m, const MatrixXd& rhs, bool want_inverse = false);

}  // namespace ssvb
