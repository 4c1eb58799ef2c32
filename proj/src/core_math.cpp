#include "ssvb/core_math.hpp"

#include <cmath>
#include <string>

namespace ssvb {

double expit(double x) {
  if (!std::isfinite(x)) throw DomainError("expit: non-finite argument");
  return expit_branchwise(x);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("logit: probability must lie in (0, 1), got " + std::to_string(p));
  }
  return std::log(p / (1.0 - p));
}

Dataset validate_dataset(MatrixXd x, VectorXd y, ResponseKind kind) {
  if (x.rows() < 1 || x.cols() < 1) {
    throw DimensionError("design matrix must have at least one row and one column");
  }
  if (x.rows() != y.size()) {
    throw DimensionError("design matrix has " + std::to_string(x.rows()) +
                         " rows but response has " + std::to_string(y.size()) + " entries");
  }
  if (!x.allFinite()) throw DataError("design matrix contains NaN or Inf");
  if (!y.allFinite()) throw DataError("response contains NaN or Inf");
  if (kind == ResponseKind::binary) {
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      if (y[i] != 0.0 && y[i] != 1.0) {
        throw DataError("binary response has entry " + std::to_string(y[i]) + " at row " +
                        std::to_string(i));
      }
    }
  }

  Dataset d;
  d.kind_ = kind;
  if (x.cols() <= x.rows()) {
    Eigen::JacobiSVD<MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(x);
    const VectorXd& sv = svd.singularValues();
    const double largest = sv[0];
    const double smallest = sv[sv.size() - 1];
    d.full_rank_ = largest > 0.0 && smallest / largest > kRankTolerance;
  }
  d.gram_ = x.transpose() * x;
  d.xty_ = x.transpose() * y;
  d.yty_ = y.squaredNorm();
  d.x_ = std::move(x);
  d.y_ = std::move(y);
  return d;
}

SpikeSlabHyper SpikeSlabHyper::create(double v0, double v1, double a, double b, double rho) {
  if (!(v0 > 0.0) || !std::isfinite(v0)) throw DomainError("v0 must be positive and finite");
  if (!(v1 > v0) || !std::isfinite(v1)) throw DomainError("v1 must be finite and exceed v0");
  if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("A must be positive");
  if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("B must be positive");
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
  return SpikeSlabHyper(v0, v1, a, b, rho, logit(rho));
}

CholeskyFactor::CholeskyFactor(const MatrixXd& m) : lower_(MatrixXd::Zero(m.rows(), m.cols())) {
  if (m.rows() != m.cols()) throw DimensionError("Cholesky factorization needs a square matrix");
  const Eigen::Index k = m.rows();
  for (Eigen::Index j = 0; j < k; ++j) {
    double pivot = m(j, j) - lower_.row(j).head(j).squaredNorm();
    if (!(pivot > 0.0) || !std::isfinite(pivot)) {
      throw SingularityError(static_cast<std::size_t>(j), pivot);
    }
    const double ljj = std::sqrt(pivot);
    lower_(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < k; ++i) {
      lower_(i, j) = (m(i, j) - lower_.row(i).head(j).dot(lower_.row(j).head(j))) / ljj;
    }
  }
}

MatrixXd CholeskyFactor::solve(const MatrixXd& rhs) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  MatrixXd z = l.solve(rhs);
  return l.transpose().solve(z);
}

VectorXd CholeskyFactor::solve(const VectorXd& rhs) const {
  const auto l = lower_.triangularView<Eigen::Lower>();
  VectorXd z = l.solve(rhs);
  return l.transpose().solve(z);
}

MatrixXd CholeskyFactor::inverse() const {
  MatrixXd inv = solve(MatrixXd::Identity(lower_.rows(), lower_.cols()).eval());
  // Symmetrize away the rounding asymmetry of the two triangular solves.
  return 0.5 * (inv + inv.transpose());
}

double CholeskyFactor::log_det() const {
  return 2.0 * lower_.diagonal().array().log().sum();
}

SolveReport spd_solve(const MatrixXd& m, const MatrixXd& rhs, bool want_inverse) {
  if (m.rows() != m.cols()) throw DimensionError("spd_solve: matrix is not square");
  if (rhs.rows() != m.rows()) throw DimensionError("spd_solve: right-hand side has wrong row count");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    throw DomainError("spd_solve: matrix is not symmetric");
  }

  const CholeskyFactor chol(m);
  SolveReport report;
  report.solution = chol.solve(rhs);
  if (want_inverse) report.inverse = chol.inverse();
  const double rhs_norm = rhs.size() ? rhs.cwiseAbs().maxCoeff() : 0.0;
  const MatrixXd resid = m * report.solution - rhs;
  report.residual_norm = (resid.size() ? resid.cwiseAbs().maxCoeff() : 0.0) / (1.0 + rhs_norm);
  report.factorization_ok = true;
  return report;
}

}  // namespace ssvb
