#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ssvb {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Shapes of X, y or parameter vectors disagree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Input data rejected by validation (non-finite entries, bad binary labels).
class DataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Cholesky factorization hit a non-positive pivot.
class SingularityError : public std::runtime_error {
 public:
  SingularityError(std::size_t pivot, double value)
      : std::runtime_error("matrix is not positive definite: pivot " +
                           std::to_string(pivot) + " has value " +
                           std::to_string(value)),
        pivot_(pivot) {}

  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

// A quantity that must be strictly positive before a log or division was not.
class NumericalDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A documented precondition (full rank, p <= n, ...) does not hold.
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Exhaustive enumeration requested beyond the supported size.
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Numerical integration missed its error target.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}

  double achieved_bound() const noexcept { return achieved_; }

 private:
  double achieved_;
};

}  // namespace ssvb
