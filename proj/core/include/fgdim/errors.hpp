#pragma once

#include <stdexcept>
#include <string>

namespace fgdim {

/// Argument outside the mathematical domain of an operation (H not in (0,1),
/// negative time, non-zero-sum coefficients where zero sum is required, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A caller broke a structural precondition (bad index, removed entry used).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// An internal consistency check failed. Indicates a bug, not bad input.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Enumeration or allocation request above a documented ceiling.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense linear algebra failed (matrix not positive definite, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature did not reach its tolerance within budget.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double achieved_error)
      : std::runtime_error(what), achieved_error_(achieved_error) {}

  double achieved_error() const noexcept { return achieved_error_; }

 private:
  double achieved_error_;
};

/// Fit input does not carry enough signal above noise.
class InsufficientSignalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fgdim
