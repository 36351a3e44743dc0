#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace annulus {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The evaluation point sits on a singular locus (wire, plate edge circle,
/// logarithmic divergence of an elliptic integral).
class SingularityError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// The gradient was requested on a plate, where the normal derivative jumps.
class FieldDiscontinuityError : public DomainError {
 public:
  FieldDiscontinuityError(const std::string& what, double normal_jump)
      : DomainError(what), normal_jump_(normal_jump) {}

  /// (dU/dn)+ - (dU/dn)- across the plate, equal to 4 pi G sigma.
  double normal_jump() const noexcept { return normal_jump_; }

 private:
  double normal_jump_;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A bracket handed to a bisection search does not enclose a change.
class BracketError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// An iterative method exhausted its budget before meeting its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// The ODE integrator could not continue (step size underflow, RHS failure).
class IntegrationFailure : public ConvergenceError {
 public:
  IntegrationFailure(const std::string& what, double last_time,
                     std::vector<double> last_state)
      : ConvergenceError(what),
        last_time_(last_time),
        last_state_(std::move(last_state)) {}

  double last_time() const noexcept { return last_time_; }
  const std::vector<double>& last_state() const noexcept { return last_state_; }

 private:
  double last_time_;
  std::vector<double> last_state_;
};

}  // namespace annulus
