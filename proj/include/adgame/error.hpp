#pragma once

#include <stdexcept>
#include <string>

namespace adgame {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied values that violate a documented precondition
/// (negative effort, mismatched dimensions, malformed scenario, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// A closed-form steady state whose denominator vanishes.
class DegenerateDenominator : public Error {
 public:
  using Error::Error;
};

/// Integrator, quadrature, root finder or Newton iteration failed.
class NumericalFailure : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public NumericalFailure {
 public:
  SingularJacobian(const std::string& what, double condition)
      : NumericalFailure(what), condition_(condition) {}
  double condition_estimate() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Requests the underlying model does not cover (targeted game with n > 2,
/// targeted steady state with n > 3).
class Unsupported : public Error {
 public:
  using Error::Error;
};

}  // namespace adgame
