#pragma once

#include <stdexcept>
#include <string>

namespace qds {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an argument outside the operation's domain.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A computation failed to reach its accuracy target (overflow, step underflow,
/// quadrature nonconvergence).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A linear system is too close to singular to solve reliably.
class ConditioningError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A precondition on the kind of object was violated (non-Hermitian input to a
/// Hermitian routine, exact-mode model where absorbing is required).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of an analytic bound does not hold for the given data.
class HypothesisViolation : public Error {
 public:
  using Error::Error;
};

/// Model parameters violate a named admissibility condition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

}  // namespace qds
