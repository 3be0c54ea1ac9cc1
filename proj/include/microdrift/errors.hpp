#pragma once

#include <stdexcept>
#include <string>

namespace microdrift {

/// Malformed input: bad dimensions, schema violations, broken invariants of
/// user-supplied data. Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation that cannot produce a trustworthy number. Maps to exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A divisor |k.w| fell below the hidden-resonance floor.
class HiddenResonanceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// Implicit solver failed even after the allowed number of step halvings.
class NonConvergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// The small-divisor table is too short to resolve the requested quantity.
class QmaxExceededError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// A hypothesis of the instability mechanism fails (no resonance, or a
/// constant resonant average).
class AssumptionError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// File-system failures. Maps to exit code 4.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace microdrift
