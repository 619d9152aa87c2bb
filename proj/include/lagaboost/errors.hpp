#pragma once

#include <stdexcept>
#include <string>

namespace lagaboost {

/// Raised when a matrix that must be positive definite cannot be factorized,
/// even after jitter escalation.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative numerical procedure produces non-finite values
/// or fails in a way the caller cannot recover from.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lagaboost
