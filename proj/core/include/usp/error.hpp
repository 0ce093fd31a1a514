#pragma once

#include <stdexcept>
#include <string>

namespace usp {

/// Raised when caller-supplied data or configuration violates a documented
/// precondition (bad dimensions, non-monic coefficients, malformed files).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine fails to produce a trustworthy result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace usp
