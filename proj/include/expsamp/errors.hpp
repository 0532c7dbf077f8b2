#pragma once

#include <stdexcept>

namespace expsamp {

/// Base type for all errors thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-supplied argument or configuration value was rejected.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The sampling index set {ceil(m log a), ..., floor(m log b) - 1} is empty.
class DegenerateInterval : public InvalidParameter {
 public:
  using InvalidParameter::InvalidParameter;
};

/// A computation produced a non-finite value or failed to converge.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// The kernel misses an admissibility requirement: non-positive infimum on
/// [1, e], or a vanishing max-product denominator at an evaluation point.
class KernelInadmissible : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// A requested theoretical bound needs a sup-moment that diverges for the
/// given kernel.
class BoundInapplicable : public Error {
 public:
  using Error::Error;
};

}  // namespace expsamp
