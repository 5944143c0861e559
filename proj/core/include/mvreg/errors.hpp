#ifndef MVREG_ERRORS_HPP
#define MVREG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace mvreg {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated an operation precondition (bad dimensions, out-of-range
/// flag value, non-finite input, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A file or serialized payload is missing, malformed, or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical failure at runtime (non-finite objective, impossible
/// projection, ...).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// The SE(3) logarithm was evaluated at or near the rotation-angle-pi branch
/// cut, where the principal value is ambiguous.
class BranchError : public NumericError {
 public:
  using NumericError::NumericError;
};

/// An image with zero intensity variance was passed where statistics are
/// required.
class DegenerateImageError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace mvreg

#endif  // MVREG_ERRORS_HPP
