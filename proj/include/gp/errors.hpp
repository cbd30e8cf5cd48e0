#ifndef GP_ERRORS_HPP
#define GP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gp {

/// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input: malformed files, invalid specs, shape mismatches.
/// The CLI maps these to exit code 2.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// Numerical failure: factorizations, convergence, non-finite values.
/// The CLI maps these to exit code 3.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class EmptyData : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class SingleClassData : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class ZeroVarianceColumn : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// Kernel-spec or CSV syntax error; carries the offending position
/// (0-based byte offset within the text, or a column within a line).
class ParseError : public InvalidInput {
 public:
  ParseError(const std::string& what, std::size_t position)
      : InvalidInput(what + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class DuplicateNoise : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NonPositiveParam : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class PeriodicOnMultiDim : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

class NotSymmetric : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class NotPositiveDefinite : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class NonFinite : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class NoConvergence : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class OptimizerDiverged : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class NonFiniteStart : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

class GradientMismatch : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

}  // namespace gp

#endif  // GP_ERRORS_HPP
