#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace erd {

// Two families: ValidationError (bad input/config, CLI exit 1) and
// NumericError (the math failed, CLI exit 2).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ArityError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class SizeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : ValidationError(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

class LabelExhaustionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite activations; `layer()` is the index of the offending layer.
class NonFiniteActivation : public NumericError {
 public:
  explicit NonFiniteActivation(std::size_t layer)
      : NumericError("non-finite activation in layer " + std::to_string(layer)), layer_(layer) {}
  std::size_t layer() const noexcept { return layer_; }

 private:
  std::size_t layer_;
};

/// Training loss became non-finite.
class TrainingError : public NumericError {
 public:
  TrainingError(const std::string& what, std::size_t epoch)
      : NumericError("epoch " + std::to_string(epoch) + ": " + what), epoch_(epoch) {}
  std::size_t epoch() const noexcept { return epoch_; }

 private:
  std::size_t epoch_;
};

class DegenerateCentersError : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace erd
