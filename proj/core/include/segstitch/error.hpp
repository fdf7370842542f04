#pragma once

#include <stdexcept>
#include <string>

namespace segstitch {

/// Invalid hyperparameter or argument value (non-positive scale, bad range).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Array shapes that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A factorization or fit that could not be completed in floating point.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace segstitch
