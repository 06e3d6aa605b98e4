#pragma once

#include <stdexcept>
#include <string>

namespace diffnet {

/// Operand shapes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A decomposition failed or produced non-finite values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The hypotheses an analysis relies on are not met by its input.
class PremiseViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed or inconsistent user input (problem files, weights, flags).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace diffnet
