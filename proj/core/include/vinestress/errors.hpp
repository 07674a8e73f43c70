#pragma once

#include <stdexcept>
#include <string>

namespace vinestress {

/// Malformed or out-of-contract input (bad shapes, bad files, bad flags).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is well-formed but carries no information, e.g. a constant series.
class DegenerateInputError : public InputError {
 public:
  using InputError::InputError;
};

/// A value lies outside the domain a family or map can represent.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An iterative routine failed to converge within its budget.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vinestress
