#pragma once

#include <stdexcept>
#include <string>

namespace pdform {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or inconsistent input: wrong dimensions, bad JSON, odd degree
// where an even one is required, and so on.
class InputError : public Error {
 public:
  using Error::Error;
};

// The input was well formed but the computation cannot proceed (singular
// matrix, a matrix that is not positive definite, a form that takes negative
// values).
class ComputationError : public Error {
 public:
  using Error::Error;
};

class SingularMatrixError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

class NotPositiveDefiniteError : public ComputationError {
 public:
  using ComputationError::ComputationError;
};

// Thrown by the volume estimators when a sample of g on the sphere is
// negative: the sublevel set then contains a cone and its volume is infinite.
class NegativeFormError : public ComputationError {
 public:
  NegativeFormError()
      : ComputationError("form takes negative values; volume infinite") {}
};

}  // namespace pdform
