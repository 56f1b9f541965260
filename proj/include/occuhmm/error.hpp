#pragma once

#include <stdexcept>
#include <string>

namespace occuhmm {

// Base of every error raised by the library. The CLI maps InputError to exit
// code 2 and NumericalError to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed arguments, dimension mismatches, invalid parameters.
class InputError : public Error {
 public:
  using Error::Error;
};

// Evaluation outside a density's domain (e.g. Dirichlet at the simplex boundary).
class DomainError : public InputError {
 public:
  using InputError::InputError;
};

// Prediction requested outside the range a smoother was trained on.
class ExtrapolationError : public InputError {
 public:
  using InputError::InputError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Non-finite linear predictor in the transition link.
class OverflowError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// All state densities vanish at some time index.
class SupportError : public NumericalError {
 public:
  SupportError(const std::string& what, long time_index)
      : NumericalError(what), time_index_(time_index) {}
  long time_index() const { return time_index_; }

 private:
  long time_index_;
};

// Singular linear system or non-invertible Hessian.
class SingularityError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace occuhmm
