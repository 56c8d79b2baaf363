#pragma once

#include <stdexcept>
#include <string>

namespace cnmc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: parameters, shapes outside the admissible set, bad indices.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A special function was evaluated at a pole.
class PoleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// An iterative or adaptive numerical procedure failed to reach its tolerance.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace cnmc
