#pragma once

#include <stdexcept>
#include <string>

namespace swpass {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, invalid parameters, wrong shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotSymmetric : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotPositiveDefinite : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class GridMismatch : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class NotDecomposition : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Numerical failure during evaluation or simulation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NonFinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoFixedPoint : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class Diverged : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace swpass
