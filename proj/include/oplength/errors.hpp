#pragma once

#include <stdexcept>
#include <string>

namespace oplength {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dimensions of the operands do not chain or do not match.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Input contains NaN or infinite entries.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Not enough room in the base algebra for the requested partial isometries.
class CapacityError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

}  // namespace oplength
