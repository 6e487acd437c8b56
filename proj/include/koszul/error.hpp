#pragma once

#include <stdexcept>
#include <string>

namespace koszul {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (shapes, labels, broken axioms).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A documented refusal: the computation is outside the supported regime.
class Unsupported : public Error {
 public:
  using Error::Error;
};

/// A hypothesis of the requested criterion does not hold (e.g. flatness).
class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

/// An enumeration or search exceeded its configured operation budget.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

}  // namespace koszul
