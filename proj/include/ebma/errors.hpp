#pragma once

#include <stdexcept>

namespace ebma {

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidInputError : Error {
  using Error::Error;
};

/// Rank-deficient design matrix. There is deliberately no pseudo-inverse
/// fallback anywhere in the library.
struct SingularDesignError : Error {
  using Error::Error;
};

/// Exhaustive model enumeration is capped at p = 20 predictors.
struct CapacityError : Error {
  using Error::Error;
};

/// A formula left its numerically valid region (non-positive
/// marginal-likelihood bracket, unbounded marginal, quadrature failure).
struct NumericError : Error {
  using Error::Error;
};

struct DegenerateEnsembleError : Error {
  using Error::Error;
};

/// Malformed input file; message carries the line number.
struct ParseError : Error {
  using Error::Error;
};

/// Invalid run configuration; message lists the offending fields.
struct ConfigError : Error {
  using Error::Error;
};

}  // namespace ebma
