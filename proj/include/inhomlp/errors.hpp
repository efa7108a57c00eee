#pragma once

#include <stdexcept>
#include <string>

namespace inhomlp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Vector length or shape does not match what the operation expects.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Frequency selection contains a duplicate or out-of-range index.
class InvalidSelectionError : public Error {
public:
  using Error::Error;
};

/// A size parameter (grid size, patch size) is out of range.
class InvalidSizeError : public Error {
public:
  using Error::Error;
};

/// Input violates a precondition not covered by a more specific error.
class InvalidInputError : public Error {
public:
  using Error::Error;
};

/// File could not be opened, read, parsed, or written.
class IoError : public Error {
public:
  using Error::Error;
};

/// Root finder was handed an interval without a sign change.
class BracketError : public Error {
public:
  using Error::Error;
};

/// Root finder hit its iteration cap. Carries the best iterate seen.
class NonConvergenceError : public Error {
public:
  NonConvergenceError(const std::string &what, double best)
      : Error(what), best_iterate_(best) {}
  double best_iterate() const noexcept { return best_iterate_; }

private:
  double best_iterate_;
};

/// Normal matrix A^T A + rho F^T F is singular or numerically close to it.
class SingularSystemError : public Error {
public:
  using Error::Error;
};

/// Experiment configuration is malformed or inconsistent.
class ConfigError : public Error {
public:
  using Error::Error;
};

} // namespace inhomlp
