#pragma once

#include <stdexcept>
#include <string>

namespace thh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on user-supplied data was violated (bad interval, weights
/// that do not sum to one, pivot outside (a,b), malformed spec string, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A function handed to a convex-only routine is provably not convex.
class NotConvexError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// A kinked function reached a routine that needs a second derivative.
class KinkError : public ValidationError {
public:
  using ValidationError::ValidationError;
};

/// Quadrature or another iterative numeric routine failed to converge.
/// Carries the best value reached so callers may still report it.
class NumericFailure : public Error {
public:
  NumericFailure(const std::string& what, double best_value = 0.0, double best_error = 0.0)
      : Error(what), best_value_(best_value), best_error_(best_error) {}

  double best_value() const noexcept { return best_value_; }
  double best_error() const noexcept { return best_error_; }

private:
  double best_value_;
  double best_error_;
};

} // namespace thh
