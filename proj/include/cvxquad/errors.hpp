#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cvxquad {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A point, interval or window lies outside where the operation is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// The function could not be evaluated (singularity, non-finite value).
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Sampled data contradicts convexity (or monotonicity, for densities).
class ConvexityError : public Error {
 public:
  using Error::Error;
};

/// The one-sided derivatives at a point differ where a derivative is required.
class NotDifferentiableError : public Error {
 public:
  using Error::Error;
};

/// Operation-specific hypotheses are not met (bad parameters, missing constants).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A divergence term has no defined value under the zero-mass conventions.
class UndefinedDivergenceError : public Error {
 public:
  using Error::Error;
};

/// Syntax error in user-supplied text. `position()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t position)
      : Error(what + " at position " + std::to_string(position)), position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Malformed input file. `line()` is 1-based.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace cvxquad
