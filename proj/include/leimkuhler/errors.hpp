#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace leimkuhler {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A result would not be representable as a finite double.
class OverflowError : public Error {
 public:
  using Error::Error;
};

/// An iterative method (series, quadrature, optimizer) did not reach its tolerance.
/// Carries the best value found so far and its error estimate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double partial_value, double error_estimate)
      : Error(what), partial_value_(partial_value), error_estimate_(error_estimate) {}

  double partial_value() const noexcept { return partial_value_; }
  double error_estimate() const noexcept { return error_estimate_; }

 private:
  double partial_value_;
  double error_estimate_;
};

/// Malformed input text. `line()` is 1-based; 0 when not tied to a line.
class InputError : public Error {
 public:
  InputError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A file could not be opened or read.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input that violates a data invariant (negative count, empty file, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A dataset whose total is zero cannot define a Leimkuhler curve.
class DegenerateDatasetError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A computed quantity violated a bound it must satisfy mathematically.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

}  // namespace leimkuhler
