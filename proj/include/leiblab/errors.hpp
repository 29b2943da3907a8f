#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace leiblab {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input that is not a well-formed object (non-square, NaN, bad file).
class MalformedInput : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public MalformedInput {
 public:
  using MalformedInput::MalformedInput;
};

/// Configuration or command-line errors.
class ConfigError : public MalformedInput {
 public:
  using MalformedInput::MalformedInput;
};

/// A well-formed input outside the mathematical domain of an operation
/// (non-Hermitian, non-normal, non-faithful state, F undefined on spectrum).
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularMatrix : public DomainError {
 public:
  SingularMatrix(const std::string& what, double condition)
      : DomainError(what), condition_(condition) {}
  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

/// Two computation routes that must agree did not.
class InternalConsistency : public Error {
 public:
  using Error::Error;
};

/// Iterative solver hit its cap; carries the best value found so far.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double best_value, long iterations)
      : Error(what), best_value_(best_value), iterations_(iterations) {}
  double best_value() const noexcept { return best_value_; }
  long iterations() const noexcept { return iterations_; }

 private:
  double best_value_;
  long iterations_;
};

}  // namespace leiblab
