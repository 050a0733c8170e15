#pragma once

#include <stdexcept>
#include <string>

namespace gravistat {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Caller violated a documented precondition (bad bracket, bad cut-off, ...).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Quadrature could not reach the requested accuracy.
class AccuracyError : public std::runtime_error {
 public:
  AccuracyError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved_error() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// ODE integration failure (step exhaustion or loss of positivity).
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Too many failed points in a parameter sweep.
class BranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace gravistat
