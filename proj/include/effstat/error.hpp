#pragma once

#include <stdexcept>
#include <string>

namespace effstat {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// p-hat requested for a sample with zero total trials.
class UndefinedEstimate : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Iterative routine failed to converge. Carries the last bracket.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double lower, double upper)
      : std::runtime_error(what), lower_(lower), upper_(upper) {}

  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

 private:
  double lower_;
  double upper_;
};

/// The quadratic behind a generalized Wilson interval has no usable root pair.
class DegenerateInterval : public DomainError {
 public:
  DegenerateInterval(const std::string& what, double a, double b, double c)
      : DomainError(what), a_(a), b_(b), c_(c) {}

  // Coefficients of a*p^2 + b*p + c = 0.
  double a() const noexcept { return a_; }
  double b() const noexcept { return b_; }
  double c() const noexcept { return c_; }

 private:
  double a_;
  double b_;
  double c_;
};

}  // namespace effstat
