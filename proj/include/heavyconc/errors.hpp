#pragma once

#include <stdexcept>
#include <string>

namespace heavyconc {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical kernel produced a non-finite value or could not proceed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Root-finding endpoints do not bracket a sign change.
class BracketError : public NumericalError {
 public:
  BracketError(const std::string& what, double f_lo, double f_hi)
      : NumericalError(what), f_lo_(f_lo), f_hi_(f_hi) {}
  double f_lo() const noexcept { return f_lo_; }
  double f_hi() const noexcept { return f_hi_; }

 private:
  double f_lo_;
  double f_hi_;
};

/// Malformed descriptor, config key or constants file entry.
class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace heavyconc
