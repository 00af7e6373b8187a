#pragma once

#include <stdexcept>
#include <string>

namespace aoi {

// Bad construction parameter or empty input.
class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of a function (e.g. PGF at z > 1).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Traffic intensity rho >= 1: no stationary regime exists.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A raw moment that would exceed the representable budget (1e300).
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// Departure sample carries no information about lambda (every Y equals 1).
class DegenerateEstimate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace aoi
