#pragma once

#include <stdexcept>
#include <string>

namespace iffl {

/// Bad user input: malformed config, invalid parameter values, wrong
/// experiment wiring. Maps to CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure while a computation was otherwise well posed:
/// step-size underflow (stiffness), non-finite state. Maps to CLI exit code 2.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace iffl
