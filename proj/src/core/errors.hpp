#pragma once

#include <stdexcept>
#include <string>

namespace hamshear {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions (torus dimension n) disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Malformed structured-text input (problem, word, polynomial files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Reference integrator could not complete (step-size underflow, step cap).
class IntegrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace hamshear
