#pragma once

#include <stdexcept>
#include <string>

namespace skylut {

// Argument outside the mathematical domain of a formula (|g| = 1, delta at
// the f(delta) pole, cos(theta) outside [-1, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Malformed user input: config files, data tables, CLI values.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Binary LUT / image file that cannot be decoded.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a scattering order grows instead of decaying.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace skylut
