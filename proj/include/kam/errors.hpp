#pragma once

#include <stdexcept>
#include <string>

namespace kam {

// Bad parameters or shapes supplied by the caller.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// File system and codec failures.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Degenerate numerics (vanishing window normalization, silent reference).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace kam
