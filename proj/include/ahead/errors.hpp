#pragma once

#include <stdexcept>
#include <string>

namespace ahead {

/// Bad user input: arguments, configuration values, grids.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent data on disk or in memory.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values or divergence during numerical work.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ahead
