#pragma once

#include <stdexcept>
#include <string>

namespace rfr {

// Malformed, missing or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parameters outside their documented domain.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical stage could not complete (step-size violation, disconnected
// transport supports, non-finite weights).
class ComputeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace rfr
