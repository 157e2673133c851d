#pragma once

#include <stdexcept>
#include <string>

namespace fks {

// Invalid configuration or input data. Maps to CLI exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure while a run is in progress. Maps to CLI exit code 2.
class RunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every particle carries a log-potential of -inf.
class DegenerateWeightsError : public RunError {
 public:
  using RunError::RunError;
};

}  // namespace fks
