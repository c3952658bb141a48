#pragma once

#include <stdexcept>
#include <string>

namespace fks {

// Invalid run parameters (grid sizes, budgets, presets). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violation on a call argument (index order, empty interval, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The LP oracle failed to reach an optimal basis.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A Monte Carlo estimator could not produce a trustworthy value (e.g. too much censoring).
class EstimatorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fks
