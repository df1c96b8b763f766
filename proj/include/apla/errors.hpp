#pragma once

#include <stdexcept>
#include <string>

namespace apla {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad game file or malformed input data.
struct ParseError : Error {
  using Error::Error;
};

// Action index outside the owning player's range.
struct InvalidProfileError : Error {
  using Error::Error;
};

// Step sizes, h, lambda or other run parameters out of range.
struct ConfigError : Error {
  using Error::Error;
};

// A payoff <= 0 reached the dynamics (positive-utility requirement).
struct PositiveUtilityError : Error {
  using Error::Error;
};

// Transition-matrix estimation could not resolve a row.
struct EstimationError : Error {
  using Error::Error;
};

// Stationary-distribution solver failed to converge.
struct SolverError : Error {
  using Error::Error;
};

}  // namespace apla
