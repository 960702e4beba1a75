#pragma once

#include <stdexcept>
#include <string>

namespace dcebr {

/// Truncated Hilbert space larger than the configured ceiling.
class DimensionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Integration or solver failure: step-size underflow, invariant violation,
/// non-convergence, degenerate steady state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment/parameter configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dcebr
