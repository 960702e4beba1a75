#include "dcebr/params.hpp"

#include <cmath>
#include <stdexcept>

#include "dcebr/errors.hpp"

namespace dcebr {

namespace {

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0)
    throw std::invalid_argument(std::string(name) + " must be finite and > 0");
}

}  // namespace

void SystemParams::validate() const {
  require_positive(omega_a, "omega_a");
  require_positive(omega_b, "omega_b");
  require_positive(gamma_a, "gamma_a");
  require_positive(gamma_b, "gamma_b");
  // omega_c = 0 is the decoupled reference model used throughout the tests.
  if (!std::isfinite(omega_c) || omega_c < 0.0)
    throw std::invalid_argument("omega_c must be finite and >= 0");
}

double SystemParams::gamma0() const { return std::sqrt(gamma0_sq()); }

bool SystemParams::weak_coupling() const {
  return omega_c / omega_a < 0.1 && omega_c / omega_b < 0.1;
}

bool SystemParams::resonant(double rel_tol) const {
  return std::abs(omega_b - 2.0 * omega_a) <= rel_tol * omega_b;
}

void DriveParams::validate() const {
  if (!std::isfinite(f0) || f0 < 0.0) throw std::invalid_argument("f0 must be finite and >= 0");
  if (!std::isfinite(omega)) throw std::invalid_argument("drive omega must be finite");
}

Detunings detunings(const SystemParams& p, const DriveParams& d) {
  return {0.5 * d.omega - p.omega_a, d.omega - p.omega_b, d.omega - 2.0 * p.omega_a};
}

std::string to_string(Frame f) { return f == Frame::Lab ? "lab" : "rotating"; }

void FockConfig::validate() const {
  if (n_cav < 1) throw std::invalid_argument("n_cav must be >= 1");
  if (n_mech < 0) throw std::invalid_argument("n_mech must be >= 0");
  if (dimension() > ceiling)
    throw DimensionError("Hilbert dimension " + std::to_string(dimension()) +
                         " exceeds ceiling " + std::to_string(ceiling));
}

}  // namespace dcebr
