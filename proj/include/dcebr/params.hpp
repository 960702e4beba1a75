#pragma once

#include <cstddef>
#include <string>

namespace dcebr {

/// Rates of the cavity + mirror model, all in one user-chosen angular
/// frequency unit (hbar = 1).
struct SystemParams {
  double omega_a = 0.0;  ///< cavity mode frequency
  double omega_b = 0.0;  ///< mechanical frequency
  double omega_c = 0.0;  ///< optomechanical pair-creation coupling
  double gamma_a = 0.0;  ///< cavity loss rate
  double gamma_b = 0.0;  ///< mechanical loss rate

  /// Throws std::invalid_argument unless every rate is finite, the loss rates
  /// and bare frequencies are strictly positive and omega_c >= 0.
  void validate() const;

  /// gamma_0^2 = gamma_a gamma_b / 2
  double gamma0_sq() const { return 0.5 * gamma_a * gamma_b; }
  double gamma0() const;
  /// gamma_1 = gamma_a + gamma_b / 2
  double gamma1() const { return gamma_a + 0.5 * gamma_b; }

  /// omega_c small against both bare frequencies. Diagnostic only.
  bool weak_coupling() const;

  /// |omega_b - 2 omega_a| below 1e-9 relative to omega_b.
  bool resonant(double rel_tol = 1e-9) const;
};

/// Monochromatic force F(t) = f0 e^{-i omega t} on the mirror. f0 is real
/// (drive phase zero).
struct DriveParams {
  double f0 = 0.0;
  double omega = 0.0;

  void validate() const;
};

/// Detunings of the frame rotating at the drive frequency.
struct Detunings {
  double a = 0.0;  ///< omega/2 - omega_a
  double b = 0.0;  ///< omega - omega_b
  double q = 0.0;  ///< omega - 2 omega_a
};

Detunings detunings(const SystemParams& p, const DriveParams& d);

enum class Frame { Lab, RotatingAtDrive };

std::string to_string(Frame f);

inline constexpr std::size_t kDefaultDimensionCeiling = 4096;

/// Fock-space truncation of the cavity (index 0) and mechanical (index 1)
/// modes.
struct FockConfig {
  int n_cav = 1;
  int n_mech = 1;
  std::size_t ceiling = kDefaultDimensionCeiling;

  std::size_t cav_dim() const { return static_cast<std::size_t>(n_cav) + 1; }
  std::size_t mech_dim() const { return static_cast<std::size_t>(n_mech) + 1; }
  std::size_t dimension() const { return cav_dim() * mech_dim(); }

  /// Tensor-product index of |n_a> (x) |n_b>.
  std::size_t index(int na, int nb) const {
    return static_cast<std::size_t>(na) * mech_dim() + static_cast<std::size_t>(nb);
  }

  /// Throws std::invalid_argument for negative cutoffs and DimensionError
  /// when the ceiling is exceeded.
  void validate() const;

  bool operator==(const FockConfig&) const = default;
};

}  // namespace dcebr
