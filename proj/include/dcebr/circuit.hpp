#pragma once

#include <string>
#include <vector>

#include "dcebr/params.hpp"

namespace dcebr::circuit {

inline constexpr double kFluxQuantum = 2.067833848e-15;  ///< Wb
inline constexpr double kHbar = 1.054571817e-34;         ///< J s

/// SQUID-terminated waveguide coupled to an LC resonator. SI units; flux
/// bias in units of the flux quantum.
struct CircuitParams {
  double omega_a = 0.0;       ///< cavity fundamental, rad/s
  double omega_lc = 0.0;      ///< LC resonator, rad/s
  double i_crit = 0.0;        ///< single-junction critical current, A
  double c_j = 0.0;           ///< total SQUID capacitance, F
  double z_wg = 0.0;          ///< waveguide impedance, Ohm
  double ell_wg = 0.0;        ///< inductance per unit length, H/m
  double c_wg = 0.0;          ///< capacitance per unit length, F/m
  double l_lc = 0.0;          ///< LC inductance, H
  double c_lc = 0.0;          ///< LC capacitance, F
  double mutual_ratio = 0.0;  ///< chi = M / L_LC
  double phi_bias = 0.0;      ///< static flux bias / Phi_0
  double cavity_length = 0.0; ///< x^o in m; 0 selects one wavelength 2 pi v / omega_a
  double l_squid = 0.0;       ///< SQUID loop self-inductance, H (0 = ideal)
  double guard_band = 0.02;   ///< minimum distance of |phi_bias| from 1/2

  /// Throws std::invalid_argument on non-physical values, chi outside (0, 1),
  /// |phi_bias| >= 1/2, or z_wg != sqrt(ell_wg / c_wg) (1e-9 rel). The guard
  /// band is enforced by the coupling and mass computations (domain_error).
  void validate() const;

  /// v = 1 / sqrt(ell_wg c_wg)
  double wave_velocity() const;
  /// cavity_length, or one wavelength when unset.
  double reference_length() const;

  /// Fills ell_wg = Z / v and c_wg = 1 / (Z v).
  static CircuitParams with_waveguide(CircuitParams c, double z_wg, double velocity);
};

/// E_J^o = Phi_0 I_J^o / (2 pi)
double single_junction_energy(const CircuitParams& c);

/// L_J = (Phi_0 / 2 pi)^2 / (2 E_J^o)
double junction_inductance(const CircuitParams& c);

/// E_J(phi) = 2 E_J^o |cos(pi phi)|
double josephson_energy(const CircuitParams& c, double phi);

/// x_eff = (Phi_0 / 2 pi)^2 / (ell_wg E_J(phi)). Throws std::domain_error at
/// a zero of cos(pi phi).
double effective_position(const CircuitParams& c, double phi);

/// d x_eff / d phi = pi tan(pi phi) x_eff
double effective_position_slope(const CircuitParams& c, double phi);

/// sin(pi phi_b) / cos^2(pi phi_b)
double trig_factor(double phi_b);

/// Zero-point flux of the LC resonator, sqrt(hbar omega_LC L_LC / 2).
double lc_flux_zpf(const CircuitParams& c);

/// Zero-point fluctuation of the effective length induced by the LC flux
/// through the SQUID: pi tan(pi phi_b) x_eff(phi_b) chi Phi_zpf / Phi_0.
double effective_length_zpf(const CircuitParams& c);

/// omega_c = omega_a X_zpf / (2 x^o) with x^o = reference_length().
double analog_coupling(const CircuitParams& c);

/// Closed form omega_a^2 chi sqrt(hbar omega_LC L_LC) sin/cos^2 / (4 sqrt2 pi I_J^o Z_wg),
/// which coincides with analog_coupling for x^o = pi v / (2 omega_a).
double analog_coupling_closed_form(const CircuitParams& c);

/// R = Phi_0 / (tan(pi phi_b) pi chi dL), dL = x_eff(phi_b).
double flux_length_coefficient(const CircuitParams& c);

/// m = C_LC R^2
double effective_mass(const CircuitParams& c);

/// x_zpf = sqrt(hbar / (2 m omega_LC))
double mass_zpf(const CircuitParams& c);

/// Plasma frequency 2 pi sqrt(2 E_J^o / (Phi_0^2 C_J^o)).
double plasma_frequency(const CircuitParams& c);

/// Intermode coupling of the instantaneous cosine modes,
///   g_nk = (-1)^{n+k} (2k+1)(2n+1) / (2 (k - n)(k + n + 1)),  g_nn = 0,
/// equal to d * integral_0^d phi_k d(phi_n)/dd dx.
double mode_coupling_g(int n, int k);

/// Roots of (kappa dL) tan(kappa L) = 1, one per branch
/// (n pi / L, (n + 1/2) pi / L), n = 0..n_max. dL = 0 gives (2n+1) pi / 2L.
std::vector<double> mode_wavevectors(double length, double delta_l, int n_max);

struct RegimeCheck {
  std::string name;
  double ratio = 0.0;
  bool pass = true;
  std::string detail;
};

struct RegimeReport {
  std::vector<RegimeCheck> checks;
  bool pass() const;
};

inline constexpr double kRegimeWarnRatio = 0.1;

/// Plasma-frequency separation for omega_lc and omega_a, SQUID loop
/// inductance, flux-bias guard band and small flux oscillation. A check
/// warns when its ratio exceeds 0.1.
RegimeReport validate_regime(const CircuitParams& c);

struct AnalogModel {
  double omega_c = 0.0;        ///< rad/s
  double omega_c_closed = 0.0; ///< closed form, rad/s
  double m_eff = 0.0;          ///< kg
  double delta_l_bias = 0.0;   ///< m
  double r_coeff = 0.0;        ///< Wb/m
  double x_zpf = 0.0;          ///< m, from m_eff
  double length = 0.0;         ///< x^o, m
  double trig = 0.0;
  /// Dynamics parameters in units of rate_unit: omega_a, omega_b = omega_lc,
  /// omega_c, and the loss rates passed to build_analog_model.
  SystemParams system{};
  double rate_unit = 1.0;
};

/// `system` holds rates divided by rate_unit (rad/s); gamma_a and gamma_b
/// are given in rad/s.
AnalogModel build_analog_model(const CircuitParams& c, double rate_unit = 1.0, double gamma_a = 1.0,
                               double gamma_b = 1.0);

}  // namespace dcebr::circuit
