#include "dcebr/circuit.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dcebr::circuit {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || v <= 0.0) throw std::invalid_argument(std::string(name) + " must be finite and > 0");
}

void require_bias_inside_guard(const CircuitParams& c) {
  if (std::abs(c.phi_bias) >= 0.5 - c.guard_band)
    throw std::domain_error("flux bias inside the guard band of the cos zero; trigonometric factor diverges");
}

}  // namespace

void CircuitParams::validate() const {
  require_positive(omega_a, "omega_a");
  require_positive(omega_lc, "omega_lc");
  require_positive(i_crit, "i_crit");
  require_positive(c_j, "c_j");
  require_positive(z_wg, "z_wg");
  require_positive(ell_wg, "ell_wg");
  require_positive(c_wg, "c_wg");
  require_positive(l_lc, "l_lc");
  require_positive(c_lc, "c_lc");
  if (!(mutual_ratio > 0.0 && mutual_ratio < 1.0)) throw std::invalid_argument("mutual_ratio must lie in (0, 1)");
  if (!std::isfinite(phi_bias) || std::abs(phi_bias) >= 0.5)
    throw std::invalid_argument("|phi_bias| must be < 1/2");
  if (!std::isfinite(cavity_length) || cavity_length < 0.0) throw std::invalid_argument("cavity_length must be >= 0");
  if (!std::isfinite(l_squid) || l_squid < 0.0) throw std::invalid_argument("l_squid must be >= 0");
  if (!(guard_band >= 0.0 && guard_band < 0.5)) throw std::invalid_argument("guard_band must lie in [0, 1/2)");
  const double z = std::sqrt(ell_wg / c_wg);
  if (std::abs(z - z_wg) > 1e-9 * z_wg)
    throw std::invalid_argument("z_wg disagrees with sqrt(ell_wg / c_wg)");
}

double CircuitParams::wave_velocity() const { return 1.0 / std::sqrt(ell_wg * c_wg); }

double CircuitParams::reference_length() const {
  return cavity_length > 0.0 ? cavity_length : 2.0 * kPi * wave_velocity() / omega_a;
}

CircuitParams CircuitParams::with_waveguide(CircuitParams c, double z_wg, double velocity) {
  require_positive(z_wg, "z_wg");
  require_positive(velocity, "velocity");
  c.z_wg = z_wg;
  c.ell_wg = z_wg / velocity;
  c.c_wg = 1.0 / (z_wg * velocity);
  return c;
}

double single_junction_energy(const CircuitParams& c) { return kFluxQuantum * c.i_crit / (2.0 * kPi); }

double junction_inductance(const CircuitParams& c) {
  const double f = kFluxQuantum / (2.0 * kPi);
  return f * f / (2.0 * single_junction_energy(c));
}

double josephson_energy(const CircuitParams& c, double phi) {
  return 2.0 * single_junction_energy(c) * std::abs(std::cos(kPi * phi));
}

double effective_position(const CircuitParams& c, double phi) {
  const double ej = josephson_energy(c, phi);
  if (!(ej > 1e-15 * single_junction_energy(c))) throw std::domain_error("Josephson energy vanishes at this flux");
  const double f = kFluxQuantum / (2.0 * kPi);
  return f * f / (c.ell_wg * ej);
}

double effective_position_slope(const CircuitParams& c, double phi) {
  return kPi * std::tan(kPi * phi) * effective_position(c, phi);
}

double trig_factor(double phi_b) {
  const double cs = std::cos(kPi * phi_b);
  return std::sin(kPi * phi_b) / (cs * cs);
}

double lc_flux_zpf(const CircuitParams& c) { return std::sqrt(0.5 * kHbar * c.omega_lc * c.l_lc); }

double effective_length_zpf(const CircuitParams& c) {
  const double dphi = c.mutual_ratio * lc_flux_zpf(c) / kFluxQuantum;
  return std::abs(effective_position_slope(c, c.phi_bias)) * dphi;
}

double analog_coupling(const CircuitParams& c) {
  c.validate();
  require_bias_inside_guard(c);
  return c.omega_a * effective_length_zpf(c) / (2.0 * c.reference_length());
}

double analog_coupling_closed_form(const CircuitParams& c) {
  c.validate();
  require_bias_inside_guard(c);
  const double root = std::sqrt(kHbar * c.omega_lc * c.l_lc);
  return c.omega_a * c.omega_a * c.mutual_ratio * root * std::abs(trig_factor(c.phi_bias)) /
         (4.0 * std::numbers::sqrt2 * kPi * c.i_crit * c.z_wg);
}

double flux_length_coefficient(const CircuitParams& c) {
  c.validate();
  require_bias_inside_guard(c);
  const double t = std::tan(kPi * c.phi_bias);
  if (std::abs(t) < 1e-12) throw std::domain_error("zero flux bias: no linear flux-to-length coupling");
  return kFluxQuantum / (std::abs(t) * kPi * c.mutual_ratio * effective_position(c, c.phi_bias));
}

double effective_mass(const CircuitParams& c) {
  const double r = flux_length_coefficient(c);
  return c.c_lc * r * r;
}

double mass_zpf(const CircuitParams& c) { return std::sqrt(kHbar / (2.0 * effective_mass(c) * c.omega_lc)); }

double plasma_frequency(const CircuitParams& c) {
  return 2.0 * kPi * std::sqrt(2.0 * single_junction_energy(c) / (kFluxQuantum * kFluxQuantum * c.c_j));
}

double mode_coupling_g(int n, int k) {
  if (n < 0 || k < 0) throw std::invalid_argument("mode indices must be >= 0");
  if (n == k) return 0.0;
  const double sign = ((n + k) % 2 == 0) ? 1.0 : -1.0;
  return 0.5 * sign * (2.0 * k + 1.0) * (2.0 * n + 1.0) /
         (static_cast<double>(k - n) * static_cast<double>(k + n + 1));
}

std::vector<double> mode_wavevectors(double length, double delta_l, int n_max) {
  if (!(length > 0.0)) throw std::invalid_argument("length must be > 0");
  if (!(delta_l >= 0.0)) throw std::invalid_argument("delta_l must be >= 0");
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  std::vector<double> out;
  for (int n = 0; n <= n_max; ++n) {
    const double hi0 = (n + 0.5) * kPi / length;
    if (delta_l == 0.0) {
      out.push_back(hi0);
      continue;
    }
    const auto f = [&](double k) { return k * delta_l * std::sin(k * length) - std::cos(k * length); };
    double lo = n * kPi / length, hi = hi0;
    const double flo = f(lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (mid == lo || mid == hi) break;
      if ((f(mid) < 0.0) == (flo < 0.0))
        lo = mid;
      else
        hi = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

bool RegimeReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

RegimeReport validate_regime(const CircuitParams& c) {
  c.validate();
  RegimeReport r;
  const double ws = plasma_frequency(c);
  const auto add = [&r](std::string name, double ratio, bool pass, std::string detail) {
    r.checks.push_back({std::move(name), ratio, pass, std::move(detail)});
  };
  const double lc_ratio = c.omega_lc / ws;
  add("plasma_lc", lc_ratio, lc_ratio <= kRegimeWarnRatio, "omega_lc / omega_s");
  const double a_ratio = c.omega_a / ws;
  add("plasma_cavity", a_ratio, a_ratio <= kRegimeWarnRatio, "omega_a / omega_s");
  const double f = kFluxQuantum / (2.0 * kPi);
  const double sq_ratio = c.l_squid / (f * f / single_junction_energy(c));
  add("squid_inductance", sq_ratio, sq_ratio <= kRegimeWarnRatio, "L_SQUID / ((Phi_0/2pi)^2 / E_J^o)");
  const double margin = 0.5 - std::abs(c.phi_bias);
  const double guard_ratio = c.guard_band / margin;
  add("bias_guard", guard_ratio, guard_ratio < 1.0, "guard_band / (1/2 - |phi_b|)");
  const double dphi = c.mutual_ratio * lc_flux_zpf(c) / kFluxQuantum;
  const double osc_ratio = dphi / margin;
  add("flux_oscillation", osc_ratio, osc_ratio <= kRegimeWarnRatio, "chi Phi_zpf / Phi_0 / (1/2 - |phi_b|)");
  return r;
}

AnalogModel build_analog_model(const CircuitParams& c, double rate_unit, double gamma_a, double gamma_b) {
  require_positive(rate_unit, "rate_unit");
  AnalogModel m;
  m.omega_c = analog_coupling(c);
  m.omega_c_closed = analog_coupling_closed_form(c);
  m.m_eff = effective_mass(c);
  m.delta_l_bias = effective_position(c, c.phi_bias);
  m.r_coeff = flux_length_coefficient(c);
  m.x_zpf = mass_zpf(c);
  m.length = c.reference_length();
  m.trig = trig_factor(c.phi_bias);
  m.rate_unit = rate_unit;
  m.system.omega_a = c.omega_a / rate_unit;
  m.system.omega_b = c.omega_lc / rate_unit;
  m.system.omega_c = m.omega_c / rate_unit;
  m.system.gamma_a = gamma_a / rate_unit;
  m.system.gamma_b = gamma_b / rate_unit;
  return m;
}

}  // namespace dcebr::circuit
