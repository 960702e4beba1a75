#pragma once

#include <complex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "dcebr/params.hpp"
#include "dcebr/quantum.hpp"
#include "dcebr/semiclassical.hpp"

namespace dcebr {

// ---------------------------------------------------------------- linear response

/// Mirror response b = R(omega) F0 of the linearized model at drive
/// frequency omega:
///   R = -(D_q + i g_a) / [D_b D_q + i(g_a D_b + g_b D_q / 2) - (2 w_c^2 + g_0^2)]
std::complex<double> linear_response(const SystemParams& p, double omega);

/// Resonant closed form of |b|^2 with D = omega - w_b:
///   F0^2 (D^2 + g_a^2) / [(D^2 - (2 w_c^2 + g_0^2))^2 + g_1^2 D^2]
double resonant_squared_amplitude(const SystemParams& p, double f0, double delta);

struct ResponseCurve {
  std::vector<double> omegas;
  std::vector<std::complex<double>> response;
  std::vector<double> squared_amp;
};

ResponseCurve response_curve(const SystemParams& p, double f0, std::span<const double> omegas);

/// Gamma = (g_0^2 + 2 w_c^2) / g_1, the half width of the resonant response
/// for w_c << g_1.
double effective_linewidth(const SystemParams& p);

/// True where the linewidth formula applies (w_c < g_1).
bool linewidth_formula_valid(const SystemParams& p);

/// 2 sqrt(2) w_c.
double doublet_splitting(const SystemParams& p);

/// Local maxima of |R(omega)|^2 on a uniform grid over [lo, hi], each refined
/// by golden-section search between its grid neighbours. Sorted ascending.
std::vector<double> response_peaks(const SystemParams& p, double lo, double hi, std::size_t points = 2001);

/// Distance between the two highest maxima over D in [-4 sqrt2 w_c, 4 sqrt2 w_c]
/// around omega_b; 0 when a single maximum is found.
double measured_doublet_splitting(const SystemParams& p, std::size_t points = 2001);

/// Full width at half maximum of |R(omega)|^2 around its highest maximum on
/// [lo, hi]. Crossings are located by bisection. Throws NumericalError when
/// a half-maximum crossing lies outside the window.
double response_fwhm(const SystemParams& p, double lo, double hi, std::size_t points = 2001);

// ---------------------------------------------------------------- nonlinear steady states

struct CubicCoeffs {
  double c3 = 0.0, c2 = 0.0, c1 = 0.0, c0 = 0.0;
  double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
  double derivative(double x) const { return (3.0 * c3 * x + 2.0 * c2) * x + c1; }
  /// |P(x)| / (|c3| x^3 + |c2| x^2 + |c1| x + |c0|)
  double scaled_residual(double x) const;
};

/// Steady-state polynomial in x = 1 + 2 n_a at resonance (D_b = D_q = delta),
/// with A = delta^2 - g_0^2:
///   c3 = w_c^4, c2 = -w_c^2 (w_c^2 + A),
///   c1 = A^2/4 + delta^2 g_1^2/4 + w_c^2 A - 4 w_c^2 F0^2,
///   c0 = -(A^2 + delta^2 g_1^2)/4.
CubicCoeffs steady_cubic_coeffs(const SystemParams& p, double f0, double delta);

/// Real roots of the polynomial (degree dropping when leading coefficients
/// vanish), from the trigonometric / Cardano forms with one Newton polish.
/// A complex pair counts as real when |Im x| <= 1e-10 |x|. Sorted ascending.
std::vector<double> real_cubic_roots(const CubicCoeffs& c);

enum class Stability { Stable, Unstable };
std::string to_string(Stability s);

struct BranchSolution {
  double x = 1.0;
  double n_a = 0.0;
  std::complex<double> b{};
  std::complex<double> q{};
  Stability stability = Stability::Stable;
  double max_real_eigenvalue = 0.0;
  bool critical = false;  ///< |max Re eig| <= 1e-10, reported Unstable
};

inline constexpr double kStabilityEps = 1e-10;

/// All steady states with x >= 1, sorted by x. Stability from the 5x5
/// Jacobian of the cumulant model. Requires w_b = 2 w_a; throws
/// NumericalError if no admissible root exists.
std::vector<BranchSolution> branch_solutions(const SystemParams& p, double f0, double delta);

/// b and q on the branch with photon parameter x at resonance.
std::complex<double> branch_b(const SystemParams& p, double f0, double delta, double x);
std::complex<double> branch_q(const SystemParams& p, double delta, double x, std::complex<double> b);

/// Max-norm of the cumulant right-hand side at s.
double fixed_point_residual(const SemiState& s, const SystemParams& p, const DriveParams& d);

/// (F0_th)' = (w_c + g_0^2/(2 w_c)) / 2. Throws std::invalid_argument for w_c = 0.
double modified_threshold(const SystemParams& p);

// ---------------------------------------------------------------- sweeps

enum class Tier { Linear, CumulantBranches, MasterEquation };
std::string to_string(Tier t);
std::optional<Tier> parse_tier(const std::string& s);

struct SweepRow {
  double omega = 0.0;
  Tier tier = Tier::Linear;
  int branch_index = 0;
  double x = 1.0;
  double n_a = 0.0;
  double abs_b2 = 0.0;
  std::complex<double> b{};
  std::complex<double> q{};
  std::string stability;  ///< "stable", "unstable" or "na"
  double n_b = 0.0;       ///< master-equation tier only
};

struct SweepFailure {
  double omega = 0.0;
  Tier tier = Tier::Linear;
  std::string message;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::vector<SweepFailure> failures;
};

struct SweepOptions {
  FockConfig fock{};
  int workers = 0;  ///< 0 leaves the OpenMP default
  SteadyStrategy strategy = LongTimeEvolution{};
};

/// Per-omega rows for each requested tier, ordered by omega index, then tier
/// (Linear, CumulantBranches, MasterEquation), then branch. Points are
/// distributed over OpenMP threads; the output does not depend on the
/// thread count. Failures are recorded per point without aborting.
SweepTable sweep(const SystemParams& p, double f0, std::span<const double> omegas,
                 const std::set<Tier>& tiers, const SweepOptions& options = {});

/// Serial reference of sweep.
SweepTable sweep_serial(const SystemParams& p, double f0, std::span<const double> omegas,
                        const std::set<Tier>& tiers, const SweepOptions& options = {});

}  // namespace dcebr
