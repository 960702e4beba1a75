#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dcebr/params.hpp"

namespace dcebr {

/// Cumulant-model state: <b>, <a^2>, <a^+a>.
struct SemiState {
  std::complex<double> b{};
  std::complex<double> q{};
  double n_a = 0.0;
};

/// Classical amplitudes <a>, <b>.
struct MeanFieldState {
  std::complex<double> a{};
  std::complex<double> b{};
};

enum class Model { MeanField, Linear, Cumulant };
std::string to_string(Model m);

enum class Regime { OverDamped, UnderDamped, Critical };
std::string to_string(Regime r);

struct RingdownRates {
  std::complex<double> omega_d{};
  double gamma_1 = 0.0;
  Regime regime = Regime::OverDamped;
};

/// Packed real layouts used by the integrator and the Jacobians.
using SemiVector = Eigen::Matrix<double, 5, 1>;         ///< (Re b, Im b, Re q, Im q, n_a)
using MeanFieldVector = Eigen::Matrix<double, 4, 1>;    ///< (Re a, Im a, Re b, Im b)
using SemiJacobian = Eigen::Matrix<double, 5, 5>;
using MeanFieldJacobian = Eigen::Matrix<double, 4, 4>;

SemiVector pack(const SemiState& s);
SemiState unpack(const SemiVector& v);
MeanFieldVector pack(const MeanFieldState& s);
MeanFieldState unpack_mean_field(const MeanFieldVector& v);

/// da/dt = -(g_a/2 - i D_a) a - 2i w_c a^* b
/// db/dt = -(g_b/2 - i D_b) b - i w_c a^2 + i F0
MeanFieldState mean_field_rhs(const MeanFieldState& s, const SystemParams& p, const DriveParams& d);
MeanFieldJacobian mean_field_jacobian(const MeanFieldState& s, const SystemParams& p, const DriveParams& d);

/// F0_th = g_a g_b / (8 w_c). Throws std::invalid_argument for w_c = 0.
double mean_field_threshold(const SystemParams& p);

/// Trivial-field fixed point a = 0, b = i F0 / (g_b/2 - i D_b).
MeanFieldState mean_field_trivial_point(const SystemParams& p, const DriveParams& d);

/// Largest real part of the Jacobian spectrum at the trivial point.
double mean_field_growth_rate(const SystemParams& p, const DriveParams& d);

/// Drive amplitude at which the trivial point loses stability, located by
/// bisection on [0, f_hi] to relative width rel_tol. f_hi = 0 selects a
/// bracket from repeated doubling. Throws NumericalError without a bracket.
double mean_field_instability_onset(const SystemParams& p, double omega, double rel_tol = 1e-12,
                                    double f_hi = 0.0);

/// Factorized-cumulant model:
///   db/dt   = -(g_b/2 - i D_b) b - i w_c q + i F0
///   dn_a/dt = -g_a n_a - 2i w_c q^* b + 2i w_c q b^*
///   dq/dt   = -(g_a - i D_q) q - 4i w_c n_a b - 2i w_c b
SemiState cumulant_rhs(const SemiState& s, const SystemParams& p, const DriveParams& d);
SemiJacobian cumulant_jacobian(const SemiState& s, const SystemParams& p, const DriveParams& d);

/// Linearized model: the n_a b term of dq/dt is dropped, so (b, q) obey a
/// linear system. dn_a/dt keeps its q^* b source; without it n_a would stay
/// identically zero.
SemiState linear_rhs(const SemiState& s, const SystemParams& p, const DriveParams& d);

/// w_d = sqrt(2 w_c^2 - (g_a - g_b/2)^2 / 4) on the principal branch. The
/// regime is Critical when |radicand| <= 1e-12 (2 w_c^2).
RingdownRates ringdown_rates(const SystemParams& p);

struct RingdownPoint {
  std::complex<double> b{};
  std::complex<double> q{};
};

/// Closed-form free decay at resonance from b(0) = b0, q(0) = 0:
///   b = e^{-g_1 t/2} b0 [cos(w_d t) + (g_a - g_b/2)/(2 w_d) sin(w_d t)]
///   q = -2i w_c b0 e^{-g_1 t/2} sin(w_d t)/w_d
/// times e^{-i w_b t} for both in the lab frame. Throws std::invalid_argument
/// unless w_b = 2 w_a to 1e-9 relative.
RingdownPoint analytic_ringdown(std::complex<double> b0, const SystemParams& p, double t,
                                Frame frame = Frame::Lab);

struct SemiTrajectory {
  Model model = Model::Cumulant;
  std::vector<double> times;
  std::vector<SemiState> states;
  std::vector<MeanFieldState> mean_field;  ///< filled for Model::MeanField only
  std::size_t clipped_samples = 0;         ///< outputs with n_a < -1e-9 reported as 0
  double min_raw_n_a = 0.0;
  std::size_t steps = 0;
};

inline constexpr double kNaUndershoot = -1e-9;

/// Adaptive Dormand-Prince integration of the Linear or Cumulant model.
/// Throws std::invalid_argument for Model::MeanField (use the overload).
SemiTrajectory integrate(Model model, const SemiState& s0, const SystemParams& p, const DriveParams& d,
                         std::span<const double> times, double tol = 1e-9);

/// Mean-field integration; states carry b, q = a^2, n_a = |a|^2.
SemiTrajectory integrate(const MeanFieldState& s0, const SystemParams& p, const DriveParams& d,
                         std::span<const double> times, double tol = 1e-9);

}  // namespace dcebr
