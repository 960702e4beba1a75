#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>

#include "dcebr/errors.hpp"

namespace dcebr {

struct StepControl {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double initial_step = 0.0;  ///< 0 selects a step from the first derivative
  double max_step = 0.0;      ///< 0 means unbounded
  std::size_t max_steps = 50'000'000;

  static StepControl uniform(double tol) {
    StepControl c;
    c.rel_tol = tol;
    c.abs_tol = tol;
    return c;
  }
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double last_step = 0.0;
};

/// Dormand-Prince 5(4) with FSAL and PI step control.
///
/// `State` is any fixed-layout Eigen dense type (vector or matrix, real or
/// complex). `rhs(t, y, dydt)` fills dydt. `observe(i, t, y)` is called at
/// every requested output time times[i], which the integrator hits exactly;
/// times must be non-decreasing, times[0] is the initial time.
///
/// The local error of an accepted step satisfies
///   max_i |err_i| / (abs_tol + rel_tol * max(|y_i|, |y_new_i|)) <= 1.
/// Throws NumericalError on step-size underflow or step budget exhaustion.
template <class State, class Rhs, class Observer>
IntegrationStats integrate_dopri5(Rhs&& rhs, State y, std::span<const double> times,
                                  const StepControl& ctl, Observer&& observe) {
  // Butcher tableau.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                   a65 = -5103.0 / 18656;
  constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                   a76 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  IntegrationStats stats;
  if (times.empty()) return stats;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (times[i] < times[i - 1]) throw std::invalid_argument("output times must be non-decreasing");

  double t = times[0];
  observe(std::size_t{0}, t, static_cast<const State&>(y));
  if (times.size() == 1) return stats;

  State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, k7 = y, tmp = y, y_new = y;
  rhs(t, y, k1);
  ++stats.rhs_evaluations;

  const double span_total = times.back() - times.front();
  double h = ctl.initial_step;
  if (h <= 0.0) {
    const double d0 = y.cwiseAbs().maxCoeff();
    const double d1 = k1.cwiseAbs().maxCoeff();
    const double scale = ctl.abs_tol + ctl.rel_tol * d0;
    h = (d1 > 0.0) ? 0.01 * scale / (d1 * ctl.rel_tol + 1e-300) : 1e-3 * span_total;
    h = std::clamp(h, 1e-10 * std::max(span_total, 1.0), std::max(span_total, 1e-12));
    h = std::min(h, 0.01 * std::max(span_total, 1e-12));
  }
  if (ctl.max_step > 0.0) h = std::min(h, ctl.max_step);

  double err_prev = 1e-4;
  std::size_t next = 1;
  while (next < times.size()) {
    const double target = times[next];
    if (t >= target) {
      observe(next, t, static_cast<const State&>(y));
      ++next;
      continue;
    }
    if (stats.accepted + stats.rejected >= ctl.max_steps)
      throw NumericalError("dopri5: step budget exhausted at t=" + std::to_string(t));

    bool clipped = false;
    double h_try = h;
    if (t + h_try >= target) {
      h_try = target - t;
      clipped = true;
    }
    const double h_min = 1e-14 * std::max(1.0, std::abs(t));
    if (h_try < h_min && !clipped)
      throw NumericalError("dopri5: step size underflow at t=" + std::to_string(t));

    tmp = y + h_try * (a21 * k1);
    rhs(t + c2 * h_try, tmp, k2);
    tmp = y + h_try * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h_try, tmp, k3);
    tmp = y + h_try * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h_try, tmp, k4);
    tmp = y + h_try * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h_try, tmp, k5);
    tmp = y + h_try * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h_try, tmp, k6);
    y_new = y + h_try * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
    rhs(t + h_try, y_new, k7);
    stats.rhs_evaluations += 6;

    tmp = h_try * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const auto scale =
        (ctl.abs_tol + ctl.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).eval();
    const double err = (tmp.cwiseAbs().array() / scale).maxCoeff();

    if (!std::isfinite(err))
      throw NumericalError("dopri5: non-finite error estimate at t=" + std::to_string(t));

    if (err <= 1.0) {
      t = clipped ? target : t + h_try;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.accepted;
      stats.last_step = h_try;
      // PI controller (Hairer & Wanner, beta = 0.04).
      double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.7 / 5.0) * std::pow(err_prev, 0.04);
      fac = std::clamp(fac, 0.2, 5.0);
      const double h_next = h_try * fac;
      // A step clipped to hit an output time does not shrink the proposal.
      h = clipped ? std::max(h, h_next) : h_next;
      err_prev = std::max(err, 1e-4);
    } else {
      ++stats.rejected;
      h = h_try * std::max(0.2, 0.9 * std::pow(err, -1.0 / 5.0));
      if (h < h_min) throw NumericalError("dopri5: step size underflow at t=" + std::to_string(t));
    }
    if (ctl.max_step > 0.0) h = std::min(h, ctl.max_step);
  }
  return stats;
}

}  // namespace dcebr
