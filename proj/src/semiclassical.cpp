#include "dcebr/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dcebr/errors.hpp"
#include "dcebr/ode.hpp"

namespace dcebr {

using cd = std::complex<double>;

namespace {

constexpr cd I{0.0, 1.0};

void check_times(std::span<const double> times) {
  if (times.empty()) throw std::invalid_argument("empty time grid");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be strictly increasing");
}

}  // namespace

std::string to_string(Model m) {
  switch (m) {
    case Model::MeanField: return "mean_field";
    case Model::Linear: return "linear";
    case Model::Cumulant: return "cumulant";
  }
  return "unknown";
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::OverDamped: return "over_damped";
    case Regime::UnderDamped: return "under_damped";
    case Regime::Critical: return "critical";
  }
  return "unknown";
}

SemiVector pack(const SemiState& s) {
  SemiVector v;
  v << s.b.real(), s.b.imag(), s.q.real(), s.q.imag(), s.n_a;
  return v;
}

SemiState unpack(const SemiVector& v) { return {cd(v(0), v(1)), cd(v(2), v(3)), v(4)}; }

MeanFieldVector pack(const MeanFieldState& s) {
  MeanFieldVector v;
  v << s.a.real(), s.a.imag(), s.b.real(), s.b.imag();
  return v;
}

MeanFieldState unpack_mean_field(const MeanFieldVector& v) { return {cd(v(0), v(1)), cd(v(2), v(3))}; }

MeanFieldState mean_field_rhs(const MeanFieldState& s, const SystemParams& p, const DriveParams& d) {
  const Detunings det = detunings(p, d);
  MeanFieldState r;
  r.a = -(0.5 * p.gamma_a - I * det.a) * s.a - 2.0 * I * p.omega_c * std::conj(s.a) * s.b;
  r.b = -(0.5 * p.gamma_b - I * det.b) * s.b - I * p.omega_c * s.a * s.a + I * d.f0;
  return r;
}

MeanFieldJacobian mean_field_jacobian(const MeanFieldState& s, const SystemParams& p, const DriveParams& d) {
  const Detunings det = detunings(p, d);
  const double ar = s.a.real(), ai = s.a.imag(), br = s.b.real(), bi = s.b.imag();
  const double w = p.omega_c, ga = 0.5 * p.gamma_a, gb = 0.5 * p.gamma_b;
  MeanFieldJacobian J;
  J << -ga + 2 * w * bi, -det.a - 2 * w * br, -2 * w * ai, 2 * w * ar,
       det.a - 2 * w * br, -ga - 2 * w * bi, -2 * w * ar, -2 * w * ai,
       2 * w * ai, 2 * w * ar, -gb, -det.b,
       -2 * w * ar, 2 * w * ai, det.b, -gb;
  return J;
}

double mean_field_threshold(const SystemParams& p) {
  if (!(p.omega_c > 0.0)) throw std::invalid_argument("mean-field threshold requires omega_c > 0");
  return p.gamma_a * p.gamma_b / (8.0 * p.omega_c);
}

MeanFieldState mean_field_trivial_point(const SystemParams& p, const DriveParams& d) {
  const Detunings det = detunings(p, d);
  return {cd(0.0, 0.0), I * d.f0 / (0.5 * p.gamma_b - I * det.b)};
}

double mean_field_growth_rate(const SystemParams& p, const DriveParams& d) {
  const MeanFieldJacobian J = mean_field_jacobian(mean_field_trivial_point(p, d), p, d);
  return J.eigenvalues().real().maxCoeff();
}

double mean_field_instability_onset(const SystemParams& p, double omega, double rel_tol, double f_hi) {
  const auto growth = [&](double f) { return mean_field_growth_rate(p, DriveParams{f, omega}); };
  if (growth(0.0) >= 0.0) throw NumericalError("trivial point unstable without drive");
  double hi = f_hi > 0.0 ? f_hi : std::max(p.gamma_a, p.gamma_b);
  if (f_hi <= 0.0) {
    for (int k = 0; k < 200 && growth(hi) < 0.0; ++k) hi *= 2.0;
  }
  if (growth(hi) < 0.0) throw NumericalError("no instability onset below f0=" + std::to_string(hi));
  double lo = 0.0;
  while (hi - lo > rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    (growth(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

SemiState cumulant_rhs(const SemiState& s, const SystemParams& p, const DriveParams& d) {
  const Detunings det = detunings(p, d);
  const double w = p.omega_c;
  SemiState r;
  r.b = -(0.5 * p.gamma_b - I * det.b) * s.b - I * w * s.q + I * d.f0;
  const cd dn = -p.gamma_a * s.n_a - 2.0 * I * w * std::conj(s.q) * s.b + 2.0 * I * w * s.q * std::conj(s.b);
  r.n_a = dn.real();
  r.q = -(p.gamma_a - I * det.q) * s.q - 4.0 * I * w * s.n_a * s.b - 2.0 * I * w * s.b;
  return r;
}

SemiJacobian cumulant_jacobian(const SemiState& s, const SystemParams& p, const DriveParams& d) {
  const Detunings det = detunings(p, d);
  const double br = s.b.real(), bi = s.b.imag(), qr = s.q.real(), qi = s.q.imag();
  const double w = p.omega_c, x = 1.0 + 2.0 * s.n_a, gb = 0.5 * p.gamma_b, ga = p.gamma_a;
  SemiJacobian J;
  J << -gb, -det.b, 0, w, 0,
       det.b, -gb, -w, 0, 0,
       0, 2 * w * x, -ga, -det.q, 4 * w * bi,
       -2 * w * x, 0, det.q, -ga, -4 * w * br,
       -4 * w * qi, 4 * w * qr, 4 * w * bi, -4 * w * br, -ga;
  return J;
}

SemiState linear_rhs(const SemiState& s, const SystemParams& p, const DriveParams& d) {
  const Detunings det = detunings(p, d);
  const double w = p.omega_c;
  SemiState r;
  r.b = -(0.5 * p.gamma_b - I * det.b) * s.b - I * w * s.q + I * d.f0;
  r.n_a = -p.gamma_a * s.n_a + 4.0 * w * std::imag(std::conj(s.q) * s.b);
  r.q = -(p.gamma_a - I * det.q) * s.q - 2.0 * I * w * s.b;
  return r;
}

RingdownRates ringdown_rates(const SystemParams& p) {
  const double delta = p.gamma_a - 0.5 * p.gamma_b;
  const double two_wc2 = 2.0 * p.omega_c * p.omega_c;
  const double r = two_wc2 - 0.25 * delta * delta;
  RingdownRates out;
  out.gamma_1 = p.gamma1();
  out.omega_d = r >= 0.0 ? cd(std::sqrt(r), 0.0) : cd(0.0, std::sqrt(-r));
  if (std::abs(r) <= 1e-12 * two_wc2)
    out.regime = Regime::Critical;
  else
    out.regime = r > 0.0 ? Regime::UnderDamped : Regime::OverDamped;
  return out;
}

RingdownPoint analytic_ringdown(cd b0, const SystemParams& p, double t, Frame frame) {
  p.validate();
  if (!p.resonant()) throw std::invalid_argument("analytic ring-down requires omega_b = 2 omega_a");
  const RingdownRates rr = ringdown_rates(p);
  const double half_delta = 0.5 * (p.gamma_a - 0.5 * p.gamma_b);
  const double decay = 0.5 * rr.gamma_1;

  // c = e^{-g1 t/2} cos(w_d t), s = e^{-g1 t/2} sin(w_d t)/w_d, both real.
  double c = 0.0, s = 0.0;
  switch (rr.regime) {
    case Regime::UnderDamped: {
      const double wd = rr.omega_d.real();
      const double e = std::exp(-decay * t);
      c = e * std::cos(wd * t);
      s = e * std::sin(wd * t) / wd;
      break;
    }
    case Regime::OverDamped: {
      const double k = rr.omega_d.imag();
      const double ep = std::exp((k - decay) * t), em = std::exp((-k - decay) * t);
      c = 0.5 * (ep + em);
      s = 0.5 * (ep - em) / k;
      break;
    }
    case Regime::Critical: {
      const double e = std::exp(-decay * t);
      c = e;
      s = e * t;
      break;
    }
  }
  RingdownPoint out;
  out.b = b0 * (c + half_delta * s);
  out.q = -2.0 * I * p.omega_c * b0 * s;
  if (frame == Frame::Lab) {
    const cd phase = std::exp(-I * p.omega_b * t);
    out.b *= phase;
    out.q *= phase;
  }
  return out;
}

SemiTrajectory integrate(Model model, const SemiState& s0, const SystemParams& p, const DriveParams& d,
                         std::span<const double> times, double tol) {
  if (model == Model::MeanField)
    throw std::invalid_argument("mean-field integration takes a MeanFieldState");
  p.validate();
  d.validate();
  check_times(times);
  SemiTrajectory out;
  out.model = model;
  out.times.assign(times.begin(), times.end());
  out.states.reserve(times.size());
  out.min_raw_n_a = s0.n_a;

  const auto rhs = [&](double, const SemiVector& y, SemiVector& dy) {
    const SemiState s = unpack(y);
    dy = pack(model == Model::Linear ? linear_rhs(s, p, d) : cumulant_rhs(s, p, d));
  };
  const auto observe = [&](std::size_t, double, const SemiVector& y) {
    SemiState s = unpack(y);
    out.min_raw_n_a = std::min(out.min_raw_n_a, s.n_a);
    if (model == Model::Cumulant && s.n_a < kNaUndershoot) {
      ++out.clipped_samples;
      s.n_a = 0.0;
    }
    out.states.push_back(s);
  };
  out.steps = integrate_dopri5(rhs, pack(s0), times, StepControl::uniform(tol), observe).accepted;
  return out;
}

SemiTrajectory integrate(const MeanFieldState& s0, const SystemParams& p, const DriveParams& d,
                         std::span<const double> times, double tol) {
  p.validate();
  d.validate();
  check_times(times);
  SemiTrajectory out;
  out.model = Model::MeanField;
  out.times.assign(times.begin(), times.end());
  const auto rhs = [&](double, const MeanFieldVector& y, MeanFieldVector& dy) {
    dy = pack(mean_field_rhs(unpack_mean_field(y), p, d));
  };
  const auto observe = [&](std::size_t, double, const MeanFieldVector& y) {
    const MeanFieldState m = unpack_mean_field(y);
    out.mean_field.push_back(m);
    out.states.push_back({m.b, m.a * m.a, std::norm(m.a)});
  };
  out.steps = integrate_dopri5(rhs, pack(s0), times, StepControl::uniform(tol), observe).accepted;
  out.min_raw_n_a = 0.0;
  return out;
}

}  // namespace dcebr
