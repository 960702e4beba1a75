#include "dcebr/steady.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <omp.h>

#include "dcebr/errors.hpp"

namespace dcebr {

using cd = std::complex<double>;

namespace {

constexpr cd I{0.0, 1.0};

double abs_r2(const SystemParams& p, double omega) { return std::norm(linear_response(p, omega)); }

double golden_max(const SystemParams& p, double a, double b) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = abs_r2(p, c), fd = abs_r2(p, d);
  for (int it = 0; it < 200 && (b - a) > 1e-14 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = abs_r2(p, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = abs_r2(p, d);
    }
  }
  return 0.5 * (a + b);
}

std::vector<double> grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  for (std::size_t i = 0; i < n; ++i)
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return g;
}

// Root of f on [a, b] with f(a), f(b) of opposite sign.
template <class F>
double bisect(F&& f, double a, double b) {
  double fa = f(a);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m == a || m == b) break;
    const double fm = f(m);
    if ((fm < 0.0) == (fa < 0.0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

double newton_polish(const CubicCoeffs& c, double x) {
  for (int it = 0; it < 3; ++it) {
    const double d = c.derivative(x);
    if (d == 0.0) break;
    const double xn = x - c(x) / d;
    if (!std::isfinite(xn) || std::abs(c(xn)) >= std::abs(c(x))) break;
    x = xn;
  }
  return x;
}

std::vector<SweepRow> sweep_point(const SystemParams& p, double f0, double omega, const std::set<Tier>& tiers,
                                  const SweepOptions& options, std::vector<SweepFailure>& failures) {
  std::vector<SweepRow> rows;
  const DriveParams d{f0, omega};
  const double delta = omega - p.omega_b;
  for (Tier tier : tiers) {
    try {
      switch (tier) {
        case Tier::Linear: {
          const Detunings det = detunings(p, d);
          SweepRow r;
          r.omega = omega;
          r.tier = tier;
          r.b = linear_response(p, omega) * f0;
          r.q = -2.0 * I * p.omega_c * r.b / (p.gamma_a - I * det.q);
          r.n_a = 4.0 * p.omega_c * std::imag(std::conj(r.q) * r.b) / p.gamma_a;
          r.x = 1.0 + 2.0 * r.n_a;
          r.abs_b2 = std::norm(r.b);
          r.stability = "stable";
          rows.push_back(r);
          break;
        }
        case Tier::CumulantBranches: {
          const auto branches = branch_solutions(p, f0, delta);
          for (std::size_t k = 0; k < branches.size(); ++k) {
            const BranchSolution& s = branches[k];
            SweepRow r;
            r.omega = omega;
            r.tier = tier;
            r.branch_index = static_cast<int>(k);
            r.x = s.x;
            r.n_a = s.n_a;
            r.b = s.b;
            r.q = s.q;
            r.abs_b2 = std::norm(s.b);
            r.stability = to_string(s.stability);
            rows.push_back(r);
          }
          break;
        }
        case Tier::MasterEquation: {
          const Liouvillian L(p, d, options.fock);
          const Observables o = measure(steady_state(L, options.strategy));
          SweepRow r;
          r.omega = omega;
          r.tier = tier;
          r.n_a = o.n_a;
          r.x = 1.0 + 2.0 * o.n_a;
          r.b = o.b_amp;
          r.q = o.q_amp;
          r.abs_b2 = std::norm(o.b_amp);
          r.n_b = o.n_b;
          r.stability = "na";
          rows.push_back(r);
          break;
        }
      }
    } catch (const std::exception& e) {
      failures.push_back({omega, tier, e.what()});
    }
  }
  return rows;
}

}  // namespace

cd linear_response(const SystemParams& p, double omega) {
  const Detunings det = detunings(p, DriveParams{0.0, omega});
  const cd den = det.b * det.q + I * (p.gamma_a * det.b + 0.5 * p.gamma_b * det.q) -
                 (2.0 * p.omega_c * p.omega_c + p.gamma0_sq());
  return -(det.q + I * p.gamma_a) / den;
}

double resonant_squared_amplitude(const SystemParams& p, double f0, double delta) {
  const double s = 2.0 * p.omega_c * p.omega_c + p.gamma0_sq();
  const double g1 = p.gamma1();
  const double num = delta * delta + p.gamma_a * p.gamma_a;
  const double den = (delta * delta - s) * (delta * delta - s) + g1 * g1 * delta * delta;
  return f0 * f0 * num / den;
}

ResponseCurve response_curve(const SystemParams& p, double f0, std::span<const double> omegas) {
  ResponseCurve c;
  c.omegas.assign(omegas.begin(), omegas.end());
  for (double w : omegas) {
    const cd r = linear_response(p, w);
    c.response.push_back(r);
    c.squared_amp.push_back(std::norm(r * f0));
  }
  return c;
}

double effective_linewidth(const SystemParams& p) {
  return (p.gamma0_sq() + 2.0 * p.omega_c * p.omega_c) / p.gamma1();
}

bool linewidth_formula_valid(const SystemParams& p) { return p.omega_c < p.gamma1(); }

double doublet_splitting(const SystemParams& p) { return 2.0 * std::numbers::sqrt2 * p.omega_c; }

std::vector<double> response_peaks(const SystemParams& p, double lo, double hi, std::size_t points) {
  if (!(hi > lo) || points < 3) throw std::invalid_argument("peak search needs hi > lo and >= 3 points");
  const auto g = grid(lo, hi, points);
  std::vector<double> v(points);
  for (std::size_t i = 0; i < points; ++i) v[i] = abs_r2(p, g[i]);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < points; ++i)
    if (v[i] > v[i - 1] && v[i] >= v[i + 1]) peaks.push_back(golden_max(p, g[i - 1], g[i + 1]));
  return peaks;
}

double measured_doublet_splitting(const SystemParams& p, std::size_t points) {
  const double half = 4.0 * std::numbers::sqrt2 * std::max(p.omega_c, 1e-12);
  const auto peaks = response_peaks(p, p.omega_b - half, p.omega_b + half, points);
  if (peaks.size() < 2) return 0.0;
  std::vector<std::pair<double, double>> by_height;
  for (double w : peaks) by_height.emplace_back(abs_r2(p, w), w);
  std::sort(by_height.begin(), by_height.end(), std::greater<>());
  return std::abs(by_height[0].second - by_height[1].second);
}

double response_fwhm(const SystemParams& p, double lo, double hi, std::size_t points) {
  const auto g = grid(lo, hi, points);
  std::size_t imax = 0;
  double vmax = -1.0;
  for (std::size_t i = 0; i < points; ++i) {
    const double v = abs_r2(p, g[i]);
    if (v > vmax) {
      vmax = v;
      imax = i;
    }
  }
  const double w0 = golden_max(p, g[imax > 0 ? imax - 1 : 0], g[std::min(imax + 1, points - 1)]);
  const double half = 0.5 * abs_r2(p, w0);
  const auto f = [&](double w) { return abs_r2(p, w) - half; };
  if (f(lo) >= 0.0 || f(hi) >= 0.0) throw NumericalError("half-maximum crossing outside the search window");
  // Walk outwards on the grid to the first crossing on each side.
  std::size_t il = imax, ir = imax;
  while (il > 0 && f(g[il]) > 0.0) --il;
  while (ir + 1 < points && f(g[ir]) > 0.0) ++ir;
  if (f(g[il]) > 0.0 || f(g[ir]) > 0.0) throw NumericalError("half-maximum crossing outside the search window");
  const double left = bisect(f, g[il], w0);
  const double right = bisect(f, w0, g[ir]);
  return right - left;
}

double CubicCoeffs::scaled_residual(double x) const {
  const double ax = std::abs(x);
  const double scale = std::abs(c3) * ax * ax * ax + std::abs(c2) * ax * ax + std::abs(c1) * ax + std::abs(c0);
  return scale == 0.0 ? 0.0 : std::abs((*this)(x)) / scale;
}

CubicCoeffs steady_cubic_coeffs(const SystemParams& p, double f0, double delta) {
  const double wc2 = p.omega_c * p.omega_c;
  const double A = delta * delta - p.gamma0_sq();
  const double g1 = p.gamma1();
  CubicCoeffs c;
  c.c3 = wc2 * wc2;
  c.c2 = -wc2 * (wc2 + A);
  c.c1 = 0.25 * A * A + 0.25 * delta * delta * g1 * g1 + wc2 * A - 4.0 * wc2 * f0 * f0;
  c.c0 = -0.25 * (A * A + delta * delta * g1 * g1);
  return c;
}

std::vector<double> real_cubic_roots(const CubicCoeffs& c) {
  std::vector<double> roots;
  if (c.c3 == 0.0) {
    if (c.c2 == 0.0) {
      if (c.c1 != 0.0) roots.push_back(-c.c0 / c.c1);
      return roots;
    }
    const double disc = c.c1 * c.c1 - 4.0 * c.c2 * c.c0;
    if (disc < 0.0) return roots;
    const double s = std::sqrt(disc);
    const double qq = -0.5 * (c.c1 + std::copysign(s, c.c1));
    if (qq != 0.0) roots.push_back(c.c0 / qq);
    roots.push_back(qq / c.c2);
  } else {
    const double a = c.c2 / c.c3, b = c.c1 / c.c3, cc = c.c0 / c.c3;
    const double shift = -a / 3.0;
    const double pp = b - a * a / 3.0;
    const double qq = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    const double D = 0.25 * qq * qq + pp * pp * pp / 27.0;
    if (pp == 0.0 && qq == 0.0) {
      roots.push_back(shift);
    } else if (D < 0.0) {
      const double m = 2.0 * std::sqrt(-pp / 3.0);
      const double arg = std::clamp(3.0 * qq / (pp * m), -1.0, 1.0);
      const double theta = std::acos(arg) / 3.0;
      for (int k = 0; k < 3; ++k) roots.push_back(m * std::cos(theta - 2.0 * std::numbers::pi * k / 3.0) + shift);
    } else {
      const double w = std::cbrt(-0.5 * qq - std::copysign(std::sqrt(D), qq));
      const double u = w, v = (w == 0.0) ? 0.0 : -pp / (3.0 * w);
      const double r1 = u + v + shift;
      roots.push_back(r1);
      const double re = -0.5 * (u + v) + shift;
      const double im = 0.5 * std::sqrt(3.0) * (u - v);
      if (std::abs(im) <= 1e-10 * std::abs(re) && std::abs(re - r1) > 1e-12 * std::max(1.0, std::abs(r1)))
        roots.push_back(re);
    }
  }
  for (double& r : roots) r = newton_polish(c, r);
  std::sort(roots.begin(), roots.end());
  return roots;
}

std::string to_string(Stability s) { return s == Stability::Stable ? "stable" : "unstable"; }

cd branch_b(const SystemParams& p, double f0, double delta, double x) {
  const double A = delta * delta - p.gamma0_sq();
  const cd den(2.0 * p.omega_c * p.omega_c * x - A, -delta * p.gamma1());
  return f0 * (delta + I * p.gamma_a) / den;
}

cd branch_q(const SystemParams& p, double delta, double x, cd b) {
  return -2.0 * I * p.omega_c * x * b / (p.gamma_a - I * delta);
}

double fixed_point_residual(const SemiState& s, const SystemParams& p, const DriveParams& d) {
  return pack(cumulant_rhs(s, p, d)).cwiseAbs().maxCoeff();
}

std::vector<BranchSolution> branch_solutions(const SystemParams& p, double f0, double delta) {
  p.validate();
  if (!p.resonant()) throw std::invalid_argument("branch solutions require omega_b = 2 omega_a");
  if (!(f0 >= 0.0)) throw std::invalid_argument("f0 must be >= 0");
  const CubicCoeffs c = steady_cubic_coeffs(p, f0, delta);
  const DriveParams d{f0, p.omega_b + delta};
  std::vector<BranchSolution> out;
  for (double x : real_cubic_roots(c)) {
    if (x < 1.0 - 1e-9) continue;
    x = std::max(x, 1.0);
    BranchSolution s;
    s.x = x;
    s.n_a = 0.5 * (x - 1.0);
    s.b = branch_b(p, f0, delta, x);
    s.q = branch_q(p, delta, x, s.b);
    const SemiJacobian J = cumulant_jacobian(SemiState{s.b, s.q, s.n_a}, p, d);
    s.max_real_eigenvalue = J.eigenvalues().real().maxCoeff();
    s.critical = std::abs(s.max_real_eigenvalue) <= kStabilityEps;
    s.stability = s.max_real_eigenvalue < -kStabilityEps ? Stability::Stable : Stability::Unstable;
    out.push_back(s);
  }
  if (out.empty()) throw NumericalError("no steady-state root with x >= 1");
  return out;
}

double modified_threshold(const SystemParams& p) {
  if (!(p.omega_c > 0.0)) throw std::invalid_argument("modified threshold requires omega_c > 0");
  return 0.5 * (p.omega_c + p.gamma0_sq() / (2.0 * p.omega_c));
}

std::string to_string(Tier t) {
  switch (t) {
    case Tier::Linear: return "linear";
    case Tier::CumulantBranches: return "cumulant";
    case Tier::MasterEquation: return "master";
  }
  return "unknown";
}

std::optional<Tier> parse_tier(const std::string& s) {
  if (s == "linear") return Tier::Linear;
  if (s == "cumulant") return Tier::CumulantBranches;
  if (s == "master") return Tier::MasterEquation;
  return std::nullopt;
}

SweepTable sweep(const SystemParams& p, double f0, std::span<const double> omegas, const std::set<Tier>& tiers,
                 const SweepOptions& options) {
  p.validate();
  const auto n = static_cast<std::ptrdiff_t>(omegas.size());
  std::vector<std::vector<SweepRow>> rows(omegas.size());
  std::vector<std::vector<SweepFailure>> fails(omegas.size());
  const int threads = options.workers > 0 ? options.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    rows[k] = sweep_point(p, f0, omegas[k], tiers, options, fails[k]);
  }
  SweepTable t;
  for (std::size_t k = 0; k < omegas.size(); ++k) {
    t.rows.insert(t.rows.end(), rows[k].begin(), rows[k].end());
    t.failures.insert(t.failures.end(), fails[k].begin(), fails[k].end());
  }
  return t;
}

SweepTable sweep_serial(const SystemParams& p, double f0, std::span<const double> omegas,
                        const std::set<Tier>& tiers, const SweepOptions& options) {
  p.validate();
  SweepTable t;
  for (double w : omegas) {
    auto rows = sweep_point(p, f0, w, tiers, options, t.failures);
    t.rows.insert(t.rows.end(), rows.begin(), rows.end());
  }
  return t;
}

}  // namespace dcebr
