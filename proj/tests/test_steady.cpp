#include "doctest.h"

#include <random>

#include "dcebr/semiclassical.hpp"
#include "dcebr/steady.hpp"
#include "oracles.hpp"

using namespace dcebr;
using cd = std::complex<double>;

namespace {

SystemParams resonant(double omega_c, double ga, double gb) { return {10.0, 20.0, omega_c, ga, gb}; }

SystemParams random_resonant(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  return resonant(u(rng), u(rng), u(rng));
}

}  // namespace

TEST_CASE("linear response") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int k = 0; k < 20; ++k) {
    SystemParams p = random_resonant(rng);
    p.omega_b += 0.3 * u(rng);  // off resonance too
    const double w = p.omega_b + u(rng);
    const cd r = linear_response(p, w), o = oracle::linear_response(p, w);
    CHECK(std::abs(r - o) < 1e-12 * std::abs(o));
  }
  SUBCASE("closed forms") {
    const SystemParams bare = resonant(0.0, 1.0, 0.3);
    for (double dw : {-0.7, 0.0, 0.2}) {
      const double exact = 1.0 / (dw * dw + 0.15 * 0.15);
      CHECK(std::norm(linear_response(bare, 20.0 + dw)) == doctest::Approx(exact).epsilon(1e-12));
    }
    const SystemParams p = resonant(0.7, 1.2, 0.5);
    const cd at = linear_response(p, 20.0);
    CHECK(std::abs(at - cd(0.0, p.gamma_a / (p.gamma0_sq() + 2.0 * 0.49))) < 1e-14);
    for (double dw : {-1.3, 0.4, 2.0})
      CHECK(std::norm(linear_response(p, 20.0 + dw)) ==
            doctest::Approx(resonant_squared_amplitude(p, 1.0, dw)).epsilon(1e-12));
    const double grid[3] = {19.0, 20.0, 21.5};
    const ResponseCurve c = response_curve(p, 0.3, grid);
    for (std::size_t i = 0; i < 3; ++i) CHECK(c.squared_amp[i] == doctest::Approx(std::norm(c.response[i] * 0.3)).epsilon(1e-12));
  }
}

TEST_CASE("linewidth and doublet") {
  const SystemParams weak = resonant(0.1, 1.0, 0.01);
  CHECK(effective_linewidth(weak) == doctest::Approx(0.025 / 1.005).epsilon(1e-14));
  CHECK(linewidth_formula_valid(weak));
  const double fwhm = response_fwhm(weak, 19.5, 20.5, 4001);
  CHECK(fwhm == doctest::Approx(2.0 * effective_linewidth(weak)).epsilon(0.03));
  CHECK(fwhm > weak.gamma_b);
  double prev = 0.0;
  for (double wc : {0.0, 0.05, 0.1, 0.2}) {
    const double g = effective_linewidth(resonant(wc, 1.0, 0.01));
    CHECK(g > prev);
    prev = g;
  }

  const SystemParams strong = resonant(10.0, 1.0, 1.0);
  CHECK(doublet_splitting(strong) == doctest::Approx(28.2842712474619).epsilon(1e-14));
  CHECK(measured_doublet_splitting(strong) == doctest::Approx(doublet_splitting(strong)).epsilon(0.02));
  const auto peaks = response_peaks(strong, 0.0, 40.0, 4001);
  REQUIRE(peaks.size() == 2);
  CHECK(peaks[0] + peaks[1] == doctest::Approx(40.0).epsilon(1e-8));
  CHECK(response_peaks(resonant(0.05, 1.0, 1.0), 15.0, 25.0).size() == 1);
}

TEST_CASE("steady cubic") {
  SUBCASE("vacuum root") {
    const CubicCoeffs c = steady_cubic_coeffs(resonant(0.5, 1.0, 1.0), 0.0, 0.0);
    CHECK(std::abs(c(1.0)) < 1e-15);
  }
  SUBCASE("roots are fixed points and Newton finds nothing else") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int k = 0; k < 25; ++k) {
      const SystemParams p = random_resonant(rng);
      const double f0 = 3.0 * modified_threshold(p) * std::abs(u(rng));
      const double delta = 2.0 * p.gamma1() * u(rng);
      const DriveParams d{f0, p.omega_b + delta};
      const auto branches = branch_solutions(p, f0, delta);
      REQUIRE_FALSE(branches.empty());
      for (const auto& b : branches) {
        CHECK(b.x >= 1.0);
        CHECK(b.x == doctest::Approx(1.0 + 2.0 * b.n_a).epsilon(1e-12));
        CHECK(fixed_point_residual(SemiState{b.b, b.q, b.n_a}, p, d) < 1e-9);
        const auto o = oracle::cumulant_rhs({b.b, b.q, b.n_a}, p, f0, d.omega);
        CHECK(std::abs(o.b) + std::abs(o.q) + std::abs(o.n_a) < 1e-9 * (1.0 + b.n_a));
      }
      const auto found = oracle::newton_fixed_points(p, f0, d.omega, 40, 1000 + k);
      for (const auto& f : found) {
        double best = 1e300;
        for (const auto& b : branches) best = std::min(best, std::abs(b.n_a - f.n_a) + std::abs(b.b - f.b));
        CHECK(best < 1e-6 * (1.0 + f.n_a));
      }
    }
  }
  SUBCASE("large drive: n_a approaches F0") {
    const double g0 = 1.0;
    const SystemParams p = resonant(g0, std::sqrt(2.0), std::sqrt(2.0));
    const double f0 = 1e3 * g0;
    const auto branches = branch_solutions(p, f0, 0.0);
    double x = 0.0;
    for (const auto& b : branches) x = std::max(x, b.x);
    CHECK((x - 1.0) / 2.0 == doctest::Approx(f0).epsilon(0.05));
  }
  SUBCASE("weak drive recovers the linear response") {
    const SystemParams p = resonant(0.6, 1.0, 0.8);
    const double f0 = 1e-4;
    const auto b = branch_solutions(p, f0, 0.3);
    REQUIRE(b.size() == 1);
    CHECK(b[0].x == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(b[0].b - linear_response(p, 20.3) * f0) < 1e-10);
  }
  SUBCASE("degenerate polynomials") {
    CHECK(real_cubic_roots(CubicCoeffs{0.0, 1.0, -3.0, 2.0}).size() == 2);
    CHECK(real_cubic_roots(CubicCoeffs{0.0, 0.0, 2.0, -1.0}).size() == 1);
    const auto r = real_cubic_roots(CubicCoeffs{1.0, -6.0, 11.0, -6.0});
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(1.0));
    CHECK(r[1] == doctest::Approx(2.0));
    CHECK(r[2] == doctest::Approx(3.0));
  }
}

TEST_CASE("modified threshold") {
  const SystemParams p = resonant(1.0 / std::sqrt(2.0), 1.0, 1.0);  // omega_c = gamma_0
  CHECK(modified_threshold(p) == doctest::Approx(0.75 * p.gamma0()).epsilon(1e-14));
  const SystemParams small = resonant(1e-4, 1.0, 1.0);
  CHECK(modified_threshold(small) / mean_field_threshold(small) == doctest::Approx(1.0).epsilon(1e-7));
  // Minimum over omega_c at gamma_0 / sqrt(2) with value gamma_0 / sqrt(2).
  const double g0 = p.gamma0();
  double best = 1e300, arg = 0.0;
  for (int i = 1; i < 20000; ++i) {
    const double wc = 2.0 * g0 * i / 20000.0;
    const double v = modified_threshold(resonant(wc, 1.0, 1.0));
    if (v < best) {
      best = v;
      arg = wc;
    }
  }
  CHECK(arg == doctest::Approx(g0 / std::sqrt(2.0)).epsilon(1e-3));
  CHECK(best == doctest::Approx(g0 / std::sqrt(2.0)).epsilon(1e-6));
}

TEST_CASE("bistability window") {
  const double g0 = 1.0 / std::sqrt(2.0);
  const SystemParams p = resonant(0.5 * g0, 1.0, 1.0);
  const double f0 = 3.0 * modified_threshold(p);
  bool window = false;
  for (int i = 0; i <= 600; ++i) {
    const double delta = -3.0 + 6.0 * i / 600.0;
    const auto b = branch_solutions(p, f0, delta);
    if (b.size() == 3) {
      window = true;
      CHECK(b[1].stability == Stability::Unstable);
      CHECK(b[0].stability == Stability::Stable);
    }
  }
  CHECK(window);
  // Splitting of the tilted peaks at lambda' = 5. Eliminating q, the peaks
  // sit where delta^2 ~ 2 omega_c^2 (1 + 2 n_a): each contributes
  // sqrt2 omega_c sqrt(1 + 2 n_a), which is 2 sqrt2 omega_c at n_a = 0.
  const double f5 = 5.0 * modified_threshold(p);
  double best_lo = 0.0, best_hi = 0.0, na_lo = 0.0, na_hi = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double delta = -4.0 + 8.0 * i / 4000.0;
    for (const auto& b : branch_solutions(p, f5, delta)) {
      if (delta < 0 && b.n_a > na_lo) {
        na_lo = b.n_a;
        best_lo = delta;
      }
      if (delta > 0 && b.n_a > na_hi) {
        na_hi = b.n_a;
        best_hi = delta;
      }
    }
  }
  const double expect = std::sqrt(2.0) * p.omega_c * (std::sqrt(1.0 + 2.0 * na_lo) + std::sqrt(1.0 + 2.0 * na_hi));
  CHECK(na_lo > 5.0);
  CHECK((best_hi - best_lo) == doctest::Approx(expect).epsilon(0.15));
}

TEST_CASE("parallel sweep equals the serial reference") {
  const SystemParams p = resonant(0.5, 1.0, 1.0);
  std::vector<double> omegas;
  for (int i = 0; i < 41; ++i) omegas.push_back(18.0 + 4.0 * i / 40.0);
  SweepOptions o;
  o.fock.n_cav = 4;
  o.fock.n_mech = 4;
  o.strategy = NullSpace{};
  o.workers = 4;
  const std::set<Tier> tiers = {Tier::Linear, Tier::CumulantBranches, Tier::MasterEquation};
  const SweepTable a = sweep(p, 0.6, omegas, tiers, o);
  const SweepTable b = sweep_serial(p, 0.6, omegas, tiers, o);
  REQUIRE(a.rows.size() == b.rows.size());
  CHECK(a.failures.empty());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].omega == b.rows[i].omega);
    CHECK(a.rows[i].tier == b.rows[i].tier);
    CHECK(a.rows[i].branch_index == b.rows[i].branch_index);
    CHECK(a.rows[i].b == b.rows[i].b);
    CHECK(a.rows[i].n_a == b.rows[i].n_a);
  }
  SUBCASE("uncoupled tiers collapse onto the bare Lorentzian") {
    const SystemParams bare = resonant(0.0, 1.0, 1.0);
    o.fock.n_cav = 1;
    o.fock.n_mech = 12;  // |b| <= 0.6: the coherent tail above 12 quanta is negligible
    const SweepTable t = sweep(bare, 0.3, omegas, tiers, o);
    for (const auto& r : t.rows) {
      const double dw = r.omega - 20.0;
      CHECK(r.abs_b2 == doctest::Approx(0.09 / (dw * dw + 0.25)).epsilon(r.tier == Tier::MasterEquation ? 1e-3 : 1e-10));
    }
  }
}
