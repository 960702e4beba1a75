#include "doctest.h"

#include <random>

#include "dcebr/semiclassical.hpp"
#include "dcebr/steady.hpp"
#include "oracles.hpp"

using namespace dcebr;
using cd = std::complex<double>;

namespace {

std::vector<double> grid(double t_max, int n) {
  std::vector<double> t(n);
  for (int i = 0; i < n; ++i) t[i] = t_max * i / (n - 1);
  return t;
}

SystemParams resonant(double omega_c, double ga, double gb) { return {10.0, 20.0, omega_c, ga, gb}; }

}  // namespace

TEST_CASE("jacobians match finite differences") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 10; ++k) {
    const SystemParams p{3.0, 6.1, 0.3 + std::abs(u(rng)), 1.0 + 0.5 * u(rng), 0.8 + 0.5 * u(rng)};
    const DriveParams d{std::abs(u(rng)), 6.0 + 0.2 * u(rng)};
    const SemiState s{cd(u(rng), u(rng)), cd(u(rng), u(rng)), std::abs(u(rng))};
    const SemiJacobian J = cumulant_jacobian(s, p, d);
    const SemiVector v = pack(s);
    for (int j = 0; j < 5; ++j) {
      SemiVector vp = v, vm = v;
      vp(j) += 1e-6;
      vm(j) -= 1e-6;
      const SemiVector col = (pack(cumulant_rhs(unpack(vp), p, d)) - pack(cumulant_rhs(unpack(vm), p, d))) / 2e-6;
      CHECK((col - J.col(j)).cwiseAbs().maxCoeff() < 1e-7);
    }
    const MeanFieldState m{cd(u(rng), u(rng)), cd(u(rng), u(rng))};
    const MeanFieldJacobian K = mean_field_jacobian(m, p, d);
    const MeanFieldVector w = pack(m);
    for (int j = 0; j < 4; ++j) {
      MeanFieldVector wp = w, wm = w;
      wp(j) += 1e-6;
      wm(j) -= 1e-6;
      const MeanFieldVector col =
          (pack(mean_field_rhs(unpack_mean_field(wp), p, d)) - pack(mean_field_rhs(unpack_mean_field(wm), p, d))) / 2e-6;
      CHECK((col - K.col(j)).cwiseAbs().maxCoeff() < 1e-7);
    }
  }
}

TEST_CASE("cumulant equations against the restated oracle") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const SystemParams p{3.0, 6.1, std::abs(u(rng)), 1.0 + 0.5 * u(rng), 0.8 + 0.5 * u(rng)};
    const DriveParams d{std::abs(u(rng)), 6.0 + 0.2 * u(rng)};
    const SemiState s{cd(u(rng), u(rng)), cd(u(rng), u(rng)), std::abs(u(rng))};
    const SemiState r = cumulant_rhs(s, p, d);
    const oracle::Fields o = oracle::cumulant_rhs({s.b, s.q, s.n_a}, p, d.f0, d.omega);
    CHECK(std::abs(r.b - o.b) < 1e-14);
    CHECK(std::abs(r.q - o.q) < 1e-14);
    CHECK(std::abs(r.n_a - o.n_a) < 1e-14);
  }
  SUBCASE("photon decay") {
    const SystemParams p = resonant(0.4, 1.3, 1.0);
    const SemiState r = cumulant_rhs(SemiState{0.0, 0.0, 2.0}, p, DriveParams{0.0, 20.0});
    CHECK(r.n_a == doctest::Approx(-2.6));
  }
  SUBCASE("linearization error is second order") {
    const SystemParams p = resonant(0.7, 1.0, 0.5);
    const DriveParams d{0.0, 20.0};
    const SemiState s{cd(0.3, -0.2), cd(0.1, 0.4), 0.2};
    double prev = 0.0;
    for (double lam : {1e-1, 1e-2}) {
      const SemiState sl{lam * s.b, lam * s.q, lam * s.n_a};
      const SemiState a = cumulant_rhs(sl, p, d), b = linear_rhs(sl, p, d);
      const double diff = std::abs(a.b - b.b) + std::abs(a.q - b.q) + std::abs(a.n_a - b.n_a);
      if (prev > 0.0) CHECK(diff < 0.02 * prev);
      prev = diff;
    }
  }
}

TEST_CASE("mean-field thresholds and fixed points") {
  const SystemParams p = resonant(0.5, 1.0, 1.0);
  CHECK(mean_field_threshold(p) == doctest::Approx(0.25).epsilon(1e-15));
  const double f_th = mean_field_threshold(p);
  CHECK(f_th == doctest::Approx(p.gamma0_sq() / (4.0 * p.omega_c)).epsilon(1e-14));

  const DriveParams below{0.2, 20.0};
  const MeanFieldState t = mean_field_trivial_point(p, below);
  CHECK(std::abs(t.a) == 0.0);
  CHECK(std::abs(t.b - cd(0.0, 2.0 * 0.2 / p.gamma_b)) < 1e-14);
  const MeanFieldState r = mean_field_rhs(t, p, below);
  CHECK(std::abs(r.a) + std::abs(r.b) < 1e-12);

  const double f0 = 0.6;
  const DriveParams above{f0, 20.0};
  for (double sign : {1.0, -1.0}) {
    // Above threshold: |a|^2 = (F0 - F0^th)/omega_c, b = i gamma_a/(4 omega_c),
    // with a real at resonance.
    const MeanFieldState guess{sign * std::sqrt((f0 - f_th) / p.omega_c),
                               cd(0.0, p.gamma_a / (4.0 * p.omega_c))};
    const MeanFieldState g = mean_field_rhs(guess, p, above);
    CHECK(std::abs(g.a) + std::abs(g.b) < 1e-12);
  }
  CHECK(mean_field_growth_rate(p, DriveParams{0.2, 20.0}) < 0.0);
  CHECK(mean_field_growth_rate(p, DriveParams{0.3, 20.0}) > 0.0);
  CHECK(mean_field_instability_onset(p, 20.0) == doctest::Approx(0.25).epsilon(1e-9));

  const MeanFieldState vac = mean_field_rhs(MeanFieldState{}, p, DriveParams{0.0, 20.0});
  CHECK(std::abs(vac.a) + std::abs(vac.b) == 0.0);
  CHECK_THROWS(mean_field_threshold(resonant(0.0, 1.0, 1.0)));
}

TEST_CASE("ring-down rates") {
  const double g = 1.0, g0 = g / std::sqrt(2.0);
  CHECK(ringdown_rates(resonant(0.24 * g0, g, g)).regime == Regime::OverDamped);
  CHECK(ringdown_rates(resonant(0.26 * g0, g, g)).regime == Regime::UnderDamped);
  CHECK(ringdown_rates(resonant(g / (4.0 * std::sqrt(2.0)), g, g)).regime == Regime::Critical);
  const RingdownRates r = ringdown_rates(resonant(2.0, 1.0, 0.4));
  const double delta = 1.0 - 0.2;
  CHECK(std::abs(r.omega_d * r.omega_d + delta * delta / 4.0 - 8.0) < 1e-12);
  CHECK(r.gamma_1 == doctest::Approx(1.2));
  const RingdownRates big = ringdown_rates(resonant(100.0, 1.0, 1.0));
  CHECK(big.omega_d.real() / (std::sqrt(2.0) * 100.0) == doctest::Approx(1.0).epsilon(1e-5));
  const RingdownRates zero = ringdown_rates(resonant(0.0, 1.0, 0.4));
  CHECK(std::abs(zero.omega_d - cd(0.0, 0.4)) < 1e-15);
}

TEST_CASE("analytic ring-down") {
  SUBCASE("initial condition and decoupled limit") {
    const SystemParams p = resonant(0.0, 1.0, 0.4);
    const RingdownPoint z = analytic_ringdown(cd(2.0, 0.5), p, 0.0);
    CHECK(std::abs(z.b - cd(2.0, 0.5)) < 1e-15);
    CHECK(std::abs(z.q) == 0.0);
    const RingdownPoint r = analytic_ringdown(2.0, p, 1.7);
    CHECK(std::abs(r.b - 2.0 * std::exp(cd(-0.2 * 1.7, -20.0 * 1.7))) < 1e-14);
    CHECK(std::abs(r.q) < 1e-15);
  }
  SUBCASE("all regimes against the matrix exponential") {
    for (double ratio : {0.1, 0.25, 0.5, 5.0}) {
      const SystemParams p = resonant(ratio / std::sqrt(2.0), 1.0, 1.0);
      for (double t : {0.0, 0.3, 1.1, 4.0}) {
        const auto [b, q] = oracle::linear_ringdown(p, 2.0, t);
        const RingdownPoint a = analytic_ringdown(2.0, p, t, Frame::RotatingAtDrive);
        CHECK(std::abs(a.b - b) < 1e-10);
        CHECK(std::abs(a.q - q) < 1e-10);
      }
    }
  }
  SUBCASE("equal rates, omega_c / gamma_0 = 5, against linear integration") {
    const SystemParams p = resonant(5.0 / std::sqrt(2.0), 1.0, 1.0);
    const auto t = grid(10.0 / p.gamma1(), 201);
    const SemiTrajectory tr = integrate(Model::Linear, SemiState{2.0, 0.0, 0.0}, p, DriveParams{0.0, 20.0}, t, 1e-12);
    double sup = 0.0, err = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const RingdownPoint a = analytic_ringdown(2.0, p, t[i], Frame::RotatingAtDrive);
      sup = std::max(sup, std::abs(a.b));
      err = std::max({err, std::abs(a.b - tr.states[i].b), std::abs(a.q - tr.states[i].q)});
    }
    CHECK(err / sup < 1e-8);
  }
  CHECK_THROWS(analytic_ringdown(1.0, SystemParams{1.0, 2.5, 0.1, 1.0, 1.0}, 1.0));
}

TEST_CASE("semiclassical integration") {
  SUBCASE("back-reaction speeds up the decay") {
    const SystemParams p = resonant(0.5 / std::sqrt(2.0), 1.0, 1.0);
    const auto t = grid(5.0, 51);
    const SemiTrajectory tr = integrate(Model::Cumulant, SemiState{2.0, 0.0, 0.0}, p, DriveParams{0.0, 20.0}, t);
    for (std::size_t i = 1; i < t.size(); ++i)
      CHECK(std::norm(tr.states[i].b) < 4.0 * std::exp(-p.gamma_b * t[i]));
    CHECK(tr.min_raw_n_a > kNaUndershoot);
  }
  SUBCASE("energy exchange period") {
    const SystemParams p = resonant(10.0 / std::sqrt(2.0), 1.0, 1.0);
    const auto t = grid(3.0, 3001);
    const SemiTrajectory tr = integrate(Model::Linear, SemiState{2.0, 0.0, 0.0}, p, DriveParams{0.0, 20.0}, t, 1e-10);
    std::vector<double> maxima;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
      const double a = std::norm(tr.states[i - 1].b), b = std::norm(tr.states[i].b), c = std::norm(tr.states[i + 1].b);
      if (b > a && b >= c) maxima.push_back(t[i]);
    }
    REQUIRE(maxima.size() >= 2);
    const double wd = ringdown_rates(p).omega_d.real();
    CHECK((maxima[1] - maxima[0]) == doctest::Approx(std::numbers::pi / wd).epsilon(0.1));
  }
  SUBCASE("mean field keeps a = 0 without a seed") {
    const SystemParams p = resonant(2.0, 1.0, 1.0);
    const auto t = grid(4.0, 41);
    const SemiTrajectory tr = integrate(MeanFieldState{0.0, 2.0}, p, DriveParams{0.0, 20.0}, t);
    for (const auto& s : tr.mean_field) CHECK(std::abs(s.a) == 0.0);
  }
  SUBCASE("linear model superposition") {
    const SystemParams p = resonant(0.8, 1.0, 0.6);
    const auto t = grid(3.0, 31);
    const DriveParams d1{0.3, 20.2}, d2{0.5, 20.2}, d12{0.8, 20.2};
    const auto a = integrate(Model::Linear, SemiState{cd(1.0, 0.2), cd(0.1, 0.0), 0.0}, p, d1, t, 1e-12);
    const auto b = integrate(Model::Linear, SemiState{cd(-0.4, 0.7), cd(0.0, 0.3), 0.0}, p, d2, t, 1e-12);
    const auto c = integrate(Model::Linear, SemiState{cd(0.6, 0.9), cd(0.1, 0.3), 0.0}, p, d12, t, 1e-12);
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(std::abs(a.states[i].b + b.states[i].b - c.states[i].b) < 1e-10);
      CHECK(std::abs(a.states[i].q + b.states[i].q - c.states[i].q) < 1e-10);
    }
  }
}
