#include "doctest.h"

#include <random>

#include "dcebr/errors.hpp"
#include "dcebr/liouvillian.hpp"
#include "dcebr/operators.hpp"
#include "dcebr/quantum.hpp"
#include "oracles.hpp"

using namespace dcebr;

namespace {

SystemParams random_params(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.2, 2.0);
  SystemParams p;
  p.omega_a = 5.0 * u(rng);
  p.omega_b = 2.0 * p.omega_a + 0.3 * (u(rng) - 1.0);
  p.omega_c = 0.5 * u(rng);
  p.gamma_a = u(rng);
  p.gamma_b = u(rng);
  return p;
}

DenseMatrix random_density(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  DenseMatrix rho = m * m.adjoint();
  return rho / rho.trace();
}

double max_abs(const DenseMatrix& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("parameter validation") {
  SystemParams p{1.0, 2.0, 0.05, 1.0, 1.0};
  CHECK_NOTHROW(p.validate());
  CHECK(p.weak_coupling());
  CHECK(p.resonant());
  p.omega_c = 0.0;
  CHECK_NOTHROW(p.validate());
  p.gamma_b = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p.gamma_b = 1.0;
  p.omega_c = -0.1;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  SystemParams w{1.0, 2.0, 0.15, 1.0, 1.0};
  CHECK_FALSE(w.weak_coupling());
  CHECK(w.gamma0() == doctest::Approx(std::sqrt(0.5)).epsilon(1e-15));
  CHECK(w.gamma1() == doctest::Approx(1.5).epsilon(1e-15));

  DriveParams d{-1.0, 1.0};
  CHECK_THROWS_AS(d.validate(), std::invalid_argument);

  FockConfig f;
  f.n_cav = 0;
  CHECK_THROWS_AS(f.validate(), std::invalid_argument);
  f.n_cav = 100;
  f.n_mech = 100;
  CHECK_THROWS_AS(f.validate(), DimensionError);
  f.ceiling = 20000;
  CHECK_NOTHROW(f.validate());
}

TEST_CASE("ladder operators") {
  SUBCASE("two-level cavity") {
    FockConfig f;
    f.n_cav = 1;
    f.n_mech = 0;
    const auto ops = make_ladder_ops(f);
    const DenseMatrix a = DenseMatrix(ops.a);
    REQUIRE(a.rows() == 2);
    CHECK(a(0, 1) == Complex(1.0, 0.0));
    CHECK(a(0, 0) == Complex(0.0, 0.0));
    CHECK(a(1, 0) == Complex(0.0, 0.0));
    CHECK(a(1, 1) == Complex(0.0, 0.0));
  }
  SUBCASE("number operator and commutator") {
    FockConfig f;
    f.n_cav = 3;
    f.n_mech = 2;
    const auto ops = make_ladder_ops(f);
    const DenseMatrix na = DenseMatrix(ops.a_dag * ops.a);
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; j <= 2; ++j) CHECK(na(f.index(i, j), f.index(i, j)).real() == doctest::Approx(i).epsilon(1e-15));
    const DenseMatrix comm = DenseMatrix(ops.a * ops.a_dag - ops.a_dag * ops.a);
    for (int i = 0; i <= 3; ++i)
      for (int j = 0; j <= 2; ++j) {
        const auto k = f.index(i, j);
        CHECK(comm(k, k).real() == doctest::Approx(i < 3 ? 1.0 : -3.0));
      }
    const DenseMatrix cb = DenseMatrix(ops.b * ops.b_dag - ops.b_dag * ops.b);
    CHECK(cb(f.index(1, 0), f.index(1, 0)).real() == doctest::Approx(1.0));
    CHECK(cb(f.index(1, 2), f.index(1, 2)).real() == doctest::Approx(-2.0));
    CHECK(max_abs(DenseMatrix(ops.a * ops.b - ops.b * ops.a)) < 1e-15);
  }
}

TEST_CASE("hamiltonian") {
  FockConfig f;
  f.n_cav = 4;
  f.n_mech = 3;
  SUBCASE("uncoupled lab frame is diagonal") {
    const SystemParams p{1.3, 2.1, 0.0, 1.0, 1.0};
    const DenseMatrix H = DenseMatrix(build_hamiltonian(p, {}, Frame::Lab, f));
    const auto ops = make_ladder_ops(f);
    for (int i = 0; i <= 4; ++i)
      for (int j = 0; j <= 3; ++j)
        CHECK(H(f.index(i, j), f.index(i, j)).real() == doctest::Approx(1.3 * i + 2.1 * j));
    DenseMatrix off = H;
    off.diagonal().setZero();
    CHECK(max_abs(off) == 0.0);
    CHECK(max_abs(H * DenseMatrix(ops.a_dag * ops.a) - DenseMatrix(ops.a_dag * ops.a) * H) < 1e-12);
    CHECK(max_abs(H * DenseMatrix(ops.b_dag * ops.b) - DenseMatrix(ops.b_dag * ops.b) * H) < 1e-12);
  }
  SUBCASE("pair-creation element") {
    const SystemParams p{1.0, 2.0, 0.37, 1.0, 1.0};
    const DenseMatrix H = DenseMatrix(build_hamiltonian(p, {}, Frame::Lab, f));
    CHECK(H(f.index(0, 1), f.index(2, 0)).real() == doctest::Approx(0.37 * std::sqrt(2.0)).epsilon(1e-14));
    CHECK(H(f.index(2, 0), f.index(0, 1)).real() == doctest::Approx(0.37 * std::sqrt(2.0)).epsilon(1e-14));
  }
  SUBCASE("hermitian for random parameters") {
    std::mt19937_64 rng(7);
    for (int k = 0; k < 10; ++k) {
      const SystemParams p = random_params(rng);
      const DriveParams d{0.7, p.omega_b + 0.1};
      const DenseMatrix H = DenseMatrix(build_hamiltonian(p, d, Frame::RotatingAtDrive, f));
      CHECK(max_abs(H - H.adjoint()) < 1e-14);
    }
  }
  SUBCASE("drive needs the rotating frame") {
    const SystemParams p{1.0, 2.0, 0.1, 1.0, 1.0};
    CHECK_THROWS(build_hamiltonian(p, DriveParams{1.0, 2.0}, Frame::Lab, f));
  }
}

TEST_CASE("liouvillian kernels agree with the explicit Lindblad sum") {
  std::mt19937_64 rng(11);
  FockConfig f;
  f.n_cav = 4;
  f.n_mech = 3;
  for (int k = 0; k < 5; ++k) {
    const SystemParams p = random_params(rng);
    const DriveParams d{0.4, p.omega_b - 0.2};
    const Liouvillian L(p, d, f);
    const auto ops = make_ladder_ops(f);
    const DenseMatrix H = DenseMatrix(build_hamiltonian(p, d, Frame::RotatingAtDrive, f));
    const std::vector<std::pair<double, Eigen::MatrixXcd>> jumps = {{p.gamma_a, DenseMatrix(ops.a)},
                                                                    {p.gamma_b, DenseMatrix(ops.b)}};
    const DenseMatrix rho = random_density(f.dimension(), rng);
    const DenseMatrix ref = oracle::lindblad(H, jumps, rho);

    DenseMatrix out, out_h, out_r;
    L.apply(rho, out);
    L.apply_hermitian(rho, out_h);
    L.apply_reference(rho, out_r);
    CHECK(max_abs(out - ref) < 1e-12);
    CHECK(max_abs(out_h - ref) < 1e-12);
    CHECK(max_abs(out_r - ref) < 1e-12);

    const SparseMatrix sup = L.superoperator();
    const Eigen::VectorXcd v = sup * Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
    CHECK(max_abs(Eigen::Map<const DenseMatrix>(v.data(), rho.rows(), rho.cols()) - ref) < 1e-12);

    // Hermiticity and trace annihilation.
    CHECK(max_abs(out - out.adjoint()) < 1e-12);
    CHECK(max_abs(out_h - out_h.adjoint()) == 0.0);
    CHECK(std::abs(out.trace()) < 1e-12);
  }
}

TEST_CASE("liouvillian physics") {
  SUBCASE("single photon decays at gamma_a") {
    FockConfig f;
    f.n_cav = 3;
    f.n_mech = 1;
    const auto ops = make_ladder_ops(f);
    const SparseMatrix H(static_cast<Eigen::Index>(f.dimension()), static_cast<Eigen::Index>(f.dimension()));
    const Liouvillian L(H, {{0.8, ops.a}}, f);
    DenseMatrix rho = DenseMatrix::Zero(f.dimension(), f.dimension());
    rho(f.index(1, 0), f.index(1, 0)) = 1.0;
    const DenseMatrix dr = L(rho);
    const Complex dn = (DenseMatrix(ops.a_dag * ops.a) * dr).trace();
    CHECK(dn.real() == doctest::Approx(-0.8).epsilon(1e-14));
  }
  SUBCASE("expectation flow of b") {
    std::mt19937_64 rng(5);
    FockConfig f;
    f.n_cav = 5;
    f.n_mech = 4;
    const SystemParams p = random_params(rng);
    const DriveParams d{0.6, p.omega_b + 0.25};
    const Liouvillian L(p, d, f);
    const auto ops = make_ladder_ops(f);
    // Support away from both cutoffs, where the truncated algebra is exact.
    DenseMatrix rho = random_density(f.dimension(), rng);
    for (int i = 0; i <= f.n_cav; ++i)
      for (int m = 0; m <= f.n_mech; ++m)
        if (i > f.n_cav - 2 || m > f.n_mech - 1) {
          rho.row(static_cast<Eigen::Index>(f.index(i, m))).setZero();
          rho.col(static_cast<Eigen::Index>(f.index(i, m))).setZero();
        }
    rho /= rho.trace();
    const Detunings det = detunings(p, d);
    const Complex lhs = (DenseMatrix(ops.b) * L(rho)).trace();
    const Complex b = (DenseMatrix(ops.b) * rho).trace();
    const Complex q = (DenseMatrix(ops.a * ops.a) * rho).trace();
    const Complex rhs = -(p.gamma_b / 2.0 - kI * det.b) * b - kI * p.omega_c * q + kI * d.f0;
    CHECK(std::abs(lhs - rhs) < 1e-12);
  }
  SUBCASE("odd moments stay zero") {
    FockConfig f;
    f.n_cav = 5;
    f.n_mech = 3;
    std::mt19937_64 rng(3);
    const SystemParams p = random_params(rng);
    const Liouvillian L(p, DriveParams{0.5, p.omega_b}, f);
    DenseMatrix rho = random_density(f.dimension(), rng);
    // Project on the even cavity-parity sector.
    for (int i = 0; i <= f.n_cav; ++i)
      for (int j = 0; j <= f.n_cav; ++j)
        if ((i + j) % 2)
          for (int m = 0; m <= f.n_mech; ++m)
            for (int n = 0; n <= f.n_mech; ++n) rho(f.index(i, m), f.index(j, n)) = 0.0;
    rho /= rho.trace();
    const auto ops = make_ladder_ops(f);
    const DenseMatrix dr = L(rho);
    CHECK(std::abs((DenseMatrix(ops.a) * dr).trace()) < 1e-12);
    CHECK(std::abs((DenseMatrix(ops.a_dag * ops.b) * dr).trace()) < 1e-12);
  }
}
