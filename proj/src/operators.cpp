#include "dcebr/operators.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace dcebr {

namespace {

SparseMatrix single_mode_annihilation(std::size_t dim) {
  std::vector<Eigen::Triplet<Complex>> t;
  for (std::size_t n = 1; n < dim; ++n)
    t.emplace_back(static_cast<int>(n - 1), static_cast<int>(n), std::sqrt(static_cast<double>(n)));
  SparseMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix identity(std::size_t dim) {
  SparseMatrix m(static_cast<int>(dim), static_cast<int>(dim));
  m.setIdentity();
  return m;
}

}  // namespace

SparseMatrix kron(const SparseMatrix& A, const SparseMatrix& B) {
  std::vector<Eigen::Triplet<Complex>> t;
  t.reserve(static_cast<std::size_t>(A.nonZeros() * B.nonZeros()));
  for (int ka = 0; ka < A.outerSize(); ++ka)
    for (SparseMatrix::InnerIterator ia(A, ka); ia; ++ia)
      for (int kb = 0; kb < B.outerSize(); ++kb)
        for (SparseMatrix::InnerIterator ib(B, kb); ib; ++ib)
          t.emplace_back(static_cast<int>(ia.row() * B.rows() + ib.row()),
                         static_cast<int>(ia.col() * B.cols() + ib.col()), ia.value() * ib.value());
  SparseMatrix m(A.rows() * B.rows(), A.cols() * B.cols());
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

LadderOps make_ladder_ops(const FockConfig& config) {
  config.validate();
  const SparseMatrix ac = single_mode_annihilation(config.cav_dim());
  const SparseMatrix bm = single_mode_annihilation(config.mech_dim());
  LadderOps ops;
  ops.a = kron(ac, identity(config.mech_dim()));
  ops.b = kron(identity(config.cav_dim()), bm);
  ops.a_dag = ops.a.adjoint();
  ops.b_dag = ops.b.adjoint();
  return ops;
}

SparseMatrix build_hamiltonian(const SystemParams& p, const DriveParams& d, Frame frame,
                               const FockConfig& config) {
  p.validate();
  d.validate();
  const LadderOps ops = make_ladder_ops(config);

  double wa = 0.0;
  double wb = 0.0;
  if (frame == Frame::Lab) {
    if (d.f0 > 0.0)
      throw std::invalid_argument("lab-frame Hamiltonian is time dependent when f0 > 0");
    wa = p.omega_a;
    wb = p.omega_b;
  } else {
    const Detunings det = detunings(p, d);
    wa = -det.a;
    wb = -det.b;
  }

  const SparseMatrix na = ops.a_dag * ops.a;
  const SparseMatrix nb = ops.b_dag * ops.b;
  const SparseMatrix pair = ops.b_dag * (ops.a * ops.a);
  SparseMatrix h = wa * na + wb * nb;
  if (p.omega_c != 0.0) h += p.omega_c * (pair + SparseMatrix(pair.adjoint()));
  if (frame == Frame::RotatingAtDrive && d.f0 != 0.0) h -= d.f0 * (ops.b + ops.b_dag);
  h.prune(Complex(0.0, 0.0));
  return h;
}

Eigen::VectorXcd coherent_amplitudes(Complex alpha, int n_max) {
  if (n_max < 0) throw std::invalid_argument("n_max must be >= 0");
  Eigen::VectorXcd c(n_max + 1);
  c(0) = 1.0;
  for (int n = 1; n <= n_max; ++n) c(n) = c(n - 1) * alpha / std::sqrt(static_cast<double>(n));
  c /= c.norm();
  return c;
}

}  // namespace dcebr
