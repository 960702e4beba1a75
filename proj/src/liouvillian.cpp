#include "dcebr/liouvillian.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace dcebr {

Liouvillian::Liouvillian(const SystemParams& p, const DriveParams& d, const FockConfig& config)
    : config_(config) {
  hamiltonian_ = build_hamiltonian(p, d, Frame::RotatingAtDrive, config);
  const LadderOps ops = make_ladder_ops(config);
  dissipators_.push_back({p.gamma_a, ops.a});
  dissipators_.push_back({p.gamma_b, ops.b});
  prepare();
}

Liouvillian::Liouvillian(SparseMatrix hamiltonian, std::vector<Dissipator> dissipators,
                         const FockConfig& config)
    : config_(config), hamiltonian_(std::move(hamiltonian)), dissipators_(std::move(dissipators)) {
  config_.validate();
  const auto dim = static_cast<Eigen::Index>(config_.dimension());
  if (hamiltonian_.rows() != dim || hamiltonian_.cols() != dim)
    throw std::invalid_argument("Hamiltonian dimension does not match FockConfig");
  for (const auto& d : dissipators_)
    if (d.op.rows() != dim || d.op.cols() != dim)
      throw std::invalid_argument("dissipator dimension does not match FockConfig");
  prepare();
}

void Liouvillian::prepare() {
  h_eff_ = hamiltonian_;
  for (const auto& d : dissipators_) {
    const SparseMatrix odo = d.op.adjoint() * d.op;
    h_eff_ -= Complex(0.0, 0.5 * d.rate) * odo;
  }
  h_eff_.makeCompressed();
  h_eff_rows_ = h_eff_;
  h_eff_rows_.makeCompressed();
  jump_rows_.clear();
  for (const auto& d : dissipators_) {
    RowSparseMatrix r = std::sqrt(d.rate) * d.op;
    r.makeCompressed();
    jump_rows_.push_back(std::move(r));
  }
}

namespace {

inline Complex element(const RowSparseMatrix& h, const std::vector<RowSparseMatrix>& jumps,
                       const DenseMatrix& rho, Eigen::Index i, Eigen::Index j) {
  const int* h_outer = h.outerIndexPtr();
  const int* h_inner = h.innerIndexPtr();
  const Complex* h_val = h.valuePtr();
  // -i H_eff rho
  Complex left{0.0, 0.0};
  for (int p = h_outer[i]; p < h_outer[i + 1]; ++p) left += h_val[p] * rho(h_inner[p], j);
  // +i rho H_eff^+
  Complex right{0.0, 0.0};
  for (int p = h_outer[j]; p < h_outer[j + 1]; ++p) right += rho(i, h_inner[p]) * std::conj(h_val[p]);
  Complex acc = Complex(0.0, -1.0) * left + Complex(0.0, 1.0) * right;
  // L rho L^+ with the rate folded into L
  for (const auto& jr : jumps) {
    const int* o_outer = jr.outerIndexPtr();
    const int* o_inner = jr.innerIndexPtr();
    const Complex* o_val = jr.valuePtr();
    for (int p = o_outer[i]; p < o_outer[i + 1]; ++p)
      for (int q = o_outer[j]; q < o_outer[j + 1]; ++q)
        acc += o_val[p] * rho(o_inner[p], o_inner[q]) * std::conj(o_val[q]);
  }
  return acc;
}

}  // namespace

void Liouvillian::apply(const DenseMatrix& rho, DenseMatrix& out) const {
  const auto n = static_cast<Eigen::Index>(dimension());
  if (rho.rows() != n || rho.cols() != n) throw std::invalid_argument("rho has the wrong dimension");
  out.resize(n, n);
#pragma omp parallel for schedule(static) if (n >= 32)
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = element(h_eff_rows_, jump_rows_, rho, i, j);
}

void Liouvillian::apply_hermitian(const DenseMatrix& rho, DenseMatrix& out) const {
  const auto n = static_cast<Eigen::Index>(dimension());
  if (rho.rows() != n || rho.cols() != n) throw std::invalid_argument("rho has the wrong dimension");
  out.resize(n, n);
#pragma omp parallel for schedule(dynamic, 4) if (n >= 32)
  for (Eigen::Index j = 0; j < n; ++j) {
    out(j, j) = Complex(element(h_eff_rows_, jump_rows_, rho, j, j).real(), 0.0);
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const Complex v = element(h_eff_rows_, jump_rows_, rho, i, j);
      out(i, j) = v;
      out(j, i) = std::conj(v);
    }
  }
}

DenseMatrix Liouvillian::operator()(const DenseMatrix& rho) const {
  DenseMatrix out;
  apply(rho, out);
  return out;
}

void Liouvillian::apply_reference(const DenseMatrix& rho, DenseMatrix& out) const {
  const SparseMatrix h_eff_dag = h_eff_.adjoint();
  DenseMatrix left = h_eff_ * rho;
  DenseMatrix right = rho * h_eff_dag;
  out = Complex(0.0, -1.0) * (left - right);
  for (const auto& d : dissipators_) {
    const SparseMatrix od = d.op.adjoint();
    DenseMatrix jump = d.op * rho;
    out += d.rate * (jump * od);
  }
}

SparseMatrix Liouvillian::superoperator() const {
  const auto n = static_cast<int>(dimension());
  SparseMatrix id(n, n);
  id.setIdentity();
  const SparseMatrix h_conj = h_eff_.conjugate();
  SparseMatrix sup = Complex(0.0, -1.0) * kron(id, h_eff_) + Complex(0.0, 1.0) * kron(h_conj, id);
  for (const auto& d : dissipators_) {
    const SparseMatrix oc = d.op.conjugate();
    sup += d.rate * kron(oc, d.op);
  }
  sup.makeCompressed();
  return sup;
}

Liouvillian build_liouvillian(const SystemParams& p, const DriveParams& d, const FockConfig& config) {
  return Liouvillian(p, d, config);
}

}  // namespace dcebr
