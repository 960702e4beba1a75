#pragma once

#include <vector>

#include "dcebr/operators.hpp"
#include "dcebr/params.hpp"

namespace dcebr {

/// One Lindblad channel (rate/2)(2 o rho o^+ - o^+o rho - rho o^+o).
struct Dissipator {
  double rate = 0.0;
  SparseMatrix op;
};

/// Lindblad generator rho -> -i[H, rho] + sum_o D_o[rho].
///
/// Two kernels compute the same action: `apply` is the OpenMP element kernel
/// used by the solvers, `apply_reference` is a plain serial sparse-dense
/// evaluation kept as the test oracle. `superoperator` materializes the
/// column-major vectorized form for the null-space solver and for
/// matrix-exponential checks.
class Liouvillian {
 public:
  /// Frame rotating at d.omega; d.omega = 0 with f0 = 0 coincides with the
  /// lab frame.
  Liouvillian(const SystemParams& p, const DriveParams& d, const FockConfig& config);

  Liouvillian(SparseMatrix hamiltonian, std::vector<Dissipator> dissipators, const FockConfig& config);

  void apply(const DenseMatrix& rho, DenseMatrix& out) const;
  DenseMatrix operator()(const DenseMatrix& rho) const;

  /// Same action for Hermitian rho: only the lower triangle is evaluated and
  /// mirrored, so the result is exactly Hermitian with a real diagonal.
  void apply_hermitian(const DenseMatrix& rho, DenseMatrix& out) const;

  void apply_reference(const DenseMatrix& rho, DenseMatrix& out) const;

  SparseMatrix superoperator() const;

  const FockConfig& config() const { return config_; }
  std::size_t dimension() const { return config_.dimension(); }
  const SparseMatrix& hamiltonian() const { return hamiltonian_; }
  const std::vector<Dissipator>& dissipators() const { return dissipators_; }

 private:
  void prepare();

  FockConfig config_;
  SparseMatrix hamiltonian_;
  std::vector<Dissipator> dissipators_;

  // H_eff = H - (i/2) sum rate o^+ o, row-major for the element kernel.
  SparseMatrix h_eff_;
  RowSparseMatrix h_eff_rows_;
  std::vector<RowSparseMatrix> jump_rows_;
};

/// Master-equation generator in the frame rotating at the drive.
Liouvillian build_liouvillian(const SystemParams& p, const DriveParams& d, const FockConfig& config);

}  // namespace dcebr
