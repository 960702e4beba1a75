#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "dcebr/params.hpp"

namespace dcebr {

using Complex = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using SparseMatrix = Eigen::SparseMatrix<Complex>;
using RowSparseMatrix = Eigen::SparseMatrix<Complex, Eigen::RowMajor>;

inline constexpr Complex kI{0.0, 1.0};

/// Ladder operators on the truncated cavity (x) mechanics space.
struct LadderOps {
  SparseMatrix a, a_dag, b, b_dag;
};

/// a|n> = sqrt(n)|n-1> on the cavity factor, identity on the mechanics, and
/// likewise for b. Throws DimensionError above the ceiling.
LadderOps make_ladder_ops(const FockConfig& config);

/// System Hamiltonian with hbar = 1.
///
/// Lab frame: omega_a a^+a + omega_b b^+b + omega_c (b^+ a^2 + b a^+^2); only
/// allowed without drive.
///
/// Rotating frame at the drive frequency:
///   -D_a a^+a - D_b b^+b + omega_c (b^+ a^2 + b a^+^2) - f0 (b + b^+).
SparseMatrix build_hamiltonian(const SystemParams& p, const DriveParams& d, Frame frame,
                               const FockConfig& config);

/// Kronecker product A (x) B; row index = i_A * rows(B) + i_B.
SparseMatrix kron(const SparseMatrix& A, const SparseMatrix& B);

/// Amplitudes of a coherent state truncated to n_max and renormalized.
Eigen::VectorXcd coherent_amplitudes(Complex alpha, int n_max);

}  // namespace dcebr
