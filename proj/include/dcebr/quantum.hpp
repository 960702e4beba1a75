#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dcebr/liouvillian.hpp"
#include "dcebr/operators.hpp"
#include "dcebr/params.hpp"

namespace dcebr {

/// Invariant thresholds for density matrices.
inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPositivityTol = -1e-10;

struct StateDiagnostics {
  double hermiticity_error = 0.0;  ///< max |rho - rho^+|
  double trace_error = 0.0;        ///< |Tr rho - 1|
  double min_eigenvalue = 0.0;

  bool valid(double trace_tol = kTraceTol) const {
    return hermiticity_error < kHermiticityTol && trace_error < trace_tol &&
           min_eigenvalue > kPositivityTol;
  }
};

/// Density matrix on the truncated cavity (x) mechanics space.
struct QuantumState {
  DenseMatrix rho;
  FockConfig config;
  Frame frame = Frame::RotatingAtDrive;

  /// |0_a, 0_b><0_a, 0_b|
  static QuantumState vacuum(const FockConfig& config, Frame frame = Frame::RotatingAtDrive);
  /// Product of truncated coherent states |alpha>_a (x) |beta>_b.
  static QuantumState coherent(const FockConfig& config, Complex alpha, Complex beta,
                               Frame frame = Frame::RotatingAtDrive);

  /// Hermiticity, trace and smallest eigenvalue. The eigenvalue solve is
  /// skipped (reported as 0) when with_eigenvalues is false.
  StateDiagnostics diagnostics(bool with_eigenvalues = true) const;
};

struct Observables {
  double n_a = 0.0;
  double n_b = 0.0;
  Complex b_amp{};      ///< <b>
  Complex q_amp{};      ///< <a^2>
  Complex a_amp{};      ///< <a>
  Complex corr_nab{};   ///< <a^+a b>
  Complex corr_qdagb{}; ///< <a^+^2 b>
};

/// Denominators below this magnitude leave normalized cumulants undefined.
inline constexpr double kCumulantFloor = 1e-12;

/// <n_a b>/(n_a b) - 1, or nullopt when |n_a b| < 1e-12.
std::optional<Complex> normalized_cumulant_nab(const Observables& o);
/// <a^+^2 b>/(q^* b) - 1, or nullopt when |q^* b| < 1e-12.
std::optional<Complex> normalized_cumulant_qdagb(const Observables& o);

/// Expectation values against the truncation of the state.
Observables measure(const QuantumState& state);

/// Same, reusing ladder operators built for the state's config.
Observables measure(const QuantumState& state, const LadderOps& ops);

struct Trajectory {
  std::vector<double> times;
  std::vector<Observables> records;
  QuantumState final_state;

  double max_trace_drift = 0.0;
  double max_hermiticity_error = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t steps = 0;
};

struct EvolveOptions {
  /// Output times at which positivity is checked: every k-th sample (k >= 1),
  /// always including the final one.
  std::size_t positivity_stride = 1;
};

/// Adaptive Dormand-Prince integration of d rho/dt = L rho. `times` must
/// start at 0 and be strictly increasing. Throws NumericalError on step
/// underflow or when an invariant is violated by more than 100 tol (trace)
/// or the fixed Hermiticity / positivity thresholds.
Trajectory evolve(const Liouvillian& L, const QuantumState& rho0, std::span<const double> times,
                  double tol = 1e-9, const EvolveOptions& options = {});

struct LongTimeEvolution {
  double t_max = 0.0;        ///< 0 selects 50 / min(gamma) from the generator's rates
  double settle_tol = 1e-9;  ///< ||L rho||_max threshold
  double integrator_tol = 1e-11;
};

struct NullSpace {
  enum class Solver { Auto, Direct, Krylov };
  double settle_tol = 1e-9;
  /// Auto: sparse LU up to 48 states, restarted GMRES with an incomplete-LU
  /// preconditioner above (a tighter preconditioner is tried on stagnation).
  Solver solver = Solver::Auto;
};

using SteadyStrategy = std::variant<LongTimeEvolution, NullSpace>;

inline constexpr std::size_t kNullSpaceMaxDimension = 1024;

/// Stationary state of L. LongTimeEvolution starts from the vacuum and
/// integrates until ||L rho||_max < settle_tol; NullSpace solves the
/// vectorized generator with the trace row replacing one balance equation
/// (dimension <= 1024). When the generator does not mix the cavity-parity
/// sectors of rho, only the even sector is solved.
/// Throws NumericalError on non-convergence or a degenerate null space.
QuantumState steady_state(const Liouvillian& L, const SteadyStrategy& strategy = LongTimeEvolution{});

/// max |(L rho)_{ij}|
double residual_norm(const Liouvillian& L, const DenseMatrix& rho);

struct ConvergenceStep {
  FockConfig from;
  FockConfig to;
  double change_n_a = 0.0;
  double change_n_b = 0.0;
  double change_b = 0.0;
  double change_q = 0.0;
  double max_change() const;
};

struct ConvergenceReport {
  std::vector<FockConfig> configs;
  std::vector<ConvergenceStep> steps;
  double threshold = 1e-3;
  bool passes = false;
  std::string mode;  ///< "steady" or "ringdown"
};

struct ConvergenceOptions {
  double b0 = 2.0;        ///< ring-down initial mirror amplitude (f0 = 0)
  double t_max = 0.0;     ///< ring-down window; 0 selects 8 / gamma_1
  std::size_t samples = 81;
  double tol = 1e-9;
  double threshold = 1e-3;
};

/// Relative change of the observables between successive cutoffs: base,
/// then each ladder entry (which must increase strictly in both cutoffs or
/// in at least one without decreasing the other). With f0 > 0 the steady
/// state is compared (null-space solve where the size allows); with f0 = 0
/// the ring-down from vac (x) coherent(b0) is compared as the sup over the
/// time grid.
ConvergenceReport convergence_report(const SystemParams& p, const DriveParams& d, const FockConfig& base,
                                     std::span<const FockConfig> ladder,
                                     const ConvergenceOptions& options = {});

}  // namespace dcebr
