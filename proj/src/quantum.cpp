#include "dcebr/quantum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>
#include <unsupported/Eigen/IterativeSolvers>

#include "dcebr/errors.hpp"
#include "dcebr/ode.hpp"

namespace dcebr {

namespace {

// Tr(O rho) = sum_ij O_ij rho_ji
Complex expect(const SparseMatrix& op, const DenseMatrix& rho) {
  Complex acc{0.0, 0.0};
  for (int k = 0; k < op.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(op, k); it; ++it) acc += it.value() * rho(it.col(), it.row());
  return acc;
}

double max_abs(const DenseMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double hermiticity_error(const DenseMatrix& rho) { return max_abs(rho - rho.adjoint()); }

double min_eigenvalue(const DenseMatrix& rho) {
  const DenseMatrix h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DenseMatrix> es(h, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue solve failed");
  return es.eigenvalues().minCoeff();
}

double min_rate(const Liouvillian& L) {
  double g = std::numeric_limits<double>::infinity();
  for (const auto& d : L.dissipators())
    if (d.rate > 0.0) g = std::min(g, d.rate);
  if (!std::isfinite(g)) throw NumericalError("generator has no dissipation; no default t_max");
  return g;
}

QuantumState from_rho(const Liouvillian& L, DenseMatrix rho) {
  QuantumState s;
  s.rho = std::move(rho);
  s.config = L.config();
  s.frame = Frame::RotatingAtDrive;
  return s;
}

QuantumState steady_long_time(const Liouvillian& L, const LongTimeEvolution& opt) {
  const double t_max = opt.t_max > 0.0 ? opt.t_max : 50.0 / min_rate(L);
  const double chunk = t_max / 100.0;

  DenseMatrix rho = QuantumState::vacuum(L.config()).rho;
  DenseMatrix scratch;
  const auto rhs = [&L](double, const DenseMatrix& y, DenseMatrix& dy) { L.apply_hermitian(y, dy); };
  StepControl ctl = StepControl::uniform(opt.integrator_tol);

  double t = 0.0;
  while (true) {
    L.apply_hermitian(rho, scratch);
    if (max_abs(scratch) < opt.settle_tol) break;
    if (t >= t_max * (1.0 - 1e-12)) {
      char msg[128];
      std::snprintf(msg, sizeof msg, "steady state not reached within t_max=%g (residual %.3e)", t_max,
                    max_abs(scratch));
      throw NumericalError(msg);
    }
    const double times[2] = {0.0, std::min(chunk, t_max - t)};
    DenseMatrix next;
    const auto stats = integrate_dopri5(rhs, rho, std::span<const double>(times, 2), ctl,
                                        [&next](std::size_t i, double, const DenseMatrix& y) {
                                          if (i == 1) next = y;
                                        });
    ctl.initial_step = stats.last_step;
    rho = std::move(next);
    t += times[1];
  }
  return from_rho(L, std::move(rho));
}

constexpr std::size_t kDirectMaxDimension = 48;

Eigen::VectorXcd krylov_solve(const SparseMatrix& A, const Eigen::VectorXcd& rhs) {
  struct Attempt {
    double droptol;
    int fill;
    int max_iter;
  };
  // Cheap preconditioner first; near the parametric instability the spectral
  // gap closes and only the tighter factorization keeps GMRES converging.
  static constexpr Attempt attempts[] = {{3e-3, 5, 600}, {1e-4, 20, 2000}};
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(rhs.size());
  for (const auto& a : attempts) {
    Eigen::GMRES<SparseMatrix, Eigen::IncompleteLUT<Complex>> g;
    g.preconditioner().setDroptol(a.droptol);
    g.preconditioner().setFillfactor(a.fill);
    g.set_restart(200);
    g.setTolerance(1e-13);
    g.setMaxIterations(a.max_iter);
    g.compute(A);
    if (g.info() != Eigen::Success) continue;
    const Eigen::VectorXcd y = g.solveWithGuess(rhs, x);
    if (y.allFinite()) x = y;
    if (g.info() == Eigen::Success) return x;
  }
  throw NumericalError("steady state: GMRES did not converge (near-singular generator)");
}

QuantumState steady_null_space(const Liouvillian& L, const NullSpace& opt) {
  const std::size_t n = L.dimension();
  if (n > kNullSpaceMaxDimension)
    throw std::invalid_argument("NullSpace strategy limited to dimension <= " +
                                std::to_string(kNullSpaceMaxDimension));
  const SparseMatrix sup = L.superoperator();
  const auto nn = static_cast<int>(n * n);

  // vec(rho)[i + n j] = rho(i, j); sector label is the parity of n_a(i) - n_a(j).
  const int stride = L.config().n_mech + 1;
  const auto sector = [&](int k) { return ((k % static_cast<int>(n)) / stride + (k / static_cast<int>(n)) / stride) & 1; };
  bool split = true;
  for (int k = 0; k < sup.outerSize() && split; ++k)
    for (SparseMatrix::InnerIterator it(sup, k); it; ++it)
      if (sector(static_cast<int>(it.row())) != sector(static_cast<int>(it.col()))) {
        split = false;
        break;
      }
  std::vector<int> reduced(static_cast<std::size_t>(nn), -1), full;
  for (int k = 0; k < nn; ++k)
    if (!split || sector(k) == 0) {
      reduced[static_cast<std::size_t>(k)] = static_cast<int>(full.size());
      full.push_back(k);
    }
  const auto m = static_cast<int>(full.size());

  // Row 0 (d rho_00/dt) is minus the sum of the other diagonal rows, so it can
  // carry the trace constraint instead.
  std::vector<Eigen::Triplet<Complex>> trip;
  trip.reserve(static_cast<std::size_t>(sup.nonZeros()) + n);
  for (int k = 0; k < sup.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(sup, k); it; ++it) {
      const int r = reduced[static_cast<std::size_t>(it.row())], c = reduced[static_cast<std::size_t>(it.col())];
      if (r > 0 && c >= 0) trip.emplace_back(r, c, it.value());
    }
  for (std::size_t k = 0; k < n; ++k)
    trip.emplace_back(0, reduced[k * (n + 1)], Complex(1.0, 0.0));
  SparseMatrix A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(m);
  rhs(0) = 1.0;

  const bool direct = opt.solver == NullSpace::Solver::Direct ||
                      (opt.solver == NullSpace::Solver::Auto && n <= kDirectMaxDimension);
  Eigen::VectorXcd v;
  if (direct) {
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(A);
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw NumericalError("steady state is not unique (singular constrained generator): " + lu.lastErrorMessage());
    v = lu.solve(rhs);
    if (lu.info() != Eigen::Success) throw NumericalError("steady state is not unique (null-space solve failed)");
  } else {
    v = krylov_solve(A, rhs);
  }
  if (!v.allFinite()) throw NumericalError("steady state is not unique (non-finite solution)");

  Eigen::VectorXcd vf = Eigen::VectorXcd::Zero(nn);
  for (int k = 0; k < m; ++k) vf(full[static_cast<std::size_t>(k)]) = v(k);
  DenseMatrix rho = Eigen::Map<const DenseMatrix>(vf.data(), static_cast<Eigen::Index>(n),
                                                  static_cast<Eigen::Index>(n));
  rho = 0.5 * (rho + rho.adjoint()).eval();
  const double res = residual_norm(L, rho);
  if (!(res < opt.settle_tol))
    throw NumericalError("steady state is not unique or ill-conditioned (residual " + std::to_string(res) + ")");
  return from_rho(L, std::move(rho));
}

void fill_changes(ConvergenceStep& step, const std::vector<Observables>& prev,
                  const std::vector<Observables>& cur) {
  // Sup-norm over the record set, relative to the sup of the finer result.
  double dna = 0, dnb = 0, db = 0, dq = 0;
  double sna = 0, snb = 0, sb = 0, sq = 0;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    dna = std::max(dna, std::abs(cur[i].n_a - prev[i].n_a));
    dnb = std::max(dnb, std::abs(cur[i].n_b - prev[i].n_b));
    db = std::max(db, std::abs(cur[i].b_amp - prev[i].b_amp));
    dq = std::max(dq, std::abs(cur[i].q_amp - prev[i].q_amp));
    sna = std::max({sna, std::abs(cur[i].n_a), std::abs(prev[i].n_a)});
    snb = std::max({snb, std::abs(cur[i].n_b), std::abs(prev[i].n_b)});
    sb = std::max({sb, std::abs(cur[i].b_amp), std::abs(prev[i].b_amp)});
    sq = std::max({sq, std::abs(cur[i].q_amp), std::abs(prev[i].q_amp)});
  }
  const auto ratio = [](double d, double s) { return s < 1e-300 ? 0.0 : d / s; };
  step.change_n_a = ratio(dna, sna);
  step.change_n_b = ratio(dnb, snb);
  step.change_b = ratio(db, sb);
  step.change_q = ratio(dq, sq);
}

}  // namespace

QuantumState QuantumState::vacuum(const FockConfig& config, Frame frame) {
  config.validate();
  QuantumState s;
  const auto n = static_cast<Eigen::Index>(config.dimension());
  s.rho = DenseMatrix::Zero(n, n);
  s.rho(0, 0) = 1.0;
  s.config = config;
  s.frame = frame;
  return s;
}

QuantumState QuantumState::coherent(const FockConfig& config, Complex alpha, Complex beta, Frame frame) {
  config.validate();
  const Eigen::VectorXcd ca = coherent_amplitudes(alpha, config.n_cav);
  const Eigen::VectorXcd cb = coherent_amplitudes(beta, config.n_mech);
  Eigen::VectorXcd psi(static_cast<Eigen::Index>(config.dimension()));
  for (int i = 0; i <= config.n_cav; ++i)
    for (int j = 0; j <= config.n_mech; ++j) psi(static_cast<Eigen::Index>(config.index(i, j))) = ca(i) * cb(j);
  QuantumState s;
  s.rho = psi * psi.adjoint();
  s.rho = 0.5 * (s.rho + s.rho.adjoint()).eval();
  s.config = config;
  s.frame = frame;
  return s;
}

StateDiagnostics QuantumState::diagnostics(bool with_eigenvalues) const {
  StateDiagnostics d;
  d.hermiticity_error = hermiticity_error(rho);
  d.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  d.min_eigenvalue = with_eigenvalues ? min_eigenvalue(rho) : 0.0;
  return d;
}

std::optional<Complex> normalized_cumulant_nab(const Observables& o) {
  const Complex den = o.n_a * o.b_amp;
  if (std::abs(den) < kCumulantFloor) return std::nullopt;
  return o.corr_nab / den - 1.0;
}

std::optional<Complex> normalized_cumulant_qdagb(const Observables& o) {
  const Complex den = std::conj(o.q_amp) * o.b_amp;
  if (std::abs(den) < kCumulantFloor) return std::nullopt;
  return o.corr_qdagb / den - 1.0;
}

Observables measure(const QuantumState& state) { return measure(state, make_ladder_ops(state.config)); }

Observables measure(const QuantumState& state, const LadderOps& ops) {
  const auto n = static_cast<Eigen::Index>(state.config.dimension());
  if (state.rho.rows() != n || state.rho.cols() != n || ops.a.rows() != n)
    throw std::invalid_argument("state and operators disagree on the truncation");
  const SparseMatrix na = ops.a_dag * ops.a;
  const SparseMatrix nb = ops.b_dag * ops.b;
  const SparseMatrix q = ops.a * ops.a;
  const SparseMatrix nab = na * ops.b;
  const SparseMatrix qdb = SparseMatrix(q.adjoint()) * ops.b;

  Observables o;
  o.n_a = expect(na, state.rho).real();
  o.n_b = expect(nb, state.rho).real();
  o.b_amp = expect(ops.b, state.rho);
  o.q_amp = expect(q, state.rho);
  o.a_amp = expect(ops.a, state.rho);
  o.corr_nab = expect(nab, state.rho);
  o.corr_qdagb = expect(qdb, state.rho);
  return o;
}

Trajectory evolve(const Liouvillian& L, const QuantumState& rho0, std::span<const double> times, double tol,
                  const EvolveOptions& options) {
  if (times.empty() || times[0] != 0.0) throw std::invalid_argument("times must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("times must be strictly increasing");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (!(rho0.config == L.config())) throw std::invalid_argument("state and generator truncations differ");
  const StateDiagnostics d0 = rho0.diagnostics();
  if (!d0.valid()) throw std::invalid_argument("initial state violates density-matrix invariants");

  const LadderOps ops = make_ladder_ops(rho0.config);
  const std::size_t stride = std::max<std::size_t>(1, options.positivity_stride);

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.records.reserve(times.size());
  traj.min_eigenvalue = d0.min_eigenvalue;

  const auto rhs = [&L](double, const DenseMatrix& y, DenseMatrix& dy) { L.apply_hermitian(y, dy); };
  const auto observe = [&](std::size_t i, double t, const DenseMatrix& y) {
    QuantumState s{y, rho0.config, rho0.frame};
    const bool eig = (i % stride == 0) || (i + 1 == times.size());
    const StateDiagnostics d = s.diagnostics(eig);
    traj.max_trace_drift = std::max(traj.max_trace_drift, d.trace_error);
    traj.max_hermiticity_error = std::max(traj.max_hermiticity_error, d.hermiticity_error);
    if (eig) traj.min_eigenvalue = std::min(traj.min_eigenvalue, d.min_eigenvalue);
    if (d.trace_error > 100.0 * tol || d.hermiticity_error > 100.0 * tol ||
        (eig && d.min_eigenvalue < -100.0 * tol))
      throw NumericalError("density-matrix invariant violated at t=" + std::to_string(t) +
                           ": trace error " + std::to_string(d.trace_error) + ", hermiticity " +
                           std::to_string(d.hermiticity_error) + ", min eigenvalue " +
                           std::to_string(d.min_eigenvalue));
    traj.records.push_back(measure(s, ops));
    if (i + 1 == times.size()) traj.final_state = std::move(s);
  };
  const auto stats = integrate_dopri5(rhs, DenseMatrix(rho0.rho), times, StepControl::uniform(tol), observe);
  traj.steps = stats.accepted;
  return traj;
}

QuantumState steady_state(const Liouvillian& L, const SteadyStrategy& strategy) {
  return std::visit(
      [&L](const auto& s) -> QuantumState {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, LongTimeEvolution>)
          return steady_long_time(L, s);
        else
          return steady_null_space(L, s);
      },
      strategy);
}

double residual_norm(const Liouvillian& L, const DenseMatrix& rho) {
  DenseMatrix out;
  L.apply(rho, out);
  return max_abs(out);
}

double ConvergenceStep::max_change() const { return std::max({change_n_a, change_n_b, change_b, change_q}); }

ConvergenceReport convergence_report(const SystemParams& p, const DriveParams& d, const FockConfig& base,
                                     std::span<const FockConfig> ladder, const ConvergenceOptions& options) {
  ConvergenceReport rep;
  rep.threshold = options.threshold;
  rep.configs.push_back(base);
  for (const auto& c : ladder) {
    const FockConfig& prev = rep.configs.back();
    const bool grows = (c.n_cav >= prev.n_cav && c.n_mech >= prev.n_mech) &&
                       (c.n_cav > prev.n_cav || c.n_mech > prev.n_mech);
    if (!grows) throw std::invalid_argument("convergence ladder must increase the cutoffs");
    rep.configs.push_back(c);
  }
  for (const auto& c : rep.configs) c.validate();

  const bool steady = d.f0 > 0.0;
  rep.mode = steady ? "steady" : "ringdown";

  std::vector<double> grid;
  if (!steady) {
    const double t_max = options.t_max > 0.0 ? options.t_max : 8.0 / p.gamma1();
    const std::size_t m = std::max<std::size_t>(2, options.samples);
    for (std::size_t i = 0; i < m; ++i) grid.push_back(t_max * static_cast<double>(i) / static_cast<double>(m - 1));
  }

  std::vector<Observables> prev_obs;
  for (std::size_t k = 0; k < rep.configs.size(); ++k) {
    const FockConfig& c = rep.configs[k];
    std::vector<Observables> obs;
    if (steady) {
      const Liouvillian L(p, d, c);
      if (c.dimension() <= kNullSpaceMaxDimension) {
        obs.push_back(measure(steady_state(L, NullSpace{})));
      } else {
        LongTimeEvolution lte;
        lte.integrator_tol = options.tol;
        obs.push_back(measure(steady_state(L, lte)));
      }
    } else {
      // Co-rotating envelope of the free ring-down.
      const Liouvillian L(p, DriveParams{0.0, p.omega_b}, c);
      const QuantumState rho0 = QuantumState::coherent(c, 0.0, options.b0);
      obs = evolve(L, rho0, grid, options.tol).records;
    }
    if (k > 0) {
      ConvergenceStep step;
      step.from = rep.configs[k - 1];
      step.to = c;
      fill_changes(step, prev_obs, obs);
      rep.steps.push_back(step);
    }
    prev_obs = std::move(obs);
  }
  rep.passes = !rep.steps.empty() && rep.steps.back().max_change() < rep.threshold;
  return rep;
}

}  // namespace dcebr
