#include "dcebr/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <Eigen/Core>
#include <omp.h>

#include "dcebr/circuit.hpp"
#include "dcebr/errors.hpp"
#include "dcebr/quantum.hpp"
#include "dcebr/semiclassical.hpp"
#include "dcebr/steady.hpp"
#include "dcebr/version.hpp"

namespace dcebr::experiments {

using io::Json;

namespace {

// ---------------------------------------------------------------- key access

double num(const Json& v, const std::string& key, std::optional<double> fallback = std::nullopt) {
  if (!v.contains(key)) {
    if (!fallback) throw ConfigError("missing key '" + key + "'");
    return *fallback;
  }
  if (!v.at(key).is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.at(key).get<double>();
}

int integer(const Json& v, const std::string& key, int fallback) {
  if (!v.contains(key)) return fallback;
  if (!v.at(key).is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return v.at(key).get<int>();
}

std::string str(const Json& v, const std::string& key, const std::string& fallback) {
  if (!v.contains(key)) return fallback;
  if (!v.at(key).is_string()) throw ConfigError("key '" + key + "' must be a string");
  return v.at(key).get<std::string>();
}

std::vector<double> strictly_increasing(const std::vector<double>& g, const std::string& what) {
  if (g.empty()) throw ConfigError(what + " is empty");
  for (double x : g)
    if (!std::isfinite(x)) throw ConfigError(what + " contains a non-finite value");
  for (std::size_t i = 1; i < g.size(); ++i)
    if (!(g[i] > g[i - 1])) throw ConfigError(what + " must be strictly increasing");
  return g;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g;
  if (n == 1) {
    g.push_back(lo);
    return g;
  }
  for (int i = 0; i < n; ++i) g.push_back(lo + (hi - lo) * i / (n - 1));
  return g;
}

/// `key` as an explicit array, or `key_range` = [min, max, points].
std::optional<std::vector<double>> grid(const Json& v, const std::string& key) {
  if (v.contains(key)) {
    const Json& a = v.at(key);
    if (!a.is_array()) throw ConfigError("key '" + key + "' must be an array");
    std::vector<double> g;
    for (const auto& x : a) {
      if (!x.is_number()) throw ConfigError("key '" + key + "' must hold numbers");
      g.push_back(x.get<double>());
    }
    return strictly_increasing(g, key);
  }
  const std::string rk = key + "_range";
  if (v.contains(rk)) {
    const Json& a = v.at(rk);
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number_integer())
      throw ConfigError("key '" + rk + "' must be [min, max, points]");
    const int n = a[2].get<int>();
    if (n < 1) throw ConfigError(rk + " needs at least one point");
    const double lo = a[0].get<double>(), hi = a[1].get<double>();
    if (n > 1 && !(hi > lo)) throw ConfigError(rk + " must satisfy min < max");
    return strictly_increasing(linspace(lo, hi, n), rk);
  }
  return std::nullopt;
}

io::ParamSet params_of(const Panel& panel) { return io::param_set_from_json(panel.values); }

std::string panel_stem(const ExperimentConfig& c, const Panel& p) {
  return c.panels.size() == 1 && p.name == "main" ? c.name : c.name + "_" + p.name;
}

double modified_threshold_or_throw(const SystemParams& p) {
  if (!(p.omega_c > 0.0)) throw ConfigError("'lambda' drive amplitudes need omega_c > 0");
  return modified_threshold(p);
}

// ---------------------------------------------------------------- output

struct Writer {
  const std::filesystem::path& out;
  Format format;
  std::vector<std::filesystem::path>& files;

  Json write(const io::Table& t, const std::string& stem) {
    Json names = Json::array();
    if (format == Format::Csv || format == Format::Both) {
      const auto p = out / (stem + ".csv");
      io::write_csv(p, t);
      files.push_back(p);
      names.push_back(p.filename().string());
    }
    if (format == Format::Json || format == Format::Both) {
      const auto p = out / (stem + ".json");
      io::write_json(p, t);
      files.push_back(p);
      names.push_back(p.filename().string());
    }
    return names;
  }
};

Json system_json(const SystemParams& p) {
  Json j = Json::object();
  j["gamma_0"] = p.gamma0();
  j["gamma_1"] = p.gamma1();
  j["weak_coupling"] = p.weak_coupling();
  j["resonant"] = p.resonant();
  if (p.omega_c > 0.0) {
    j["f0_threshold"] = mean_field_threshold(p);
    j["f0_threshold_modified"] = modified_threshold(p);
  }
  const RingdownRates rr = ringdown_rates(p);
  j["omega_d"] = {rr.omega_d.real(), rr.omega_d.imag()};
  j["regime"] = to_string(rr.regime);
  j["linewidth"] = effective_linewidth(p);
  return j;
}

SteadyStrategy strategy_of(const Json& v, const FockConfig& fock, double tol, Json& record) {
  const std::string s = str(v, "steady_strategy", "auto");
  const double settle = num(v, "settle_tol", 1e-9);
  bool null_space = false;
  if (s == "null_space")
    null_space = true;
  else if (s == "auto")
    null_space = fock.dimension() <= kNullSpaceMaxDimension;
  else if (s != "long_time")
    throw ConfigError("steady_strategy must be auto, long_time or null_space");
  record["steady_strategy"] = null_space ? "null_space" : "long_time";
  record["settle_tol"] = settle;
  if (null_space) return NullSpace{settle};
  LongTimeEvolution lte;
  lte.settle_tol = settle;
  lte.integrator_tol = tol;
  lte.t_max = num(v, "steady_t_max", 0.0);
  return lte;
}

// ---------------------------------------------------------------- kinds

Json run_ringdown(const ExperimentConfig& c, const Panel& panel, Writer& w, std::vector<Gap>& gaps) {
  const io::ParamSet ps = params_of(panel);
  const SystemParams& p = ps.system;
  if (ps.drive.f0 != 0.0) throw ConfigError("ring-down panels are undriven (f0 must be 0)");
  const double b0 = num(panel.values, "b0", 2.0);
  const double t_max = num(panel.values, "t_max", 8.0 / p.gamma1());
  const int points = integer(panel.values, "points", 400);
  if (!(t_max > 0.0) || points < 2) throw ConfigError("ring-down grid needs t_max > 0 and points >= 2");
  const auto times = linspace(0.0, t_max, points);
  const DriveParams envelope{0.0, p.omega_b};

  io::Table t = io::trajectory_table();
  Json rec = Json::object();
  rec["b0"] = b0;
  rec["t_max"] = t_max;
  rec["points"] = points;
  rec["frame"] = "rotating at omega_b (envelope); lab amplitudes are b e^{-i omega_b t}, q e^{-i omega_b t}";
  for (const std::string tier : {"master", "linear", "cumulant", "mean_field", "analytic"}) {
    if (!c.tiers.count(tier)) continue;
    try {
      if (tier == "master") {
        const Liouvillian L(p, envelope, ps.fock);
        const Trajectory tr = evolve(L, QuantumState::coherent(ps.fock, 0.0, b0), times, c.tol);
        io::append_trajectory(t, tr);
        rec["master"] = {{"n_cav", ps.fock.n_cav},
                         {"n_mech", ps.fock.n_mech},
                         {"max_trace_drift", tr.max_trace_drift},
                         {"max_hermiticity_error", tr.max_hermiticity_error},
                         {"min_eigenvalue", tr.min_eigenvalue},
                         {"steps", tr.steps}};
      } else if (tier == "linear" || tier == "cumulant") {
        const Model m = tier == "linear" ? Model::Linear : Model::Cumulant;
        const SemiTrajectory tr = integrate(m, SemiState{b0, 0.0, 0.0}, p, envelope, times, c.tol);
        io::append_trajectory(t, tr);
        if (m == Model::Cumulant) rec["cumulant_clipped_samples"] = tr.clipped_samples;
      } else if (tier == "mean_field") {
        io::append_trajectory(t, integrate(MeanFieldState{0.0, b0}, p, envelope, times, c.tol));
      } else {
        for (double ti : times) {
          const RingdownPoint r = analytic_ringdown(b0, p, ti, Frame::RotatingAtDrive);
          t.add({ti, std::monostate{}, std::norm(r.b), r.b.real(), r.b.imag(), r.q.real(), r.q.imag(),
                 std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{}, std::string("analytic")});
        }
      }
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      gaps.push_back({panel.name, tier, e.what()});
    }
  }
  rec["files"] = w.write(t, panel_stem(c, panel));
  return rec;
}

std::vector<std::vector<io::Cell>> amplitude_point(const ExperimentConfig& c, const io::ParamSet& ps, double omega,
                                                   double f0, const io::Cell& lam, const SteadyStrategy& strategy,
                                                   const std::string& panel, std::vector<Gap>& gaps) {
  const SystemParams& p = ps.system;
  const DriveParams d{f0, omega};
  const io::Cell none = std::monostate{};
  const std::string where = "f0=" + io::format_double(f0);
  std::vector<std::vector<io::Cell>> out;
  const auto row = [&](const std::string& tier, std::int64_t branch, double x, double n_a, double n_b,
                       std::complex<double> b, std::complex<double> q, const std::string& stab,
                       const std::optional<Complex>& nab, const std::optional<Complex>& qdb) {
    const auto cre = [&](const std::optional<Complex>& z) { return z ? io::Cell(z->real()) : none; };
    const auto cim = [&](const std::optional<Complex>& z) { return z ? io::Cell(z->imag()) : none; };
    out.push_back({f0, lam, tier, branch, x, n_a, n_b, std::norm(b), b.real(), b.imag(), q.real(), q.imag(), stab,
                   cre(nab), cim(nab), cre(qdb), cim(qdb)});
  };
  if (c.tiers.count("linear")) {
    try {
      const Detunings det = detunings(p, d);
      const std::complex<double> b = linear_response(p, omega) * f0;
      const std::complex<double> q = -2.0 * std::complex<double>(0, 1) * p.omega_c * b / (p.gamma_a - std::complex<double>(0, 1) * det.q);
      const double n_a = 4.0 * p.omega_c * std::imag(std::conj(q) * b) / p.gamma_a;
      row("linear", 0, 1.0 + 2.0 * n_a, n_a, std::norm(b), b, q, "stable", std::nullopt, std::nullopt);
    } catch (const std::exception& e) {
      gaps.push_back({panel, "linear " + where, e.what()});
    }
  }
  if (c.tiers.count("cumulant")) {
    try {
      const auto br = branch_solutions(p, f0, omega - p.omega_b);
      for (std::size_t k = 0; k < br.size(); ++k)
        row("cumulant", static_cast<std::int64_t>(k), br[k].x, br[k].n_a, std::norm(br[k].b), br[k].b, br[k].q,
            to_string(br[k].stability), std::nullopt, std::nullopt);
    } catch (const std::exception& e) {
      gaps.push_back({panel, "cumulant " + where, e.what()});
    }
  }
  if (c.tiers.count("master")) {
    try {
      const Liouvillian L(p, d, ps.fock);
      const Observables o = measure(steady_state(L, strategy));
      row("master", 0, 1.0 + 2.0 * o.n_a, o.n_a, o.n_b, o.b_amp, o.q_amp, "na", normalized_cumulant_nab(o),
          normalized_cumulant_qdagb(o));
    } catch (const std::exception& e) {
      gaps.push_back({panel, "master " + where, e.what()});
    }
  }
  return out;
}

Json run_amplitude(const ExperimentConfig& c, const Panel& panel, Writer& w, std::vector<Gap>& gaps,
                   const RunOptions& opt) {
  const io::ParamSet ps = params_of(panel);
  const SystemParams& p = ps.system;
  if (!p.resonant()) throw ConfigError("amplitude sweeps require omega_b = 2 omega_a");
  const double omega = panel.values.contains("omega_drive") ? ps.drive.omega : p.omega_b;
  const double th = p.omega_c > 0.0 ? modified_threshold(p) : 0.0;
  std::vector<double> f0s;
  std::vector<io::Cell> lambdas;
  if (auto g = grid(panel.values, "lambda")) {
    modified_threshold_or_throw(p);
    for (double l : *g) {
      if (l < 0.0) throw ConfigError("lambda must be >= 0");
      f0s.push_back(l * th);
      lambdas.emplace_back(l);
    }
  } else if (auto f = grid(panel.values, "f0_values")) {
    for (double x : *f) {
      if (x < 0.0) throw ConfigError("f0_values must be >= 0");
      f0s.push_back(x);
      lambdas.push_back(th > 0.0 ? io::Cell(x / th) : io::Cell(std::monostate{}));
    }
  } else {
    throw ConfigError("amplitude sweep needs 'lambda', 'lambda_range', 'f0_values' or 'f0_values_range'");
  }
  Json rec = Json::object();
  rec["omega_drive"] = omega;
  rec["f0"] = f0s;
  const SteadyStrategy strategy = strategy_of(panel.values, ps.fock, c.tol, rec);

  io::Table t;
  t.columns = {"f0",   "lambda", "tier", "branch_index", "x",          "n_a",        "n_b",        "abs_b2",    "Re_b",
               "Im_b", "Re_q",   "Im_q", "stability",    "Re_cum_nab", "Im_cum_nab", "Re_cum_qdb", "Im_cum_qdb"};
  const auto n = static_cast<std::ptrdiff_t>(f0s.size());
  std::vector<std::vector<std::vector<io::Cell>>> rows(f0s.size());
  std::vector<std::vector<Gap>> fails(f0s.size());
  const int threads = opt.workers > 0 ? opt.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    rows[k] = amplitude_point(c, ps, omega, f0s[k], lambdas[k], strategy, panel.name, fails[k]);
  }
  for (std::size_t k = 0; k < f0s.size(); ++k) {
    for (auto& r : rows[k]) t.add(std::move(r));
    gaps.insert(gaps.end(), fails[k].begin(), fails[k].end());
  }
  rec["files"] = w.write(t, panel_stem(c, panel));
  return rec;
}

std::set<Tier> sweep_tiers(const std::set<std::string>& names) {
  std::set<Tier> out;
  for (const auto& s : names)
    if (auto t = parse_tier(s)) out.insert(*t);
  return out;
}

Json run_spectral(const ExperimentConfig& c, const Panel& panel, Writer& w, std::vector<Gap>& gaps,
                  const RunOptions& opt) {
  const io::ParamSet ps = params_of(panel);
  const SystemParams& p = ps.system;
  double f0 = ps.drive.f0;
  Json rec = Json::object();
  if (panel.values.contains("lambda")) {
    const double lam = num(panel.values, "lambda");
    if (lam < 0.0) throw ConfigError("lambda must be >= 0");
    f0 = lam * modified_threshold_or_throw(p);
    rec["lambda"] = lam;
  }
  rec["f0"] = f0;
  std::vector<double> omegas;
  if (auto g = grid(panel.values, "omegas")) {
    omegas = *g;
  } else {
    const double half = 6.0 * effective_linewidth(p);
    const int points = integer(panel.values, "points", 201);
    if (points < 2) throw ConfigError("points must be >= 2");
    omegas = linspace(p.omega_b - half, p.omega_b + half, points);
    rec["omega_grid"] = "omega_b +- 6 Gamma";
  }
  rec["omegas"] = {omegas.front(), omegas.back(), omegas.size()};
  const auto tiers = sweep_tiers(c.tiers);
  if ((tiers.count(Tier::CumulantBranches) || c.kind == Kind::BistabilityScan) && !p.resonant())
    throw ConfigError("branch solutions require omega_b = 2 omega_a");
  SweepOptions so;
  so.fock = ps.fock;
  so.workers = opt.workers;
  if (tiers.count(Tier::MasterEquation)) {
    so.strategy = strategy_of(panel.values, ps.fock, c.tol, rec);
    rec["fock"] = {{"n_cav", ps.fock.n_cav}, {"n_mech", ps.fock.n_mech}};
  }
  // The master tier may run on every k-th frequency only.
  const int every = integer(panel.values, "master_every", 1);
  if (every < 1) throw ConfigError("master_every must be >= 1");
  SweepTable s;
  if (every > 1 && tiers.count(Tier::MasterEquation)) {
    rec["master_every"] = every;
    auto rest = tiers;
    rest.erase(Tier::MasterEquation);
    std::vector<double> sparse;
    for (std::size_t i = 0; i < omegas.size(); i += static_cast<std::size_t>(every)) sparse.push_back(omegas[i]);
    if (!rest.empty()) s = sweep(p, f0, omegas, rest, so);
    const SweepTable m = sweep(p, f0, sparse, {Tier::MasterEquation}, so);
    s.rows.insert(s.rows.end(), m.rows.begin(), m.rows.end());
    s.failures.insert(s.failures.end(), m.failures.begin(), m.failures.end());
  } else {
    s = sweep(p, f0, omegas, tiers, so);
  }
  for (const auto& f : s.failures)
    gaps.push_back({panel.name, to_string(f.tier) + " omega=" + io::format_double(f.omega), f.message});

  if (c.kind == Kind::BistabilityScan) {
    // Contiguous omega windows holding three cumulant branches.
    std::map<double, std::vector<const SweepRow*>> by_omega;
    for (const auto& r : s.rows)
      if (r.tier == Tier::CumulantBranches) by_omega[r.omega].push_back(&r);
    Json windows = Json::array();
    std::optional<double> start;
    double last = 0.0;
    bool middle_unstable = true;
    for (const auto& [om, rs] : by_omega) {
      if (rs.size() == 3) {
        if (!start) {
          start = om;
          middle_unstable = true;
        }
        middle_unstable = middle_unstable && rs[1]->stability == "unstable";
        last = om;
      } else if (start) {
        windows.push_back({{"omega_start", *start}, {"omega_end", last}, {"middle_unstable", middle_unstable}});
        start.reset();
      }
    }
    if (start) windows.push_back({{"omega_start", *start}, {"omega_end", last}, {"middle_unstable", middle_unstable}});
    rec["three_branch_windows"] = windows;
  }
  rec["files"] = w.write(io::sweep_table(s), panel_stem(c, panel));
  return rec;
}

Json run_circuit(const ExperimentConfig& c, const Panel& panel, Writer& w) {
  const circuit::CircuitParams cp = io::circuit_from_json(panel.values);
  namespace ck = dcebr::circuit;
  Json rep = Json::object();
  rep["inputs"] = io::to_json(cp);
  Json derived = Json::object();
  try {
    derived["wave_velocity"] = cp.wave_velocity();
    derived["reference_length"] = cp.reference_length();
    derived["single_junction_energy"] = ck::single_junction_energy(cp);
    derived["junction_inductance"] = ck::junction_inductance(cp);
    derived["effective_position_bias"] = ck::effective_position(cp, cp.phi_bias);
    derived["trig_factor"] = ck::trig_factor(cp.phi_bias);
    derived["lc_flux_zpf"] = ck::lc_flux_zpf(cp);
    derived["effective_length_zpf"] = ck::effective_length_zpf(cp);
    derived["omega_c"] = ck::analog_coupling(cp);
    derived["omega_c_hz"] = ck::analog_coupling(cp) / (2.0 * std::numbers::pi);
    derived["omega_c_closed_form"] = ck::analog_coupling_closed_form(cp);
    derived["omega_c_closed_form_hz"] = ck::analog_coupling_closed_form(cp) / (2.0 * std::numbers::pi);
    derived["flux_length_coefficient"] = ck::flux_length_coefficient(cp);
    derived["effective_mass"] = ck::effective_mass(cp);
    derived["mass_zpf"] = ck::mass_zpf(cp);
    derived["coupling_from_mass"] = cp.omega_a * ck::mass_zpf(cp) / (2.0 * cp.reference_length());
    derived["plasma_frequency"] = ck::plasma_frequency(cp);
  } catch (const std::domain_error& e) {
    throw ConfigError(e.what());
  }
  rep["derived"] = derived;
  const ck::RegimeReport rr = ck::validate_regime(cp);
  Json checks = Json::array();
  for (const auto& ch : rr.checks)
    checks.push_back({{"name", ch.name}, {"ratio", ch.ratio}, {"pass", ch.pass}, {"detail", ch.detail}});
  rep["regime"] = {{"pass", rr.pass()}, {"checks", checks}};
  if (panel.values.contains("rate_unit")) {
    const double unit = num(panel.values, "rate_unit");
    const ck::AnalogModel m = ck::build_analog_model(cp, unit, num(panel.values, "gamma_a_si", unit),
                                                     num(panel.values, "gamma_b_si", unit));
    rep["system"] = {{"rate_unit", unit},
                     {"omega_a", m.system.omega_a},
                     {"omega_b", m.system.omega_b},
                     {"omega_c", m.system.omega_c},
                     {"gamma_a", m.system.gamma_a},
                     {"gamma_b", m.system.gamma_b}};
  }
  Json rec = Json::object();
  const std::string stem = panel_stem(c, panel);
  const auto report_path = w.out / (stem + "_report.json");
  {
    std::ofstream os(report_path, std::ios::binary);
    os << rep.dump(2) << "\n";
  }
  w.files.push_back(report_path);
  Json files = Json::array({report_path.filename().string()});

  io::Table t;
  t.columns = {"quantity", "value"};
  for (const auto& [k, v] : derived.items()) t.add({k, v.get<double>()});
  for (const auto& f : w.write(t, stem)) files.push_back(f);

  if (auto g = grid(panel.values, "phi_scan")) {
    io::Table s;
    s.columns = {"phi_bias", "trig_factor", "effective_position", "omega_c", "omega_c_hz", "effective_mass"};
    for (double phi : *g) {
      circuit::CircuitParams q = cp;
      q.phi_bias = phi;
      try {
        s.add({phi, ck::trig_factor(phi), ck::effective_position(q, phi), ck::analog_coupling(q),
               ck::analog_coupling(q) / (2.0 * std::numbers::pi), ck::effective_mass(q)});
      } catch (const std::exception& e) {
        throw ConfigError("phi_scan point " + io::format_double(phi) + ": " + e.what());
      }
    }
    for (const auto& f : w.write(s, stem + "_phi_scan")) files.push_back(f);
  }
  rec["regime_pass"] = rr.pass();
  rec["files"] = files;
  return rec;
}

Json run_convergence(const ExperimentConfig& c, const Panel& panel, Writer& w) {
  const io::ParamSet ps = params_of(panel);
  std::vector<FockConfig> ladder;
  if (!panel.values.contains("ladder") || !panel.values.at("ladder").is_array())
    throw ConfigError("convergence study needs 'ladder' = [[n_cav, n_mech], ...]");
  for (const auto& e : panel.values.at("ladder")) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer())
      throw ConfigError("ladder entries must be [n_cav, n_mech]");
    FockConfig f;
    f.n_cav = e[0].get<int>();
    f.n_mech = e[1].get<int>();
    ladder.push_back(f);
  }
  if (ladder.empty()) throw ConfigError("ladder is empty");
  ConvergenceOptions o;
  o.b0 = num(panel.values, "b0", o.b0);
  o.t_max = num(panel.values, "t_max", 0.0);
  o.samples = static_cast<std::size_t>(integer(panel.values, "samples", static_cast<int>(o.samples)));
  o.tol = c.tol;
  o.threshold = num(panel.values, "threshold", o.threshold);
  ConvergenceReport rep;
  try {
    rep = convergence_report(ps.system, ps.drive, ps.fock, ladder, o);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  io::Table t;
  t.columns = {"from_n_cav", "from_n_mech", "to_n_cav", "to_n_mech", "change_n_a", "change_n_b",
               "change_b",   "change_q",    "max_change"};
  for (const auto& s : rep.steps)
    t.add({static_cast<std::int64_t>(s.from.n_cav), static_cast<std::int64_t>(s.from.n_mech),
           static_cast<std::int64_t>(s.to.n_cav), static_cast<std::int64_t>(s.to.n_mech), s.change_n_a, s.change_n_b,
           s.change_b, s.change_q, s.max_change()});
  Json rec = Json::object();
  rec["mode"] = rep.mode;
  rec["passes"] = rep.passes;
  rec["threshold"] = rep.threshold;
  rec["b0"] = o.b0;
  rec["files"] = w.write(t, panel_stem(c, panel));
  return rec;
}

const std::map<std::string, Kind>& kind_names() {
  static const std::map<std::string, Kind> m = {{"ringdown", Kind::Ringdown},
                                                {"amplitude_sweep", Kind::AmplitudeSweep},
                                                {"spectral_sweep", Kind::SpectralSweep},
                                                {"bistability_scan", Kind::BistabilityScan},
                                                {"circuit_design", Kind::CircuitDesign},
                                                {"convergence_study", Kind::ConvergenceStudy}};
  return m;
}

const std::set<std::string>& reserved_keys() {
  static const std::set<std::string> s = {"kind", "name", "tiers", "format", "tol", "panel", "description"};
  return s;
}

double to_number(const std::string& s, bool& ok) {
  ok = false;
  if (s.empty()) return 0.0;
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    ok = pos == s.size();
    return v;
  } catch (const std::exception&) {
    return 0.0;
  }
}

struct Series {
  std::vector<double> x, y;
};

Series series_of(const io::TextTable& t, const CompareOptions& o, const std::string& filter, const std::string& label,
                 std::vector<std::string>& warnings) {
  const int xi = o.x_column.empty() ? 0 : t.column(o.x_column);
  const int yi = t.column(o.y_column);
  if (xi < 0) throw ConfigError("dataset " + label + " has no column '" + o.x_column + "'");
  if (yi < 0) throw ConfigError("dataset " + label + " has no column '" + o.y_column + "'");
  int fi = t.column("tier");
  if (fi < 0) fi = t.column("model");
  if (!filter.empty() && fi < 0) throw ConfigError("dataset " + label + " has no tier/model column to filter on");
  const int si = t.column("stability");

  // Keep the first stable row per abscissa, else the first row.
  std::map<double, std::pair<double, bool>> picked;
  std::size_t skipped = 0;
  for (const auto& r : t.rows) {
    if (!filter.empty() && r[static_cast<std::size_t>(fi)] != filter) continue;
    bool okx = false, oky = false;
    const double x = to_number(r[static_cast<std::size_t>(xi)], okx);
    const double y = to_number(r[static_cast<std::size_t>(yi)], oky);
    if (!okx || !oky) {
      ++skipped;
      continue;
    }
    const bool stable = si < 0 || r[static_cast<std::size_t>(si)] == "stable";
    auto it = picked.find(x);
    if (it == picked.end())
      picked.emplace(x, std::make_pair(y, stable));
    else if (!it->second.second && stable)
      it->second = {y, true};
  }
  if (skipped) warnings.push_back("dataset " + label + ": skipped " + std::to_string(skipped) + " rows with undefined values");
  Series s;
  for (const auto& [x, v] : picked) {
    s.x.push_back(x);
    s.y.push_back(v.first);
  }
  if (s.x.empty()) throw ConfigError("dataset " + label + " has no usable rows");
  return s;
}

}  // namespace

// ---------------------------------------------------------------- public API

std::string to_string(Kind k) {
  for (const auto& [name, kind] : kind_names())
    if (kind == k) return name;
  return "unknown";
}

std::optional<Kind> parse_kind(const std::string& s) {
  const auto& m = kind_names();
  const auto it = m.find(s);
  if (it == m.end()) return std::nullopt;
  return it->second;
}

std::optional<Format> parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  if (s == "both") return Format::Both;
  return std::nullopt;
}

std::string to_string(Format f) {
  switch (f) {
    case Format::Csv: return "csv";
    case Format::Json: return "json";
    case Format::Both: return "both";
  }
  return "csv";
}

std::set<std::string> allowed_tiers(Kind k) {
  switch (k) {
    case Kind::Ringdown: return {"master", "linear", "cumulant", "mean_field", "analytic"};
    case Kind::AmplitudeSweep:
    case Kind::SpectralSweep:
    case Kind::BistabilityScan: return {"linear", "cumulant", "master"};
    case Kind::CircuitDesign: return {"circuit"};
    case Kind::ConvergenceStudy: return {"master"};
  }
  return {};
}

std::set<std::string> default_tiers(Kind k) {
  switch (k) {
    case Kind::Ringdown: return {"master", "linear", "cumulant", "analytic"};
    case Kind::AmplitudeSweep: return {"linear", "cumulant", "master"};
    case Kind::SpectralSweep: return {"linear", "cumulant", "master"};
    case Kind::BistabilityScan: return {"linear", "cumulant"};
    case Kind::CircuitDesign: return {"circuit"};
    case Kind::ConvergenceStudy: return {"master"};
  }
  return {};
}

ExperimentConfig parse_experiment(const Json& doc, const std::string& fallback_name) {
  if (!doc.is_object()) throw ConfigError("experiment config must be a table");
  ExperimentConfig c;
  c.source = doc;
  const std::string kind = str(doc, "kind", "");
  const auto k = parse_kind(kind);
  if (!k) throw ConfigError("unknown or missing experiment kind '" + kind + "'");
  c.kind = *k;
  c.name = str(doc, "name", fallback_name);
  if (c.name.empty() || c.name.find_first_of("/\\") != std::string::npos)
    throw ConfigError("experiment name must be a plain file stem");
  const auto fmt = parse_format(str(doc, "format", "csv"));
  if (!fmt) throw ConfigError("format must be csv, json or both");
  c.format = *fmt;
  c.tol = num(doc, "tol", 1e-8);
  if (!(c.tol > 0.0 && c.tol < 1e-2)) throw ConfigError("tol must lie in (0, 1e-2)");

  if (doc.contains("tiers")) {
    const Json& t = doc.at("tiers");
    if (!t.is_array() || t.empty()) throw ConfigError("tiers must be a non-empty array of names");
    const auto allowed = allowed_tiers(c.kind);
    for (const auto& e : t) {
      if (!e.is_string()) throw ConfigError("tiers must be strings");
      const std::string s = e.get<std::string>();
      if (!allowed.count(s)) {
        std::string msg = "tier '" + s + "' is not compatible with kind " + to_string(c.kind);
        if (c.kind == Kind::CircuitDesign) msg += " (circuit design forbids dynamics tiers)";
        throw ConfigError(msg);
      }
      c.tiers.insert(s);
    }
  } else {
    c.tiers = default_tiers(c.kind);
  }

  Json base = Json::object();
  for (const auto& [key, v] : doc.items())
    if (!reserved_keys().count(key)) base[key] = v;

  if (doc.contains("panel")) {
    const Json& ps = doc.at("panel");
    if (!ps.is_array() || ps.empty()) throw ConfigError("'panel' must be a non-empty array of tables");
    std::set<std::string> names;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      if (!ps[i].is_object()) throw ConfigError("panel entries must be tables");
      Panel p;
      p.name = str(ps[i], "name", std::to_string(i));
      if (p.name.empty() || p.name.find_first_of("/\\") != std::string::npos)
        throw ConfigError("panel name must be a plain file stem");
      if (!names.insert(p.name).second) throw ConfigError("duplicate panel name '" + p.name + "'");
      p.values = base;
      for (const auto& [key, v] : ps[i].items())
        if (key != "name") p.values[key] = v;
      c.panels.push_back(std::move(p));
    }
  } else {
    c.panels.push_back({"main", base});
  }

  // Early validation of everything that does not need a solve.
  for (const auto& p : c.panels) {
    if (c.kind == Kind::CircuitDesign) {
      io::circuit_from_json(p.values);
      grid(p.values, "phi_scan");
      continue;
    }
    const io::ParamSet s = params_of(p);
    switch (c.kind) {
      case Kind::AmplitudeSweep:
        if (!grid(p.values, "lambda") && !grid(p.values, "f0_values"))
          throw ConfigError("panel " + p.name + ": amplitude sweep needs 'lambda' or 'f0_values' (or *_range)");
        break;
      case Kind::SpectralSweep:
      case Kind::BistabilityScan:
        grid(p.values, "omegas");
        if (p.values.contains("lambda") && !(s.system.omega_c > 0.0))
          throw ConfigError("panel " + p.name + ": 'lambda' needs omega_c > 0");
        break;
      case Kind::Ringdown:
        if (s.drive.f0 != 0.0) throw ConfigError("panel " + p.name + ": ring-down panels are undriven");
        break;
      default: break;
    }
  }
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path) {
  return parse_experiment(io::load_document(path), path.stem().string());
}

RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir, const RunOptions& options) {
  std::filesystem::create_directories(out_dir);
  RunResult res;
  const Format fmt = options.format.value_or(config.format);
  Writer w{out_dir, fmt, res.files};

  Json panels = Json::array();
  for (const auto& panel : config.panels) {
    Json rec;
    switch (config.kind) {
      case Kind::Ringdown: rec = run_ringdown(config, panel, w, res.gaps); break;
      case Kind::AmplitudeSweep: rec = run_amplitude(config, panel, w, res.gaps, options); break;
      case Kind::SpectralSweep:
      case Kind::BistabilityScan: rec = run_spectral(config, panel, w, res.gaps, options); break;
      case Kind::CircuitDesign: rec = run_circuit(config, panel, w); break;
      case Kind::ConvergenceStudy: rec = run_convergence(config, panel, w); break;
    }
    Json entry = Json::object();
    entry["name"] = panel.name;
    entry["inputs"] = panel.values;
    if (config.kind != Kind::CircuitDesign) entry["system"] = system_json(params_of(panel).system);
    entry["run"] = rec;
    panels.push_back(std::move(entry));
  }

  Json gaps = Json::array();
  for (const auto& g : res.gaps) gaps.push_back({{"panel", g.panel}, {"where", g.where}, {"message", g.message}});

  Json m = Json::object();
  m["tool"] = "dcebr";
  m["version"] = kVersion;
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["experiment"] = config.name;
  m["kind"] = to_string(config.kind);
  m["tiers"] = config.tiers;
  m["format"] = to_string(fmt);
  m["tol"] = config.tol;
  m["units"] = "rates in one angular-frequency unit (hbar = 1); circuit quantities in SI";
  m["drive_phase"] = "F0 real and positive";
  m["panels"] = std::move(panels);
  m["gaps"] = std::move(gaps);
  m["complete"] = res.gaps.empty();
  m["source"] = config.source;
  const auto mp = out_dir / "manifest.json";
  {
    std::ofstream os(mp, std::ios::binary);
    os << m.dump(2) << "\n";
    if (!os) throw std::runtime_error("cannot write " + mp.string());
  }
  res.files.push_back(mp);
  res.manifest = std::move(m);
  return res;
}

std::optional<Metric> parse_metric(const std::string& s) {
  if (s == "relative") return Metric::Relative;
  if (s == "absolute") return Metric::Absolute;
  return std::nullopt;
}

Json CompareReport::to_json() const {
  Json pts = Json::array();
  for (const auto& p : points) pts.push_back({{"x", p.x}, {"a", p.a}, {"b", p.b}, {"deviation", p.deviation}});
  Json j = Json::object();
  j["sup_deviation"] = sup_deviation;
  j["x_at_sup"] = x_at_sup;
  j["interpolated"] = interpolated;
  j["warnings"] = warnings;
  j["points"] = std::move(pts);
  return j;
}

CompareReport compare(const io::TextTable& a, const io::TextTable& b, const CompareOptions& o) {
  CompareReport rep;
  const Series sa = series_of(a, o, o.filter_a, "a", rep.warnings);
  const Series sb = series_of(b, o, o.filter_b, "b", rep.warnings);
  const double lo = sb.x.front(), hi = sb.x.back();
  const double eps = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
  std::size_t outside = 0;
  for (std::size_t i = 0; i < sa.x.size(); ++i) {
    const double x = sa.x[i];
    if (x < lo - eps || x > hi + eps) {
      ++outside;
      continue;
    }
    const auto it = std::lower_bound(sb.x.begin(), sb.x.end(), x - eps);
    const auto j = static_cast<std::size_t>(it - sb.x.begin());
    double yb = 0.0;
    if (j < sb.x.size() && std::abs(sb.x[j] - x) <= eps) {
      yb = sb.y[j];
    } else {
      const std::size_t r = std::min(j, sb.x.size() - 1), l = r - 1;
      const double f = (x - sb.x[l]) / (sb.x[r] - sb.x[l]);
      yb = sb.y[l] + f * (sb.y[r] - sb.y[l]);
      rep.interpolated = true;
    }
    ComparePoint p{x, sa.y[i], yb, 0.0};
    const double diff = std::abs(p.a - p.b);
    p.deviation = o.metric == Metric::Absolute ? diff : diff / std::max(std::abs(p.b), o.floor);
    if (rep.points.empty() || p.deviation > rep.sup_deviation) {
      rep.sup_deviation = p.deviation;
      rep.x_at_sup = x;
    }
    rep.points.push_back(p);
  }
  if (rep.points.empty()) throw ConfigError("datasets have disjoint domains");
  if (rep.interpolated) rep.warnings.push_back("abscissae differ; dataset b was linearly interpolated");
  if (outside) rep.warnings.push_back(std::to_string(outside) + " points of dataset a lie outside the domain of b");
  return rep;
}

CompareReport compare(const std::filesystem::path& a, const std::filesystem::path& b, const CompareOptions& o) {
  return compare(io::read_csv(a), io::read_csv(b), o);
}

std::vector<KindInfo> list_kinds() {
  return {{Kind::Ringdown, "free decay of a displaced mirror; master equation, linear, cumulant, mean-field and "
                           "closed-form tiers"},
          {Kind::AmplitudeSweep, "steady state versus drive amplitude at fixed frequency"},
          {Kind::SpectralSweep, "steady state versus drive frequency at fixed amplitude"},
          {Kind::BistabilityScan, "frequency scan of the cumulant branches with stability labels"},
          {Kind::CircuitDesign, "analog coupling, effective mass and validity checks of the SQUID circuit"},
          {Kind::ConvergenceStudy, "observable changes along a ladder of Fock cutoffs"}};
}

}  // namespace dcebr::experiments
