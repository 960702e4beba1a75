#include "dcebr/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "dcebr/errors.hpp"
#include "tomlplusplus/toml.hpp"

namespace dcebr::io {

namespace {

std::string csv_field(const std::string& v) {
  if (v.find_first_of(",\"\n") == std::string::npos) return v;
  std::string out = "\"";
  for (const char ch : v) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

Json toml_to_json(const toml::node& n) {
  if (const auto* t = n.as_table()) {
    Json j = Json::object();
    for (const auto& [k, v] : *t) j[std::string(k.str())] = toml_to_json(v);
    return j;
  }
  if (const auto* a = n.as_array()) {
    Json j = Json::array();
    for (const auto& v : *a) j.push_back(toml_to_json(v));
    return j;
  }
  if (const auto* v = n.as_integer()) return Json(v->get());
  if (const auto* v = n.as_floating_point()) return Json(v->get());
  if (const auto* v = n.as_boolean()) return Json(v->get());
  if (const auto* v = n.as_string()) return Json(v->get());
  throw ConfigError("unsupported TOML value (dates and times are not accepted)");
}

std::string toml_double(double v) {
  std::string s = format_double(v);
  if (std::isfinite(v) && s.find_first_of(".eE") == std::string::npos) s += ".0";
  return s;
}

double get_double(const Json& j, const std::string& key, bool required, double fallback) {
  if (!j.contains(key)) {
    if (required) throw ConfigError("missing key '" + key + "'");
    return fallback;
  }
  const Json& v = j.at(key);
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.get<double>();
}

int get_int(const Json& j, const std::string& key, int fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError("key '" + key + "' must be an integer");
  return v.get<int>();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Cell opt_cell(const std::optional<Complex>& c, bool real) {
  if (!c) return std::monostate{};
  return real ? c->real() : c->imag();
}

}  // namespace

void Table::add(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw std::logic_error("row width does not match the table columns");
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_csv(const std::filesystem::path& path, const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      std::visit(
          [&os](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
              os << format_double(v);
            else if constexpr (std::is_same_v<T, std::int64_t>)
              os << v;
            else if constexpr (std::is_same_v<T, std::string>)
              os << csv_field(v);
          },
          row[i]);
    }
    os << '\n';
  }
  write_text(path, os.str());
}

Json to_json(const Table& t) {
  Json rows = Json::array();
  for (const auto& row : t.rows) {
    Json r = Json::object();
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::visit(
          [&](const auto& v) {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>)
              r[t.columns[i]] = nullptr;
            else if constexpr (std::is_same_v<T, double>)
              r[t.columns[i]] = std::isfinite(v) ? Json(v) : Json(format_double(v));
            else
              r[t.columns[i]] = v;
          },
          row[i]);
    }
    rows.push_back(std::move(r));
  }
  Json j = Json::object();
  j["columns"] = t.columns;
  j["rows"] = std::move(rows);
  return j;
}

void write_json(const std::filesystem::path& path, const Table& t) { write_text(path, to_json(t).dump(1) + "\n"); }

int TextTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

TextTable read_csv(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path.string());
  const auto split = [](const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      const char ch = line[i];
      if (quoted) {
        if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
          out.back() += '"';
          ++i;
        } else if (ch == '"') {
          quoted = false;
        } else {
          out.back() += ch;
        }
      } else if (ch == '"') {
        quoted = true;
      } else if (ch == ',') {
        out.emplace_back();
      } else {
        out.back() += ch;
      }
    }
    return out;
  };
  TextTable t;
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + " is empty");
  t.columns = split(line);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    auto row = split(line);
    if (row.size() != t.columns.size()) throw ConfigError("ragged row in " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table trajectory_table() {
  Table t;
  t.columns = kTrajectoryColumns;
  return t;
}

void append_trajectory(Table& t, const Trajectory& traj) {
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Observables& o = traj.records[i];
    const auto nab = normalized_cumulant_nab(o);
    const auto qdb = normalized_cumulant_qdagb(o);
    t.add({traj.times[i], o.n_a, o.n_b, o.b_amp.real(), o.b_amp.imag(), o.q_amp.real(), o.q_amp.imag(),
           opt_cell(nab, true), opt_cell(nab, false), opt_cell(qdb, true), opt_cell(qdb, false),
           std::string("master")});
  }
}

void append_trajectory(Table& t, const SemiTrajectory& traj, const std::string& model_tag) {
  const std::string tag = model_tag.empty() ? to_string(traj.model) : model_tag;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const SemiState& s = traj.states[i];
    t.add({traj.times[i], s.n_a, std::norm(s.b), s.b.real(), s.b.imag(), s.q.real(), s.q.imag(),
           std::monostate{}, std::monostate{}, std::monostate{}, std::monostate{}, tag});
  }
}

Table sweep_table(const SweepTable& s) {
  Table t;
  t.columns = kSweepColumns;
  for (const auto& r : s.rows)
    t.add({r.omega, to_string(r.tier), static_cast<std::int64_t>(r.branch_index), r.x, r.n_a, r.abs_b2,
           r.b.real(), r.b.imag(), r.q.real(), r.q.imag(), r.stability});
  return t;
}

Json load_document(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  if (path.extension() == ".toml") {
    try {
      const toml::table tbl = toml::parse_file(path.string());
      return toml_to_json(tbl);
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << "TOML parse error in " << path.string() << ": " << e.description() << " (line "
         << e.source().begin.line << ")";
      throw ConfigError(os.str());
    }
  }
  std::ifstream is(path);
  try {
    return Json::parse(is);
  } catch (const Json::parse_error& e) {
    throw ConfigError("JSON parse error in " + path.string() + ": " + e.what());
  }
}

ParamSet param_set_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("parameter set must be a key/value table");
  ParamSet s;
  s.system.omega_a = get_double(j, "omega_a", true, 0.0);
  s.system.omega_b = get_double(j, "omega_b", true, 0.0);
  s.system.omega_c = get_double(j, "omega_c", true, 0.0);
  s.system.gamma_a = get_double(j, "gamma_a", true, 0.0);
  s.system.gamma_b = get_double(j, "gamma_b", true, 0.0);
  s.drive.f0 = get_double(j, "f0", false, 0.0);
  s.drive.omega = get_double(j, "omega_drive", false, 0.0);
  s.fock.n_cav = get_int(j, "n_cav", s.fock.n_cav);
  s.fock.n_mech = get_int(j, "n_mech", s.fock.n_mech);
  try {
    s.system.validate();
    s.drive.validate();
    s.fock.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return s;
}

Json to_json(const ParamSet& s) {
  Json j = Json::object();
  j["omega_a"] = s.system.omega_a;
  j["omega_b"] = s.system.omega_b;
  j["omega_c"] = s.system.omega_c;
  j["gamma_a"] = s.system.gamma_a;
  j["gamma_b"] = s.system.gamma_b;
  j["f0"] = s.drive.f0;
  j["omega_drive"] = s.drive.omega;
  j["n_cav"] = s.fock.n_cav;
  j["n_mech"] = s.fock.n_mech;
  return j;
}

ParamSet load_param_set(const std::filesystem::path& path) { return param_set_from_json(load_document(path)); }

void save_param_set(const std::filesystem::path& path, const ParamSet& s) {
  if (path.extension() == ".toml") {
    std::ostringstream os;
    os << "omega_a = " << toml_double(s.system.omega_a) << '\n'
       << "omega_b = " << toml_double(s.system.omega_b) << '\n'
       << "omega_c = " << toml_double(s.system.omega_c) << '\n'
       << "gamma_a = " << toml_double(s.system.gamma_a) << '\n'
       << "gamma_b = " << toml_double(s.system.gamma_b) << '\n'
       << "f0 = " << toml_double(s.drive.f0) << '\n'
       << "omega_drive = " << toml_double(s.drive.omega) << '\n'
       << "n_cav = " << s.fock.n_cav << '\n'
       << "n_mech = " << s.fock.n_mech << '\n';
    write_text(path, os.str());
  } else {
    write_text(path, to_json(s).dump(2) + "\n");
  }
}

circuit::CircuitParams circuit_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("circuit parameters must be a key/value table");
  circuit::CircuitParams c;
  c.omega_a = get_double(j, "omega_a", true, 0.0);
  c.omega_lc = get_double(j, "omega_lc", true, 0.0);
  c.i_crit = get_double(j, "i_crit", true, 0.0);
  c.c_j = get_double(j, "c_j", true, 0.0);
  c.z_wg = get_double(j, "z_wg", true, 0.0);
  c.ell_wg = get_double(j, "ell_wg", true, 0.0);
  c.c_wg = get_double(j, "c_wg", true, 0.0);
  c.l_lc = get_double(j, "l_lc", true, 0.0);
  c.c_lc = get_double(j, "c_lc", true, 0.0);
  c.mutual_ratio = get_double(j, "mutual_ratio", true, 0.0);
  c.phi_bias = get_double(j, "phi_bias", true, 0.0);
  c.cavity_length = get_double(j, "cavity_length", false, 0.0);
  c.l_squid = get_double(j, "l_squid", false, 0.0);
  c.guard_band = get_double(j, "guard_band", false, c.guard_band);
  try {
    c.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  return c;
}

Json to_json(const circuit::CircuitParams& c) {
  Json j = Json::object();
  j["omega_a"] = c.omega_a;
  j["omega_lc"] = c.omega_lc;
  j["i_crit"] = c.i_crit;
  j["c_j"] = c.c_j;
  j["z_wg"] = c.z_wg;
  j["ell_wg"] = c.ell_wg;
  j["c_wg"] = c.c_wg;
  j["l_lc"] = c.l_lc;
  j["c_lc"] = c.c_lc;
  j["mutual_ratio"] = c.mutual_ratio;
  j["phi_bias"] = c.phi_bias;
  j["cavity_length"] = c.cavity_length;
  j["l_squid"] = c.l_squid;
  j["guard_band"] = c.guard_band;
  return j;
}

circuit::CircuitParams load_circuit(const std::filesystem::path& path) {
  return circuit_from_json(load_document(path));
}

void save_circuit(const std::filesystem::path& path, const circuit::CircuitParams& c) {
  const Json j = to_json(c);
  if (path.extension() == ".toml") {
    std::ostringstream os;
    for (const auto& [k, v] : j.items()) os << k << " = " << toml_double(v.get<double>()) << '\n';
    write_text(path, os.str());
  } else {
    write_text(path, j.dump(2) + "\n");
  }
}

}  // namespace dcebr::io
