#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dcebr/circuit.hpp"
#include "dcebr/params.hpp"
#include "dcebr/quantum.hpp"
#include "dcebr/semiclassical.hpp"
#include "dcebr/steady.hpp"

namespace dcebr::io {

using Json = nlohmann::ordered_json;

/// null marks an undefined value (empty in CSV, null in JSON).
using Cell = std::variant<std::monostate, double, std::int64_t, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row);
};

/// Shortest round-trip text of a double ("nan", "inf", "-inf" for non-finite).
std::string format_double(double v);

void write_csv(const std::filesystem::path& path, const Table& t);
void write_json(const std::filesystem::path& path, const Table& t);
Json to_json(const Table& t);

/// Header plus rows of raw strings. Throws ConfigError on ragged rows.
struct TextTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  int column(const std::string& name) const;  ///< -1 when absent
};
TextTable read_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------- schemas

inline const std::vector<std::string> kTrajectoryColumns = {
    "t", "n_a", "n_b", "Re_b", "Im_b", "Re_q", "Im_q",
    "Re_cum_nab", "Im_cum_nab", "Re_cum_qdb", "Im_cum_qdb", "model"};

inline const std::vector<std::string> kSweepColumns = {
    "omega", "tier", "branch_index", "x", "n_a", "abs_b2", "Re_b", "Im_b", "Re_q", "Im_q", "stability"};

/// Append master-equation records (model tag "master").
void append_trajectory(Table& t, const Trajectory& traj);
/// Append semiclassical records; cumulant columns are undefined, n_b = |b|^2.
void append_trajectory(Table& t, const SemiTrajectory& traj, const std::string& model_tag = "");

Table trajectory_table();
Table sweep_table(const SweepTable& s);

// ---------------------------------------------------------------- configs

/// Reads a TOML (.toml) or JSON (any other extension) document.
Json load_document(const std::filesystem::path& path);

struct ParamSet {
  SystemParams system{};
  DriveParams drive{};
  FockConfig fock{};
};

inline const std::vector<std::string> kParamKeys = {"omega_a", "omega_b", "omega_c", "gamma_a", "gamma_b",
                                                    "f0",      "omega_drive", "n_cav", "n_mech"};

/// Flat key/value parameter set. Missing drive keys default to 0 and missing
/// cutoffs to the FockConfig defaults; the five rates are required. Throws
/// ConfigError on missing or mistyped keys or failed validation.
ParamSet param_set_from_json(const Json& j);
Json to_json(const ParamSet& s);
ParamSet load_param_set(const std::filesystem::path& path);
/// Writes TOML for .toml paths, JSON otherwise.
void save_param_set(const std::filesystem::path& path, const ParamSet& s);

inline const std::vector<std::string> kCircuitKeys = {
    "omega_a", "omega_lc",     "i_crit",    "c_j",           "z_wg",    "ell_wg",    "c_wg",
    "l_lc",    "c_lc",         "mutual_ratio", "phi_bias",  "cavity_length", "l_squid", "guard_band"};

circuit::CircuitParams circuit_from_json(const Json& j);
Json to_json(const circuit::CircuitParams& c);
circuit::CircuitParams load_circuit(const std::filesystem::path& path);
void save_circuit(const std::filesystem::path& path, const circuit::CircuitParams& c);

}  // namespace dcebr::io
