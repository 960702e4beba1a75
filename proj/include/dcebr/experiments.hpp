#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcebr/io.hpp"

namespace dcebr::experiments {

enum class Kind { Ringdown, AmplitudeSweep, SpectralSweep, BistabilityScan, CircuitDesign, ConvergenceStudy };

std::string to_string(Kind k);
std::optional<Kind> parse_kind(const std::string& s);

enum class Format { Csv, Json, Both };
std::optional<Format> parse_format(const std::string& s);
std::string to_string(Format f);

/// One dataset of an experiment: the top-level keys of the config overlaid
/// with the keys of a [[panel]] entry.
struct Panel {
  std::string name;
  io::Json values;
};

struct ExperimentConfig {
  Kind kind = Kind::Ringdown;
  std::string name;
  std::vector<Panel> panels;
  std::set<std::string> tiers;
  Format format = Format::Csv;
  double tol = 1e-8;
  io::Json source;  ///< document as read
};

/// Tiers accepted per kind and the defaults used when `tiers` is absent.
std::set<std::string> allowed_tiers(Kind k);
std::set<std::string> default_tiers(Kind k);

/// Builds and validates a config. `fallback_name` names the experiment when
/// the document has no `name`. Throws ConfigError.
ExperimentConfig parse_experiment(const io::Json& doc, const std::string& fallback_name = "experiment");
ExperimentConfig load_experiment(const std::filesystem::path& path);

struct RunOptions {
  int workers = 0;                    ///< 0 keeps the OpenMP default
  std::optional<Format> format;       ///< overrides the config
};

struct Gap {
  std::string panel;
  std::string where;
  std::string message;
};

struct RunResult {
  std::vector<std::filesystem::path> files;
  std::vector<Gap> gaps;
  io::Json manifest;
};

/// Writes every dataset of the experiment plus manifest.json into out_dir.
/// Point failures become gaps in the manifest; configuration problems throw
/// ConfigError, failures that leave no dataset throw NumericalError.
RunResult run(const ExperimentConfig& config, const std::filesystem::path& out_dir, const RunOptions& options = {});

enum class Metric { Relative, Absolute };
std::optional<Metric> parse_metric(const std::string& s);

struct CompareOptions {
  std::string x_column;          ///< empty selects the first column
  std::string y_column = "n_b";
  std::string filter_a;          ///< tier/model tag filter for dataset a, empty = all rows
  std::string filter_b;
  Metric metric = Metric::Relative;
  double floor = 1e-12;          ///< denominator floor for relative deviations
};

struct ComparePoint {
  double x = 0.0;
  double a = 0.0;
  double b = 0.0;
  double deviation = 0.0;
};

struct CompareReport {
  std::vector<ComparePoint> points;
  double sup_deviation = 0.0;
  double x_at_sup = 0.0;
  bool interpolated = false;
  std::vector<std::string> warnings;
  io::Json to_json() const;
};

/// Pointwise deviation of dataset a from dataset b (the reference), b being
/// linearly interpolated onto the abscissae of a when they differ. Rows
/// sharing an abscissa are reduced to the first stable row (or the first row).
/// Throws ConfigError for missing columns or disjoint domains.
CompareReport compare(const io::TextTable& a, const io::TextTable& b, const CompareOptions& options);
CompareReport compare(const std::filesystem::path& a, const std::filesystem::path& b, const CompareOptions& options);

struct KindInfo {
  Kind kind;
  std::string description;
};
std::vector<KindInfo> list_kinds();

}  // namespace dcebr::experiments
