#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "dcebr/errors.hpp"
#include "dcebr/experiments.hpp"
#include "dcebr/version.hpp"

namespace ex = dcebr::experiments;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kNumericalFailure = 3;

std::optional<ex::Format> format_flag(const std::string& s) {
  if (s.empty()) return std::nullopt;
  auto f = ex::parse_format(s);
  if (!f) throw dcebr::ConfigError("--format must be csv, json or both");
  return f;
}

int cmd_run(const std::string& config, const std::string& out, int workers, const std::string& format) {
  const ex::ExperimentConfig c = ex::load_experiment(config);
  ex::RunOptions o;
  o.workers = workers;
  o.format = format_flag(format);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path("out") / c.name : std::filesystem::path(out);
  const ex::RunResult r = ex::run(c, dir, o);
  for (const auto& f : r.files) std::cout << f.string() << "\n";
  if (!r.gaps.empty()) {
    for (const auto& g : r.gaps) std::cerr << "gap: [" << g.panel << "] " << g.where << ": " << g.message << "\n";
    std::cerr << r.gaps.size() << " point(s) failed; see manifest.json\n";
    return kNumericalFailure;
  }
  return kOk;
}

int cmd_validate(const std::string& config) {
  const ex::ExperimentConfig c = ex::load_experiment(config);
  std::cout << "ok: " << c.name << " (" << ex::to_string(c.kind) << ", " << c.panels.size() << " panel(s))\n";
  return kOk;
}

int cmd_list() {
  for (const auto& k : ex::list_kinds()) {
    std::cout << ex::to_string(k.kind) << "\n  " << k.description << "\n  tiers:";
    for (const auto& t : ex::allowed_tiers(k.kind)) std::cout << " " << t;
    std::cout << "\n";
  }
  return kOk;
}

int cmd_compare(const std::string& a, const std::string& b, const ex::CompareOptions& o, const std::string& out) {
  const ex::CompareReport r = ex::compare(a, b, o);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << "\n";
  const std::string text = r.to_json().dump(2);
  if (out.empty()) {
    std::cout << text << "\n";
  } else {
    std::ofstream os(out, std::ios::binary);
    os << text << "\n";
    if (!os) throw std::runtime_error("cannot write " + out);
    std::cout << "sup_deviation " << r.sup_deviation << " at x = " << r.x_at_sup << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mirror/cavity back-reaction experiments", "dcebr"};
  app.set_version_flag("--version", std::string(dcebr::kVersion));
  app.require_subcommand(1);

  std::string config, out, format;
  int workers = 0;

  auto* run = app.add_subcommand("run", "run an experiment config and write its datasets");
  run->add_option("--config", config, "experiment config (.toml or .json)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "output directory (default out/<name>)");
  run->add_option("--workers", workers, "worker threads for sweeps (0 = all)")->check(CLI::NonNegativeNumber);
  run->add_option("--format", format, "csv, json or both (overrides the config)");

  auto* val = app.add_subcommand("validate-config", "parse and validate a config without running it");
  val->add_option("--config", config, "experiment config")->required()->check(CLI::ExistingFile);

  app.add_subcommand("list-experiments", "list experiment kinds and their tiers");

  std::string file_a, file_b, metric = "relative";
  ex::CompareOptions co;
  auto* cmp = app.add_subcommand("compare", "deviation of dataset a from reference dataset b");
  cmp->add_option("a", file_a, "dataset a (CSV)")->required()->check(CLI::ExistingFile);
  cmp->add_option("b", file_b, "reference dataset b (CSV)")->required()->check(CLI::ExistingFile);
  cmp->add_option("--x", co.x_column, "abscissa column (default: first column)");
  cmp->add_option("--y", co.y_column, "compared column")->capture_default_str();
  cmp->add_option("--filter-a", co.filter_a, "tier/model tag kept from a");
  cmp->add_option("--filter-b", co.filter_b, "tier/model tag kept from b");
  cmp->add_option("--metric", metric, "relative or absolute")->capture_default_str();
  cmp->add_option("--floor", co.floor, "denominator floor for relative deviations")->capture_default_str();
  cmp->add_option("--out", out, "write the JSON report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(config, out, workers, format);
    if (*val) return cmd_validate(config);
    if (*cmp) {
      const auto m = ex::parse_metric(metric);
      if (!m) throw dcebr::ConfigError("--metric must be relative or absolute");
      co.metric = *m;
      return cmd_compare(file_a, file_b, co, out);
    }
    return cmd_list();
  } catch (const dcebr::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const dcebr::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}
