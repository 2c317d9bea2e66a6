// qstore: run verification scenarios and parameter scans from JSON configs.
//
//   qstore verify-ladder                       defaults, report on stdout
//   qstore dark-residual --config c.json --out results/
//   qstore scan --config grid.json --jobs 4 --format csv
//   qstore defaults adiabatic-sweep            print a config template

#include <qstore/harness.hpp>
#include <qstore/kernels.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
namespace h = qstore::harness;
using nlohmann::json;

namespace {

constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBudget = 3;

struct CommonFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string format = "json";
};

void add_common(CLI::App* sub, CommonFlags& f, bool config_required) {
  auto* c = sub->add_option("--config", f.config, "JSON configuration file");
  if (config_required) c->required();
  sub->add_option("--out", f.out, "directory for report.json, checks.csv and data.csv");
  sub->add_option("--seed", f.seed, "overrides the configured seed");
  sub->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--format", f.format, "stdout format")->check(CLI::IsMember({"json", "csv"}));
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw qstore::InvalidArgument("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw h::ConfigError({path + ": " + e.what()});
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw qstore::InvalidArgument("cannot write " + path.string());
  out << text;
}

int run_scenario(h::ScenarioKind kind, const CommonFlags& f) {
  json j = f.config.empty() ? h::default_params(kind) : read_json(f.config);
  if (j.is_object() && !j.contains("scenario")) j["scenario"] = h::to_string(kind);
  if (j.is_object() && !j.contains("schema_version")) j["schema_version"] = h::kSchemaVersion;
  if (f.seed) j["seed"] = *f.seed;
  const auto config = h::ScenarioConfig::from_json(j);
  if (config.kind != kind) {
    throw h::ConfigError({"scenario: config is '" + h::to_string(config.kind) + "' but the subcommand is '" +
                          h::to_string(kind) + "'"});
  }
  qstore::kernels::set_threads(f.jobs);
  const h::Report report = h::run(config);

  if (f.format == "json") {
    std::cout << report.to_json().dump(2) << '\n';
  } else {
    h::write_checks_csv(report.checks, std::cout);
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_file(fs::path(f.out) / "report.json", report.to_json().dump(2) + "\n");
    std::ostringstream checks;
    h::write_checks_csv(report.checks, checks);
    write_file(fs::path(f.out) / "checks.csv", checks.str());
    if (!report.table.empty()) {
      std::ostringstream data;
      h::write_csv(report.table, data);
      write_file(fs::path(f.out) / "data.csv", data.str());
    }
  }
  for (const auto& c : report.checks) {
    if (!c.pass) std::cerr << "FAIL " << c.name << " [" << c.identity << "]" << (c.error ? ": " + *c.error : "") << '\n';
  }
  return report.all_pass() ? 0 : kExitFail;
}

int run_scan(const CommonFlags& f) {
  json j = read_json(f.config);
  if (f.seed && j.is_object() && j.contains("base") && j["base"].is_object()) j["base"]["seed"] = *f.seed;
  const auto config = h::ScanConfig::from_json(j);
  const auto result = h::scan(config, f.jobs);
  if (f.format == "json") {
    std::cout << result.to_json().dump(2) << '\n';
  } else {
    h::write_csv(result.table, std::cout);
  }
  if (!f.out.empty()) {
    fs::create_directories(f.out);
    write_file(fs::path(f.out) / "scan.json", result.to_json().dump(2) + "\n");
    std::ostringstream data;
    h::write_csv(result.table, data);
    write_file(fs::path(f.out) / "scan.csv", data.str());
  }
  return result.all_pass() ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-N verification of collective atomic storage states"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::pair<CLI::App*, h::ScenarioKind>> scenario_cmds;
  for (auto kind : h::all_scenarios()) {
    auto* sub = app.add_subcommand(h::to_string(kind), "run the " + h::to_string(kind) + " scenario");
    add_common(sub, flags, false);
    scenario_cmds.emplace_back(sub, kind);
  }
  auto* scan_cmd = app.add_subcommand("scan", "Cartesian-product parameter scan");
  add_common(scan_cmd, flags, true);

  std::string defaults_kind;
  auto* defaults_cmd = app.add_subcommand("defaults", "print the default config of a scenario");
  defaults_cmd->add_option("scenario", defaults_kind, "scenario kind")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (defaults_cmd->parsed()) {
      const auto kind = h::scenario_from_string(defaults_kind);
      if (!kind) throw h::ConfigError({"unknown scenario '" + defaults_kind + "'"});
      std::cout << h::default_params(*kind).dump(2) << '\n';
      return 0;
    }
    if (scan_cmd->parsed()) return run_scan(flags);
    for (const auto& [sub, kind] : scenario_cmds) {
      if (sub->parsed()) return run_scenario(kind, flags);
    }
  } catch (const h::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const h::BudgetExceeded& e) {
    std::cerr << e.what() << '\n';
    return kExitBudget;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
  return kExitFail;
}
