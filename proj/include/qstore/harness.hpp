#pragma once

// Scenario runner behind the command-line tool: JSON configuration with a
// versioned schema, per-check verification records, parameter scans.

#include <qstore/errors.hpp>

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qstore::harness {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kArtifactVersion = "0.1.0";

enum class ScenarioKind {
  verify_ladder,
  verify_dicke,
  commutator_scan,
  mode_conditions,
  dark_residual,
  adiabatic_sweep,
  dynamic_transfer,
  swap,
  normalization_audit,
};

std::string to_string(ScenarioKind kind);
std::optional<ScenarioKind> scenario_from_string(const std::string& s);
const std::vector<ScenarioKind>& all_scenarios();

/// Every violation found while validating a configuration.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

/// Validated scenario: the kind plus every parameter, defaults filled in.
struct ScenarioConfig {
  ScenarioKind kind;
  nlohmann::json params;

  /// Parses and validates; throws ConfigError listing all problems.
  static ScenarioConfig from_json(const nlohmann::json& j);
  static ScenarioConfig defaults(ScenarioKind kind);

  nlohmann::json to_json() const;
  std::uint64_t seed() const;
  void set_seed(std::uint64_t seed);
};

/// Defaults for a scenario kind; the key set is also the accepted schema.
nlohmann::json default_params(ScenarioKind kind);

enum class Compare { abs_diff, rel_diff, at_most, at_least, less_than };
std::string to_string(Compare c);

struct Check {
  std::string name;
  std::string identity;    // what was tested, by formula or oracle name
  std::string provenance;  // closed-form | trivial | oracle
  Compare compare = Compare::abs_diff;
  double expected = 0;
  double actual = 0;
  double tolerance = 0;
  bool pass = false;
  std::optional<std::string> error;

  nlohmann::json to_json() const;
};

/// Evaluates the comparison and fills `pass`.
Check make_check(std::string name, std::string identity, std::string provenance, Compare compare,
                 double expected, double actual, double tolerance);
Check failed_check(std::string name, std::string identity, std::string provenance, const std::string& error);

struct Measurement {
  std::string name;
  double value = 0;
  nlohmann::json to_json() const;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  bool empty() const { return rows.empty(); }
  void add(const std::vector<double>& values);
};

/// Shortest text that reads back to the same double.
std::string format_double(double v);

void write_csv(const Table& t, std::ostream& os);

struct Report {
  nlohmann::json scenario;
  std::vector<Check> checks;
  std::vector<Measurement> measurements;
  Table table;
  std::optional<double> runtime_seconds;

  bool all_pass() const;
  std::size_t failures() const;
  nlohmann::json to_json() const;
};

void write_checks_csv(const std::vector<Check>& checks, std::ostream& os);

Report run(const ScenarioConfig& config);

/// Rough label count of the largest sector basis the scenario builds.
double estimate_basis_size(const ScenarioConfig& config);

class BudgetExceeded : public Error {
 public:
  BudgetExceeded(double estimate, double budget);
  double estimate() const { return estimate_; }
  double budget() const { return budget_; }

 private:
  double estimate_;
  double budget_;
};

/// {"base": {...scenario...}, "grid": {"key": [v1, v2, ...], ...},
///  "max_basis_size": 2e6}. Points are the Cartesian product of the grid in
///  key order (last key fastest). Each grid value replaces the base value.
struct ScanConfig {
  ScenarioConfig base;
  std::vector<std::pair<std::string, std::vector<nlohmann::json>>> grid;
  double max_basis_size = 2e6;

  static ScanConfig from_json(const nlohmann::json& j);
  std::vector<ScenarioConfig> points() const;
};

struct ScanResult {
  std::vector<ScenarioConfig> points;
  std::vector<Report> reports;
  Table table;  // grid values, record (check | measurement), name, value, pass

  bool all_pass() const;
  nlohmann::json to_json() const;
};

/// Runs every point, `jobs` at a time; rows keep point order. Throws
/// BudgetExceeded before running anything if a point is over budget.
ScanResult scan(const ScanConfig& config, int jobs = 1);

}  // namespace qstore::harness
