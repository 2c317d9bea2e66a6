#include "test_support.hpp"

#include <qstore/harness.hpp>

#include <sstream>

using namespace qstore::harness;
using nlohmann::json;

namespace {

json with(ScenarioKind kind, json overrides) {
  json j = default_params(kind);
  for (const auto& [k, v] : overrides.items()) j[k] = v;
  return j;
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST(Config, EveryKindRoundTripsItsDefaults) {
  for (auto kind : all_scenarios()) {
    const auto c = ScenarioConfig::from_json(default_params(kind));
    EXPECT_EQ(c.kind, kind);
    EXPECT_EQ(c.to_json(), default_params(kind));
    EXPECT_EQ(scenario_from_string(to_string(kind)), kind);
    EXPECT_EQ(c.seed(), default_params(kind).at("seed").get<std::uint64_t>());
  }
  EXPECT_FALSE(scenario_from_string("nope").has_value());
}

TEST(Config, PartialConfigIsMergedWithDefaults) {
  const auto c = ScenarioConfig::from_json({{"schema_version", 1}, {"scenario", "swap"}, {"trials", 3}});
  EXPECT_EQ(c.params.at("trials"), 3);
  EXPECT_EQ(c.params.at("max_quanta"), default_params(ScenarioKind::swap).at("max_quanta"));
}

TEST(Config, AllViolationsAreListed) {
  try {
    ScenarioConfig::from_json(
        {{"schema_version", 1}, {"scenario", "verify-dicke"}, {"atoms", "x"}, {"bogus", 1}, {"seed", -4}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.violations().size(), 3u);
    const std::string all = e.what();
    for (const char* key : {"atoms", "bogus", "seed"}) EXPECT_NE(all.find(key), std::string::npos) << key;
  }
  try {
    ScenarioConfig::from_json({{"scenario", "no-such-scenario"}});
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.violations().size(), 2u);
  }
  EXPECT_THROW(ScenarioConfig::from_json(json::array()), ConfigError);
  EXPECT_THROW(ScenarioConfig::from_json(with(ScenarioKind::verify_dicke, {{"schema_version", 2}})), ConfigError);
}

TEST(Config, SemanticChecks) {
  EXPECT_THROW(ScenarioConfig::from_json(with(ScenarioKind::verify_dicke, {{"tolerance", -1.0}})), ConfigError);
  EXPECT_THROW(ScenarioConfig::from_json(with(ScenarioKind::verify_dicke, {{"geometry", "spiral"}})), ConfigError);
  EXPECT_THROW(ScenarioConfig::from_json(with(ScenarioKind::verify_dicke, {{"geometry", "file"}})), ConfigError);
}

TEST(Checks, CompareModes) {
  EXPECT_TRUE(make_check("a", "i", "trivial", Compare::abs_diff, 1.0, 1.0 + 1e-13, 1e-12).pass);
  EXPECT_FALSE(make_check("a", "i", "trivial", Compare::abs_diff, 1.0, 1.1, 1e-12).pass);
  EXPECT_TRUE(make_check("a", "i", "trivial", Compare::rel_diff, 1e6, 1e6 + 1e-5, 1e-10).pass);
  EXPECT_TRUE(make_check("a", "i", "trivial", Compare::at_most, 0.9, 0.9, 0).pass);
  EXPECT_FALSE(make_check("a", "i", "trivial", Compare::less_than, 0.9, 0.9, 0).pass);
  EXPECT_TRUE(make_check("a", "i", "trivial", Compare::at_least, 0.999, 0.9991, 0).pass);
  const Check f = failed_check("b", "i", "oracle", "boom");
  EXPECT_FALSE(f.pass);
  EXPECT_EQ(f.to_json().at("error"), "boom");
  EXPECT_TRUE(f.to_json().at("actual").is_null());
}

TEST(Checks, ReportWithoutChecksDoesNotPass) {
  Report r;
  EXPECT_FALSE(r.all_pass());
  r.checks.push_back(make_check("a", "i", "trivial", Compare::abs_diff, 0, 0, 0));
  EXPECT_TRUE(r.all_pass());
}

TEST(Output, DoublesRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  for (double v : {1.0 / 3.0, 1e-300, -2.5e17, 0.30000000000000004}) EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST(Output, CsvHeaders) {
  const Report r = run(ScenarioConfig::defaults(ScenarioKind::verify_dicke));
  std::ostringstream os;
  write_checks_csv(r.checks, os);
  EXPECT_EQ(first_line(os.str()), "name,expected,actual,tolerance,compare,pass,provenance,identity");
  const Report c = run(ScenarioConfig::defaults(ScenarioKind::commutator_scan));
  std::ostringstream data;
  write_csv(c.table, data);
  EXPECT_EQ(first_line(data.str()), "atoms,k,k_prime,dk_times_length,residual,phase_sum_over_n,envelope");
}

TEST(Run, DefaultScenariosPass) {
  for (auto kind : all_scenarios()) {
    if (kind == ScenarioKind::adiabatic_sweep) continue;  // covered by the acceptance run
    const Report r = run(ScenarioConfig::defaults(kind));
    EXPECT_TRUE(r.all_pass()) << to_string(kind);
    for (const auto& c : r.checks) {
      EXPECT_TRUE(c.provenance == "closed-form" || c.provenance == "trivial" || c.provenance == "oracle") << c.name;
    }
  }
}

TEST(Run, ReportsAreBitReproducible) {
  for (auto kind : {ScenarioKind::swap, ScenarioKind::verify_ladder, ScenarioKind::dynamic_transfer}) {
    const auto c = ScenarioConfig::defaults(kind);
    EXPECT_EQ(run(c).to_json().dump(), run(c).to_json().dump()) << to_string(kind);
  }
  auto c = ScenarioConfig::defaults(ScenarioKind::swap);
  const std::string a = run(c).to_json().dump();
  c.set_seed(12345);
  EXPECT_NE(run(c).to_json().dump(), a);
}

TEST(Run, RuntimeOnlyWhenRequested) {
  const auto plain = run(ScenarioConfig::defaults(ScenarioKind::verify_dicke)).to_json();
  EXPECT_FALSE(plain.contains("runtime_seconds"));
  const auto timed = run(ScenarioConfig::from_json(with(ScenarioKind::verify_dicke, {{"record_runtime", true}})));
  ASSERT_TRUE(timed.runtime_seconds.has_value());
  EXPECT_GE(*timed.runtime_seconds, 0.0);
}

TEST(Run, PositionFileGeometry) {
  const std::string path = std::string(QSTORE_TEST_DATA) + "/positions.txt";
  const json base = {
      {"geometry", "file"}, {"geometry_file", path}, {"geometry_length", 4.0}, {"atoms", json::array({4})}, {"occupancies", json::array({json::array({1, 1})})}};
  const Report ok = run(ScenarioConfig::from_json(with(ScenarioKind::normalization_audit, base)));
  EXPECT_TRUE(ok.all_pass());
  json wrong = base;
  wrong["atoms"] = json::array({8});
  const Report bad = run(ScenarioConfig::from_json(with(ScenarioKind::normalization_audit, wrong)));
  EXPECT_FALSE(bad.all_pass());
  bool saw_error = false;
  for (const auto& c : bad.checks) saw_error = saw_error || (c.error && c.error->find("positions") != std::string::npos);
  EXPECT_TRUE(saw_error);
}

TEST(Scan, SinglePointEqualsRun) {
  const json j = {{"base", default_params(ScenarioKind::verify_dicke)}, {"grid", {{"tolerance", json::array({1e-10})}}}};
  const auto s = ScanConfig::from_json(j);
  const auto res = scan(s);
  ASSERT_EQ(res.reports.size(), 1u);
  EXPECT_EQ(res.reports[0].to_json(), run(s.points()[0]).to_json());
}

TEST(Scan, LastKeyRunsFastest) {
  const json j = {{"base", default_params(ScenarioKind::verify_dicke)},
                  {"grid", {{"atoms", json::array({2, 3})}, {"wavevector", json::array({0.1, 0.2, 0.3})}}}};
  const auto pts = ScanConfig::from_json(j).points();
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[1].params.at("atoms"), json::array({2}));
  EXPECT_EQ(pts[1].params.at("wavevector"), 0.2);
  EXPECT_EQ(pts[3].params.at("atoms"), json::array({3}));
  EXPECT_EQ(pts[3].params.at("wavevector"), 0.1);
}

TEST(Scan, ParallelPointsMatchSerial) {
  const json j = {{"base", default_params(ScenarioKind::swap)}, {"grid", {{"seed", json::array({1, 2, 3, 4})}}}};
  const auto s = ScanConfig::from_json(j);
  const auto a = scan(s, 1);
  const auto b = scan(s, 3);
  EXPECT_EQ(a.to_json(), b.to_json());
  EXPECT_EQ(a.table.rows, b.table.rows);
  EXPECT_EQ(a.table.columns, (std::vector<std::string>{"seed", "record", "name", "value", "pass"}));
}

TEST(Scan, BudgetIsCheckedBeforeRunning) {
  const json j = {{"base", default_params(ScenarioKind::verify_ladder)},
                  {"grid", {{"atoms", json::array({4, 40})}}},
                  {"max_basis_size", 1000}};
  try {
    scan(ScanConfig::from_json(j));
    FAIL() << "expected BudgetExceeded";
  } catch (const BudgetExceeded& e) {
    EXPECT_GT(e.estimate(), 1000);
    EXPECT_EQ(e.budget(), 1000);
  }
}

TEST(Scan, RejectsBadGrids) {
  const json base = default_params(ScenarioKind::verify_dicke);
  EXPECT_THROW(ScanConfig::from_json({{"base", base}, {"grid", {{"nope", json::array({1})}}}}), ConfigError);
  EXPECT_THROW(ScanConfig::from_json({{"base", base}, {"grid", {{"tolerance", json::array()}}}}), ConfigError);
  EXPECT_THROW(ScanConfig::from_json({{"base", base}, {"grid", {{"tolerance", json::array({"x"})}}}}), ConfigError);
  EXPECT_THROW(ScanConfig::from_json({{"grid", json::object()}}), ConfigError);
  EXPECT_THROW(ScanConfig::from_json({{"base", base}, {"grid", json::object()}, {"extra", 1}}), ConfigError);
}
