#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "glab/experiments/config.hpp"
#include "glab/experiments/manifest.hpp"
#include "glab/experiments/scenarios.hpp"

using namespace glab;
using namespace glab::experiments;
using nlohmann::json;

namespace {

std::string config_error(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("config JSON round trip") {
  const json j = json::parse(R"({
    "scenario": "flow", "resolution": {"n_theta": 32, "n_phi": 64}, "stencil_h": 0.02,
    "family": {"type": "exp_quadratic", "B": [[1, [0.2, 0.3]], [[0.2, -0.3], 0.7]]},
    "perturbations": [{"amplitude": 0.1, "base": "s", "shape": "z2_over_q2"}],
    "random_perturbation": {"amplitude": 0.05},
    "flow": {"dt": 0.02, "scheme": "rk4"}, "seed": 9, "threads": 2})");
  const auto c = config_from_json(j);
  CHECK(c.scenario == "flow");
  CHECK(c.resolution.n_theta == 32);
  CHECK(c.family.B(0, 1) == Complex(0.2, 0.3));
  CHECK(c.perturbations.size() == 1);
  CHECK(c.perturbations[0].base == metrics::BaseFactor::s);
  CHECK(c.flow.scheme == flow::Scheme::rk4);
  CHECK(c.flow.tol == 1e-8);
  CHECK(c.seed == 9);
  CHECK(config_to_json(config_from_json(config_to_json(c))) == config_to_json(c));
}

TEST_CASE("config errors name the field") {
  CHECK(config_error(json{{"scenario", "nope"}}).find("field 'scenario'") != std::string::npos);
  CHECK(config_error(json{{"flow", {{"dt", -1.0}}}}).find("field 'flow.dt'") != std::string::npos);
  CHECK(config_error(json{{"flow", {{"dtt", 1.0}}}}).find("field 'flow.dtt': unknown field") != std::string::npos);
  CHECK(config_error(json{{"rank", 3}}).find("field 'rank'") != std::string::npos);
  CHECK(config_error(json{{"stencil_h", "small"}}).find("wrong type") != std::string::npos);
  CHECK(config_error(json::parse(R"({"family": {"B": [[1, 0]]}})")).find("family.B") != std::string::npos);
  CHECK(config_error(json::parse(R"({"perturbations": [{"shape": "wavy"}]})")).find("perturbations[0].shape") !=
        std::string::npos);
  CHECK(config_error(json::parse(R"({"flow": {"scheme": "leapfrog"}})")).find("flow.scheme") != std::string::npos);
  CHECK(config_error(json::parse(R"({"family": {"type": "constant", "H": [[1, 0], [0, -1]]}})"))
            .find("field 'family'") != std::string::npos);
}

TEST_CASE("config file parse errors carry a position") {
  const auto path = std::filesystem::temp_directory_path() / "glab_test_config.json";
  {
    std::ofstream f(path);
    f << "{\n  \"scenario\": \"flow\",\n  \"rank\": ,\n}\n";
  }
  const std::string where = path.string() + ":3:";
  CHECK_THROWS_WITH_AS(load_config(path.string()), doctest::Contains(where.c_str()), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("resolution strings") {
  CHECK(parse_resolution("32x64").n_theta == 32);
  CHECK(parse_resolution("32x64").n_phi == 64);
  for (const char* bad : {"32", "x64", "32x", "32x64x2", "ax b"}) CHECK_THROWS_AS(parse_resolution(bad), ConfigError);
}

TEST_CASE("checks and report ordering") {
  CHECK(check_le("c1.a", 1, "", 1e-12, 1e-10).passed);
  CHECK_FALSE(check_le("c1.a", 1, "", std::nan(""), 1e-10).passed);
  CHECK(check_ge("c8.rate", 8, "", 1.7, 1e-6).passed);
  CHECK_FALSE(check_ge("c8.rate", 8, "", std::nan(""), 1e-6).passed);

  RunManifest m;
  m.scenario = "demo";
  m.checks = {check_le("c1.first", 1, "ok", 0.0, 1.0), check_le("c2.second", 2, "bad", 2.0, 1.0)};
  CHECK_FALSE(m.passed());
  const auto text = emit_report(m, ReportFormat::text);
  const auto failures = text.find("failures:");
  const auto all = text.find("checks:");
  REQUIRE(failures != std::string::npos);
  CHECK(failures < all);
  CHECK(text.find("FAIL c2.second") < all);
  CHECK(text.find("PASS c1.first") > all);
  CHECK(emit_report(m, ReportFormat::text) == text);

  const auto j = json::parse(emit_report(m, ReportFormat::json));
  CHECK(j["passed"] == false);
  CHECK(j["checks"].size() == 2);
  CHECK_THROWS_AS(parse_report_format("xml"), Error);
}

TEST_CASE("scenarios register every criterion once") {
  std::vector<int> all;
  for (const auto& s : scenario_names())
    for (int c : scenario_criteria(s)) all.push_back(c);
  std::sort(all.begin(), all.end());
  CHECK(all == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
  CHECK_THROWS_AS(registered_checks("nope"), Error);
}

TEST_CASE("run_experiment reports every registered check") {
  ExperimentConfig c;
  c.scenario = "check-theorem1";
  c.resolution = {24, 48};
  const auto m = run_experiment(c, false);
  const auto& ids = registered_checks(c.scenario);
  REQUIRE(m.checks.size() == ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(m.checks[i].id == ids[i]);
  CHECK(m.passed());
  CHECK(m.started.size() == 20);
}

TEST_CASE("a failing scenario still lists all checks") {
  ExperimentConfig c;
  c.scenario = "check-theorem1";
  c.resolution = {24, 48};
  c.family.type = "constant";  // flat family: no closed-form positivity to compare
  const auto m = run_experiment(c, false);
  CHECK(m.checks.size() == registered_checks(c.scenario).size());
  CHECK_FALSE(m.passed());
}

TEST_CASE("artifacts are written to the output directory") {
  const auto dir = std::filesystem::temp_directory_path() / "glab_test_artifacts";
  std::filesystem::remove_all(dir);
  ExperimentConfig c;
  c.scenario = "l2metric";
  c.resolution = {16, 32};
  c.out = dir.string();
  const auto m = run_experiment(c);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  std::ifstream f(dir / "manifest.json");
  const auto j = json::parse(f);
  CHECK(j["scenario"] == "l2metric");
  CHECK(j["checks"].size() == m.checks.size());
  std::filesystem::remove_all(dir);
}

TEST_CASE("shipped configs load") {
  int n = 0;
  for (const auto& e : std::filesystem::directory_iterator(GLAB_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW(load_config(e.path().string()));
    ++n;
  }
  CHECK(n >= 5);
}
