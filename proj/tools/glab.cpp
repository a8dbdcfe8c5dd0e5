#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "glab/experiments/config.hpp"
#include "glab/experiments/scenarios.hpp"

using namespace glab::experiments;

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on relative Kaehler-Ricci flow and direct images"};

  std::string scenario, config_path, out, resolution, format = "text";
  std::optional<unsigned long> seed;
  std::optional<double> dt;
  std::optional<int> threads;

  std::string names;
  for (const auto& n : scenario_names()) names += (names.empty() ? "" : ", ") + n;
  app.add_option("scenario,--scenario", scenario, "Scenario: " + names);
  app.add_option("--config", config_path, "JSON config file; defaults are used when omitted")
      ->check(CLI::ExistingFile);
  app.add_option("--out", out, "Output directory for the manifest and artifacts");
  app.add_option("--seed", seed, "Seed for random perturbations");
  app.add_option("--resolution", resolution, "Fiber grid NTHETAxNPHI, e.g. 64x128");
  app.add_option("--dt", dt, "Flow time step");
  app.add_option("--format", format, "Report format")->check(CLI::IsMember({"text", "json"}));
  app.add_option("--threads", threads, "OpenMP threads (0 = default)")->check(CLI::NonNegativeNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    if (!scenario.empty()) config.scenario = scenario;
    if (!out.empty()) config.out = out;
    if (seed) config.seed = *seed;
    if (!resolution.empty()) config.resolution = parse_resolution(resolution);
    if (dt) config.flow.dt = *dt;
    if (threads) config.threads = *threads;
    validate(config);

    const RunManifest m = run_experiment(config);
    std::cout << emit_report(m, parse_report_format(format));
    return m.passed() ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "glab: " << e.what() << '\n';
    return 2;
  }
}
