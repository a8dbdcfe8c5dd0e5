#pragma once

#include <string>
#include <vector>

#include "glab/experiments/config.hpp"
#include "glab/experiments/manifest.hpp"

namespace glab::experiments {

/// Check ids a scenario registers; each appears exactly once in its manifest.
const std::vector<std::string>& registered_checks(const std::string& scenario);

/// Runs the configured scenario. With `write_artifacts`, writes
/// <out>/manifest.json and the scenario's CSV/JSON files. Scenario failures
/// (including exceptions) are recorded as failed checks, never thrown.
RunManifest run_experiment(const ExperimentConfig& config, bool write_artifacts = true);

/// Criterion numbers covered by a scenario.
std::vector<int> scenario_criteria(const std::string& scenario);

}  // namespace glab::experiments
