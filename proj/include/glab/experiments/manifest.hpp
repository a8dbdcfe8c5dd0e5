#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace glab::experiments {

/// One measured quantity against its tolerance.
struct Check {
  std::string id;  // "c<criterion>.<name>"
  int criterion = 0;
  std::string description;
  double measured = 0.0;
  std::string relation;  // "<=" or ">="
  double tolerance = 0.0;
  bool passed = false;
  std::string note;
};

Check check_le(std::string id, int criterion, std::string description, double measured, double tolerance);
Check check_ge(std::string id, int criterion, std::string description, double measured, double tolerance);

struct RunManifest {
  std::string scenario;
  nlohmann::json config;
  std::string version;
  std::string started;   // UTC, ISO 8601
  std::string finished;
  std::vector<Check> checks;
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;

  bool passed() const;
};

nlohmann::json manifest_to_json(const RunManifest& m);

enum class ReportFormat { text, json };
ReportFormat parse_report_format(const std::string& name);

/// Text: failures first, then every check in order. JSON: the manifest.
/// Deterministic given the manifest.
std::string emit_report(const RunManifest& m, ReportFormat format);

}  // namespace glab::experiments
