#include "glab/experiments/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "glab/core/types.hpp"
#include "glab/io/csv.hpp"

namespace glab::experiments {

using nlohmann::json;

Check check_le(std::string id, int criterion, std::string description, double measured, double tolerance) {
  Check c{std::move(id), criterion, std::move(description), measured, "<=", tolerance, false, {}};
  c.passed = std::isfinite(measured) && measured <= tolerance;
  return c;
}

Check check_ge(std::string id, int criterion, std::string description, double measured, double tolerance) {
  Check c{std::move(id), criterion, std::move(description), measured, ">=", tolerance, false, {}};
  c.passed = std::isfinite(measured) && measured >= tolerance;
  return c;
}

bool RunManifest::passed() const {
  return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

json manifest_to_json(const RunManifest& m) {
  json j;
  j["scenario"] = m.scenario;
  j["passed"] = m.passed();
  j["version"] = m.version;
  j["started"] = m.started;
  j["finished"] = m.finished;
  j["config"] = m.config;
  j["checks"] = json::array();
  for (const auto& c : m.checks) {
    json e = {{"id", c.id},
              {"criterion", c.criterion},
              {"description", c.description},
              {"relation", c.relation},
              {"tolerance", c.tolerance},
              {"passed", c.passed}};
    // NaN is not representable in JSON.
    e["measured"] = std::isfinite(c.measured) ? json(c.measured) : json(io::format_double(c.measured));
    if (!c.note.empty()) e["note"] = c.note;
    j["checks"].push_back(e);
  }
  j["artifacts"] = m.artifacts;
  j["warnings"] = m.warnings;
  return j;
}

ReportFormat parse_report_format(const std::string& name) {
  if (name == "text") return ReportFormat::text;
  if (name == "json") return ReportFormat::json;
  throw Error("unknown report format '" + name + "' (expected text or json)");
}

std::string emit_report(const RunManifest& m, ReportFormat format) {
  if (format == ReportFormat::json) return manifest_to_json(m).dump(2) + "\n";
  std::string out;
  char line[512];
  auto row = [&](const Check& c) {
    std::snprintf(line, sizeof line, "%-4s %-34s %12.4e %s %-10.3e %s\n", c.passed ? "PASS" : "FAIL", c.id.c_str(),
                  c.measured, c.relation.c_str(), c.tolerance, c.description.c_str());
    out += line;
    if (!c.note.empty()) out += "     note: " + c.note + "\n";
  };
  const auto failed = std::count_if(m.checks.begin(), m.checks.end(), [](const Check& c) { return !c.passed; });
  out += "scenario " + m.scenario + ": " + (m.passed() ? "PASS" : "FAIL") + " (" +
         std::to_string(m.checks.size() - failed) + "/" + std::to_string(m.checks.size()) + " checks)\n";
  if (failed > 0) {
    out += "failures:\n";
    for (const auto& c : m.checks)
      if (!c.passed) row(c);
  }
  out += "checks:\n";
  for (const auto& c : m.checks) row(c);
  for (const auto& w : m.warnings) out += "warning: " + w + "\n";
  for (const auto& a : m.artifacts) out += "artifact: " + a + "\n";
  return out;
}

}  // namespace glab::experiments
