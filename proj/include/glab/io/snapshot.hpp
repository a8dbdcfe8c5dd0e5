#pragma once

#include <string>

#include "json.hpp"

#include "glab/metrics/weight_field.hpp"

namespace glab::io {

/// Weight field snapshot for restarts. Stores the smooth part
/// phi - k log(1+|z|^2) per stencil point with the grid and stencil parameters.
nlohmann::json weight_to_json(const metrics::WeightField& W, double t);

struct Snapshot {
  metrics::WeightField W;
  double t = 0.0;
};

/// Rebuilds the grid from the stored resolution; throws on malformed input.
Snapshot weight_from_json(const nlohmann::json& j);

void save_snapshot(const std::string& path, const metrics::WeightField& W, double t);
Snapshot load_snapshot(const std::string& path);

}  // namespace glab::io
