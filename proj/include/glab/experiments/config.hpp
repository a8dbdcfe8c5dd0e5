#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "glab/core/types.hpp"
#include "glab/flow/kr_flow.hpp"
#include "glab/metrics/hermitian_family.hpp"
#include "glab/metrics/weight_field.hpp"
#include "glab/projgeom/fiber_grid.hpp"

namespace glab::experiments {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Hermitian family on E: constant H, diagonal d, or M^{1/2} e^{-s sbar B} M^{1/2}.
struct FamilySpec {
  std::string type = "exp_quadratic";
  CMatrix B = CMatrix::Identity(2, 2);
  CMatrix M = CMatrix::Identity(2, 2);
  CMatrix H = CMatrix::Identity(2, 2);
  std::vector<double> d = {1.0, 2.0};

  metrics::HermitianFamily build() const;
};

struct FlowSpec {
  double dt = 0.05;
  double tol = 1e-8;
  double t_max = 20.0;
  flow::Scheme scheme = flow::Scheme::imex;
  int sample_every = 1;
};

struct ExperimentConfig {
  std::string scenario = "verify-identities";
  int rank = 2;
  projgeom::Resolution resolution{64, 128};
  double stencil_h = 0.01;
  FamilySpec family;
  std::vector<metrics::Perturbation> perturbations = {
      {0.3, 0.0, metrics::BaseFactor::one, metrics::FiberShape::eigen, 0, 1}};
  double random_amplitude = 0.0;  // seeded eigenfunction combination on top, 0 = off
  FlowSpec flow;
  std::string out = "glab-out";
  unsigned long seed = 0;
  int threads = 0;  // 0 = OpenMP default
};

const std::vector<std::string>& scenario_names();

/// Field-level validation; throws ConfigError naming the field.
void validate(const ExperimentConfig& config);

/// Throws ConfigError with the JSON path of the offending field.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Parses a config file; parse errors carry line and column.
ExperimentConfig load_config(const std::string& path);

/// "64x128" -> resolution.
projgeom::Resolution parse_resolution(const std::string& text);

}  // namespace glab::experiments
