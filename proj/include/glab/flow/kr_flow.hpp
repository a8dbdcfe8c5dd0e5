#pragma once

#include <optional>
#include <string>
#include <vector>

#include "glab/core/types.hpp"
#include "glab/flow/measures.hpp"
#include "glab/metrics/weight_field.hpp"

namespace glab::flow {

/// euler and rk4 are explicit. imex treats kappa * Laplacian_S implicitly
/// (diagonal in spherical harmonics) and the rest explicitly; it is first
/// order and keeps the fixed points of the flow.
enum class Scheme { euler, rk4, imex };
std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& name);

/// Relative Kaehler-Ricci flow d/dt phi = u(phi) on every stencil fiber.
struct FlowState {
  double t = 0.0;
  WeightField W;                    // k = r
  std::vector<RealField> velocity;  // u per stencil point at time t
  double min_conformal = 0.0;       // smallest g / g_FS over the stencil fibers
  double dt_used = 0.0;             // substep of the last step
};

struct StepOptions {
  int max_halvings = 10;
  double imex_kappa = 0.0;  // 0: 1 / (smallest conformal factor) of the current state
  Exec exec = Exec::parallel;
};

/// Evaluates the velocity of W0; throws if W0 is not fiberwise positive.
FlowState initial_state(WeightField W0, Exec exec = Exec::parallel);

/// Advances all stencil fibers by dt. If a stage loses positivity the step is
/// redone as 2^j substeps of dt / 2^j, j = 1..max_halvings, the same on all
/// fibers; throws "step rejected" when every subdivision fails.
FlowState flow_step(const FlowState& state, double dt, Scheme scheme, const StepOptions& options = {});

/// sup over the stencil fibers of |u|.
double sup_velocity(const FlowState& state);

/// One row of the diagnostics CSV.
struct FlowSample {
  double t = 0.0;
  double sup_u = 0.0;
  double min_c_over_r = 0.0;  // min over the center fiber of c(phi_t) / r
  double iso_defect = 0.0;    // isometry defect of phi_t / r at the center
  double psi_ss = 0.0;        // d_s d_sbar psi, psi = -log integral |u_s|^2 e^{-phi_t}
  double residual_raw = 0.0;  // sup |R| of the evolution equation, NaN at the ends
  double residual_rescaled = 0.0;
};

struct FlowDiagnostics {
  std::vector<FlowSample> samples;
  std::optional<double> rate;  // fitted decay rate of sup|u_t| over samples with sup|u_t| < 0.1
};

struct FlowParams {
  double dt = 0.05;
  double tol = 1e-8;
  double t_max = 20.0;
  Scheme scheme = Scheme::imex;
  int sample_every = 1;       // steps between diagnostic samples
  bool monitor = true;        // evaluate family fields and the evolution residual
  bool keep_trajectory = false;
  StepOptions step;
};

struct FlowResult {
  FlowState final_state;
  FlowDiagnostics diagnostics;
  std::vector<FlowState> trajectory;  // sampled states when keep_trajectory
  bool converged = false;
  int steps = 0;
  std::string outcome;
};

/// Integrates until sup|u_t| < tol or t_max. Non-convergence is an outcome,
/// not an error.
FlowResult run_flow(const WeightField& W0, const FlowParams& params = {});

/// Fields of the evolution equation on the center fiber at one time.
struct MonitorFields {
  double t = 0.0;
  RealField c;          // c(phi_t)
  RealField rhs_raw;    // -Box_omega c + r c + |A|^2 - psi_ss
  RealField rhs_rescaled;  // -Box_omega~ c~ + r c~ + |A|^2 - psi_ss, c~ = c / r
  double psi_ss = 0.0;
  double min_c = 0.0;
};

MonitorFields monitor_fields(const FlowState& state, const DetTrivialization& triv = {});

struct EvolutionResidual {
  RealField raw;       // d_t c - rhs_raw
  RealField rescaled;  // d_t c - rhs_rescaled
  double sup_raw = 0.0;
  double sup_rescaled = 0.0;
  double dt_error = 0.0;  // Richardson estimate of the d_t error (5-sample window)
  bool dt_too_coarse = false;  // dt_error exceeds the rescaled residual
};

/// Residual at the middle of 3 or 5 equally spaced samples, d_t by central
/// differences over the inner pair. A 5-sample window also estimates the d_t
/// error from the outer pair.
EvolutionResidual evolution_residual(const std::vector<MonitorFields>& window);

/// Evolution residual at every interior sample of a stored trajectory (uniform
/// spacing). Warns once if the time step is too coarse.
std::vector<EvolutionResidual> evolution_residual(const std::vector<FlowState>& trajectory);

struct PositivityMonitor {
  std::vector<double> min_c;  // min over the center fiber of c(phi_t)
  std::optional<std::size_t> first_sign_change;
};

PositivityMonitor positivity_monitor(const FlowDiagnostics& diagnostics, int rank);

/// Largest fiber oscillation over the stencil of log det g + phi - psi.
double limit_splitting(const WeightField& W, const DetTrivialization& triv = {});

}  // namespace glab::flow
