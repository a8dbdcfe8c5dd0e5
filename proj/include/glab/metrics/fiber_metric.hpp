#pragma once

#include <vector>

#include "glab/core/types.hpp"
#include "glab/metrics/weight_field.hpp"
#include "glab/projgeom/fiber_grid.hpp"

namespace glab::metrics {

using projgeom::TensorField;

/// Fiber Kaehler metric g = d d-bar phi of a weight at one stencil point.
struct FiberMetric {
  TensorField g;
  TensorField g_inv;
  RealField log_det;
  /// g / g_FS = k + Laplacian_S(phi - k log(1+|z|^2)); positive, smooth.
  RealField conformal;
};

/// Throws with the worst node and its smallest eigenvalue if g is not positive.
FiberMetric fiber_metric(const WeightField& W, int point);

/// g / g_FS without building the full metric; throws like fiber_metric.
RealField conformal_factor(const WeightField& W, int point);

/// Weight gamma(s) of a metric G = e^{-gamma} on det E, one value per stencil point.
struct DetBundleWeight {
  std::vector<double> gamma;
};

struct IsometryDefect {
  std::vector<double> defect;  // osc_z psi per stencil point
  DetBundleWeight G;           // Fubini-Study mean of psi per stencil point
};

/// psi = log det g + (n+1) phi. Fiber-constant psi means the fiber metric is
/// Fubini-Study and the anticanonical isomorphism is an isometry for
/// G = e^{-gamma}, gamma = mean of psi. Requires k = 1.
IsometryDefect isometry_defect(const WeightField& W);

/// log det g + coeff * phi, assembled from smooth pieces (no cancellation of
/// large logarithms near the far pole).
RealField log_det_plus(const WeightField& W, int point, double coeff);

}  // namespace glab::metrics
