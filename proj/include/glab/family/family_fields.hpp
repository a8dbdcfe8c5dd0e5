#pragma once

#include "glab/core/types.hpp"
#include "glab/metrics/fiber_metric.hpp"
#include "glab/metrics/weight_field.hpp"

namespace glab::family {

using metrics::DetBundleWeight;
using metrics::FiberMetric;
using metrics::WeightField;

/// Fibration geometry at the stencil center (n = 1, chart z).
struct FamilyFields {
  ComplexField h_sb;   // d_s d_zbar phi
  RealField h_ss;      // d_s d_sbar phi
  ComplexField a;      // horizontal lift coefficient a^z = -g^{-1} h_sb
  ComplexField A;      // Kodaira-Spencer form A^z_zbar = d_zbar a^z
  RealField c_phi;     // geodesic curvature h_ss - |h_sb|^2 / g
  RealField A_normsq;  // |A|^2 with one g and one g^{-1}
  FiberMetric metric;  // fiber metric at the center
};

/// Requires a fiberwise positive weight on all nine stencil points.
FamilyFields family_fields(const WeightField& W);

/// Box_g f = -g^{-1} d dbar f for the fiber metric.
RealField box(const FiberMetric& metric, const projgeom::FiberGrid& grid, const RealField& f);

/// sup over the fiber of |A|.
double kodaira_spencer_residual(const FamilyFields& ff);
double kodaira_spencer_residual(const WeightField& W);

/// d_s d_sbar gamma at the center: curvature of (det E, e^{-gamma}).
double det_curvature(const DetBundleWeight& G, const metrics::BaseStencil& stencil);

struct EllipticResidual {
  RealField residual;  // (Box - r) c - (|A|^2 - R_det)
  double sup = 0.0;
  double isometry_defect = 0.0;
  bool hypothesis_holds = true;
};

/// Warns (does not fail) when the isometry defect exceeds `isometry_threshold`.
EllipticResidual elliptic_residual(const WeightField& W, const DetBundleWeight& G,
                                   double isometry_threshold = 1e-6);

struct TraceIdentity {
  double lhs = 0.0;  // integral of r c(phi) d(mu_omega)
  double rhs = 0.0;  // R_det / (r-1)!
};

TraceIdentity trace_identity(const WeightField& W, const DetBundleWeight& G,
                             double isometry_threshold = 1e-6);

/// Integral of f against d(mu_omega) = det(g) dV / pi^n of the fiber metric.
double integrate_metric(const FiberMetric& metric, const projgeom::FiberGrid& grid,
                        const RealField& f);

}  // namespace glab::family
