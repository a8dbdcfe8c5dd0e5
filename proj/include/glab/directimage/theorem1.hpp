#pragma once

#include "glab/core/types.hpp"
#include "glab/directimage/l2_metric.hpp"
#include "glab/metrics/fiber_metric.hpp"

namespace glab::directimage {

struct Theorem1Options {
  double isometry_threshold = 1e-6;
  int spot_checks = 16;
  unsigned long seed = 0;
};

struct Theorem1Report {
  CMatrix M;                // fitted hermitian form, phi ~ log(w^dagger M^{-1} w) + const
  CMatrix T;                // fitted coordinates W = T w, T^dagger T = M^{-1}
  CMatrix lambda;           // eigen-expansion of c(phi) in the coordinates W
  double trace_offset = 0.0;
  double eigen_residual = 0.0;
  double delta = 0.0;       // mean of e^{-phi} |T w|^2
  double delta_osc = 0.0;   // its oscillation over the fiber
  CMatrix theta_fd;         // Chern curvature of the L^2 metric, section basis
  CMatrix theta_predicted;  // delta lambda / r! mapped to the section basis
  double relative_mismatch = 0.0;
  double griffiths_min = 0.0;
  bool positive = false;
  double c_min = 0.0;
  bool c_negative = false;
  double identity_residual = 0.0;  // spot check of (r!/delta) W^dagger Theta W / |W|^2 = c
  double isometry_defect = 0.0;
  double trace_lhs = 0.0;  // integral of r c(phi) d(mu_omega)
  double trace_rhs = 0.0;  // R_det / (r-1)! from G
};

/// End-to-end consistency chain for a weight on O_E(1): fit coordinates in
/// which the fiber metric is Fubini-Study, expand c(phi) in the first
/// eigenspace, predict the curvature of the L^2 metric and compare it with the
/// finite-difference Chern curvature.
Theorem1Report theorem1_report(const WeightField& W, const metrics::DetBundleWeight& G,
                               const Theorem1Options& options = {});

}  // namespace glab::directimage
