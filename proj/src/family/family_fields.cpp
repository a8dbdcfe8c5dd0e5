#include "glab/family/family_fields.hpp"

#include <cmath>
#include <string>

#include "glab/core/log.hpp"
#include "glab/projgeom/fiber_ops.hpp"

namespace glab::family {

using metrics::BaseStencil;

RealField box(const FiberMetric& metric, const projgeom::FiberGrid& grid, const RealField& f) {
  // -g^{-1} d dbar f = -Laplacian_S f / (g / g_FS)
  auto out = projgeom::sphere_laplacian(grid, f);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -out[i] / metric.conformal[i];
  return out;
}

double integrate_metric(const FiberMetric& metric, const projgeom::FiberGrid& grid,
                        const RealField& f) {
  RealField dens(f.size());
  const auto gfs = grid.fs_density();
  for (std::size_t i = 0; i < f.size(); ++i)
    dens[i] = f[i] * gfs[i] * metric.conformal[i] / std::pow(kPi, grid.dim());
  return projgeom::integrate_fiber(grid, dens);
}

FamilyFields family_fields(const WeightField& W) {
  const auto& grid = *W.grid;
  if (W.values.size() != BaseStencil::kPoints)
    throw Error("family_fields: need a weight on all 9 stencil points");
  for (int p = 0; p < BaseStencil::kPoints; ++p) metrics::conformal_factor(W, p);

  // Differences against the center: the stencil weights sum to zero, and
  // identical fibers then cancel exactly.
  std::vector<RealField> smooth(BaseStencil::kPoints);
  const auto& c0 = W.center();
  for (int p = 0; p < BaseStencil::kPoints; ++p) {
    smooth[p] = W.smooth_part(p);
    for (std::size_t i = 0; i < c0.size(); ++i) smooth[p][i] -= c0[i];
  }

  FamilyFields ff;
  ff.metric = metrics::fiber_metric(W, BaseStencil::kCenter);
  const auto& sigma = ff.metric.conformal;
  const std::size_t N = grid.size();

  // Mixed derivatives: fiber derivative of the base difference.
  const ComplexField phi_s = BaseStencil::apply_fields(W.stencil.ds_weights(), smooth);
  ff.h_ss = BaseStencil::apply_fields(W.stencil.ddbar_weights(), smooth);
  ff.h_sb = projgeom::dzbar(grid, phi_s);

  const auto gfs = grid.fs_density();
  const auto x = grid.cos_theta();
  const ComplexField sigma_c(sigma.begin(), sigma.end());
  const auto dsigma = projgeom::dzbar(grid, sigma_c);
  const auto dh = projgeom::dzbar(grid, ff.h_sb);

  ff.a.resize(N);
  ff.A.resize(N);
  ff.c_phi.resize(N);
  ff.A_normsq.resize(N);
  for (std::size_t i = 0; i < N; ++i) {
    const double g = gfs[i] * sigma[i];
    const Complex z = grid.nodes()[i].z;
    // d_zbar g / g = -2 z / (1+|z|^2) + d_zbar sigma / sigma
    const Complex dlog_g = -z * (1.0 + x[i]) + dsigma[i] / sigma[i];
    ff.a[i] = -ff.h_sb[i] / g;
    ff.A[i] = (-dh[i] + ff.h_sb[i] * dlog_g) / g;
    ff.c_phi[i] = ff.h_ss[i] - std::norm(ff.h_sb[i]) / g;
    ff.A_normsq[i] = std::norm(ff.A[i]);
  }
  return ff;
}

double kodaira_spencer_residual(const FamilyFields& ff) {
  double m = 0.0;
  for (const auto& v : ff.A) m = std::max(m, std::abs(v));
  return m;
}

double kodaira_spencer_residual(const WeightField& W) {
  return kodaira_spencer_residual(family_fields(W));
}

double det_curvature(const DetBundleWeight& G, const BaseStencil& stencil) {
  if (G.gamma.size() != BaseStencil::kPoints)
    throw Error("det_curvature: need gamma on all 9 stencil points");
  return stencil.ddbar(G.gamma);
}

namespace {

double check_hypothesis(const WeightField& W, double threshold, const char* what) {
  if (W.k != 1) throw Error(std::string(what) + ": expects a weight on O_E(1)");
  const double defect = metrics::isometry_defect(W).defect[BaseStencil::kCenter];
  if (defect > threshold)
    warn(std::string(what) + ": isometry defect " + std::to_string(defect) +
         " exceeds threshold; the identity is not expected to hold");
  return defect;
}

}  // namespace

EllipticResidual elliptic_residual(const WeightField& W, const DetBundleWeight& G,
                                   double isometry_threshold) {
  EllipticResidual out;
  out.isometry_defect = check_hypothesis(W, isometry_threshold, "elliptic_residual");
  out.hypothesis_holds = out.isometry_defect <= isometry_threshold;
  const auto ff = family_fields(W);
  const double R = det_curvature(G, W.stencil);
  const double r = W.grid->rank();
  const auto bc = box(ff.metric, *W.grid, ff.c_phi);
  out.residual.resize(bc.size());
  for (std::size_t i = 0; i < bc.size(); ++i) {
    out.residual[i] = (bc[i] - r * ff.c_phi[i]) - (ff.A_normsq[i] - R);
    out.sup = std::max(out.sup, std::abs(out.residual[i]));
  }
  return out;
}

TraceIdentity trace_identity(const WeightField& W, const DetBundleWeight& G,
                             double isometry_threshold) {
  check_hypothesis(W, isometry_threshold, "trace_identity");
  const auto ff = family_fields(W);
  const int r = W.grid->rank();
  RealField rc(ff.c_phi.size());
  for (std::size_t i = 0; i < rc.size(); ++i) rc[i] = r * ff.c_phi[i];
  return {integrate_metric(ff.metric, *W.grid, rc), det_curvature(G, W.stencil) / factorial(r - 1)};
}

}  // namespace glab::family
