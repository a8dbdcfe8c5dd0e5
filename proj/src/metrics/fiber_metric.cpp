#include "glab/metrics/fiber_metric.hpp"

#include <cmath>
#include <string>

#include "glab/projgeom/fiber_ops.hpp"

namespace glab::metrics {

RealField conformal_factor(const WeightField& W, int point) {
  const auto& grid = *W.grid;
  auto conf = projgeom::sphere_laplacian(grid, W.smooth_part(point));
  std::size_t worst = 0;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    conf[i] += W.k;
    if (conf[i] < conf[worst]) worst = i;
  }
  if (!(conf[worst] > 0.0)) {
    const Complex z = grid.nodes()[worst].z;
    throw Error("fiber_metric: weight is not fiberwise positive at stencil point " +
                std::to_string(point) + ", node " + std::to_string(worst) + " (z = " +
                std::to_string(z.real()) + " + " + std::to_string(z.imag()) +
                "i), smallest eigenvalue " + std::to_string(conf[worst] * grid.fs_density()[worst]));
  }
  return conf;
}

FiberMetric fiber_metric(const WeightField& W, int point) {
  const auto& grid = *W.grid;
  FiberMetric m;
  m.conformal = conformal_factor(W, point);
  const auto gfs = grid.fs_density();
  const auto R = grid.fs_weight();
  m.g = TensorField{1, ComplexField(grid.size()), true};
  m.g_inv = m.g;
  m.log_det.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double g = gfs[i] * m.conformal[i];
    m.g.at(i, 0, 0) = g;
    m.g_inv.at(i, 0, 0) = 1.0 / g;
    m.log_det[i] = std::log(m.conformal[i]) - 2.0 * R[i];  // log g_FS = -2 log(1+|z|^2)
  }
  return m;
}

RealField log_det_plus(const WeightField& W, int point, double coeff) {
  const auto conf = conformal_factor(W, point);
  const auto smooth = W.smooth_part(point);
  const auto R = W.grid->fs_weight();
  RealField out(conf.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = std::log(conf[i]) + coeff * smooth[i] + (coeff * W.k - 2.0) * R[i];
  return out;
}

IsometryDefect isometry_defect(const WeightField& W) {
  if (W.k != 1) throw Error("isometry_defect: expects a weight on O_E(1)");
  const auto& grid = *W.grid;
  const double coeff = grid.rank();
  IsometryDefect out;
  for (int p = 0; p < BaseStencil::kPoints; ++p) {
    const auto psi = log_det_plus(W, p, coeff);
    double lo = psi[0], hi = psi[0];
    RealField dens(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) {
      lo = std::min(lo, psi[i]);
      hi = std::max(hi, psi[i]);
      dens[i] = psi[i] * grid.fs_density()[i] / kPi;
    }
    out.defect.push_back(hi - lo);
    out.G.gamma.push_back(projgeom::integrate_fiber(grid, dens));
  }
  return out;
}

}  // namespace glab::metrics
