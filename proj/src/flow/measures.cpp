#include "glab/flow/measures.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glab/projgeom/fiber_ops.hpp"

namespace glab::flow {

namespace {

void require_anticanonical(const WeightField& W, const char* what) {
  if (W.k != W.grid->rank())
    throw Error(std::string(what) + ": expects a weight on O_E(r), got k = " + std::to_string(W.k));
}

// Quadrature mass of f against d(mu_FS).
double fs_mass(const projgeom::FiberGrid& grid, const RealField& f) {
  const auto w = grid.quad_weights();
  const auto g = grid.fs_density();
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += w[i] * g[i] * f[i];
  return sum / kPi;
}

// log of the mu_FS mass of e^{-f}, shifted by f[0] so fiber constants cancel exactly.
double log_exp_mass(const projgeom::FiberGrid& grid, const RealField& f) {
  RealField e(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) e[i] = std::exp(-(f[i] - f[0]));
  return std::log(fs_mass(grid, e)) - f[0];
}

}  // namespace

RealField DetTrivialization::chart_density(const WeightField& W, int point, Chart chart) const {
  require_anticanonical(W, "chart_density");
  const auto& grid = *W.grid;
  const auto phi = W.raw(point);
  RealField out(phi.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double r2 = std::norm(grid.nodes()[i].z);
    if (chart == Chart::z) {
      out[i] = c_n * std::exp(-phi[i]) * (1.0 + r2) * (1.0 + r2);
    } else {
      const double w2 = 1.0 / r2;
      const double phi_w = phi[i] + std::log(w2) * 2.0;  // phi_z - 2 log|z|^2
      out[i] = c_n * std::exp(-phi_w) * (1.0 + w2) * (1.0 + w2);
    }
  }
  return out;
}

RealField DetTrivialization::density(const WeightField& W, int point) const {
  require_anticanonical(W, "density");
  RealField out(W.smooth_part(point));
  for (auto& v : out) v = c_n * std::exp(-v);
  return out;
}

double DetTrivialization::log_mass(const WeightField& W, int point) const {
  require_anticanonical(W, "log_mass");
  return std::log(c_n) + log_exp_mass(*W.grid, W.smooth_part(point));
}

FiberDensity ma_density(const WeightField& W, int point, Exec exec) {
  require_anticanonical(W, "ma_density");
  const auto& grid = *W.grid;
  FiberDensity out;
  out.density = projgeom::sphere_laplacian(grid, W.smooth_part(point), exec);
  for (std::size_t i = 0; i < out.density.size(); ++i) {
    out.density[i] += W.k;
    if (!(out.density[i] > 0.0))
      throw Error("ma_density: weight is not fiberwise positive at stencil point " +
                  std::to_string(point) + ", node " + std::to_string(i));
  }
  out.V = fs_mass(grid, out.density);
  for (auto& v : out.density) v /= out.V;
  return out;
}

CanonicalDensity canonical_density(const WeightField& W, const DetTrivialization& triv, int point) {
  require_anticanonical(W, "canonical_density");
  const auto& smooth = W.smooth_part(point);
  const double logz = log_exp_mass(*W.grid, smooth);
  CanonicalDensity out;
  out.psi = -(std::log(triv.c_n) + logz);
  out.density.resize(smooth.size());
  for (std::size_t i = 0; i < smooth.size(); ++i) out.density[i] = std::exp(-smooth[i] - logz);
  return out;
}

double ricci_potential_kernel(const projgeom::FiberGrid& grid, int k, const RealField& smooth,
                              RealField& u, RealField* laplacian, Exec exec) {
  auto lap = projgeom::sphere_laplacian(grid, smooth, exec);
  u.resize(smooth.size());
  double min_sigma = k + lap[0];
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = k + lap[i];
    min_sigma = std::min(min_sigma, u[i]);
  }
  if (!(min_sigma > 0.0)) return min_sigma;
  // u = log sigma - log V + smooth + log Z with all masses against mu_FS.
  const double logv = std::log(fs_mass(grid, u));
  const double logz = log_exp_mass(grid, smooth);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::log(u[i]) - logv + (smooth[i] + logz);
  if (laplacian) *laplacian = std::move(lap);
  return min_sigma;
}

RealField ricci_potential(const WeightField& W, const DetTrivialization&, int point, Exec exec) {
  require_anticanonical(W, "ricci_potential");
  RealField u;
  const double m = ricci_potential_kernel(*W.grid, W.k, W.smooth_part(point), u, nullptr, exec);
  if (!(m > 0.0))
    throw Error("ricci_potential: weight is not fiberwise positive at stencil point " +
                std::to_string(point) + " (smallest conformal factor " + std::to_string(m) + ")");
  return u;
}

}  // namespace glab::flow
