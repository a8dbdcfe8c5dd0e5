#pragma once

#include "glab/core/types.hpp"
#include "glab/metrics/weight_field.hpp"

namespace glab::flow {

using metrics::WeightField;

enum class Chart { z, w };  // w = 1/z

/// Trivializing section u = dz (x) s of the relative anticanonical bundle
/// twisted by det E. |u_s|^2 e^{-phi} is the (1,1)-form e^{-phi_z} |dz|^2 in
/// the chart z and e^{-phi_w} |dw|^2 in the chart w, phi_w = phi_z - 2 log|z|^2.
/// Integrals carry the factor c_n against dV / pi.
struct DetTrivialization {
  double c_n = 1.0;

  /// Density of |u|^2 e^{-phi} against d(mu_FS) at every node, evaluated in
  /// the given chart from the raw weight. Requires k = 2.
  RealField chart_density(const WeightField& W, int point, Chart chart) const;
  /// Same density from the smooth part alone: c_n e^{-(phi - 2 log(1+|z|^2))}.
  RealField density(const WeightField& W, int point) const;
  /// log of the integral of |u_s|^2 e^{-phi} over the fiber.
  double log_mass(const WeightField& W, int point) const;
};

/// Probability density against d(mu_FS), plus its normalizer.
struct FiberDensity {
  RealField density;
  double V = 0.0;  // quadrature mass of det g (ma_density) or of e^{-phi} (canonical)
};

/// MA(phi) = (dd^c phi)^n / V as a density against d(mu_FS); V is the
/// quadrature mass of det g dV / pi^n.
FiberDensity ma_density(const WeightField& W, int point, Exec exec = Exec::parallel);

struct CanonicalDensity {
  RealField density;  // e^{-phi} / integral |u_s|^2 e^{-phi}, against d(mu_FS)
  double psi = 0.0;   // -log integral |u_s|^2 e^{-phi}
};

CanonicalDensity canonical_density(const WeightField& W, const DetTrivialization& triv, int point);

/// u = log(MA(phi) / mu_phi), the normalized Ricci potential.
RealField ricci_potential(const WeightField& W, const DetTrivialization& triv, int point,
                          Exec exec = Exec::parallel);

/// Kernel behind ricci_potential for a degree-2 smooth part on a fiber.
/// Fills u and returns the smallest conformal factor (<= 0 means not positive).
double ricci_potential_kernel(const projgeom::FiberGrid& grid, int k, const RealField& smooth,
                              RealField& u, RealField* laplacian, Exec exec);

}  // namespace glab::flow
