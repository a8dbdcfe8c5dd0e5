#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "glab/core/types.hpp"
#include "glab/metrics/base_stencil.hpp"
#include "glab/metrics/hermitian_family.hpp"
#include "glab/projgeom/fiber_grid.hpp"

namespace glab::metrics {

using projgeom::FiberGrid;

/// Weight phi(s, z) of a metric e^{-phi} on O_E(k), one fiber field per
/// stencil point.
///
/// Stored relative to the degree-k Fubini-Study weight: values hold
/// phi - k log(1+|z|^2), a smooth function on the whole fiber. This stays in
/// the log domain (no overflow for large k) and avoids carrying the
/// k log(1+|z|^2) growth, whose rounding would otherwise be amplified by base
/// differences and fiber Laplacians.
struct WeightField {
  std::shared_ptr<const FiberGrid> grid;
  int k = 1;
  BaseStencil stencil;
  std::vector<RealField> values;

  /// phi - k log(1+|z|^2) at a stencil point.
  const RealField& smooth_part(int point) const { return values.at(point); }
  const RealField& center() const { return values.at(BaseStencil::kCenter); }
  /// The chart weight phi itself.
  RealField raw(int point) const;
};

/// phi(s, z) = log(w^dagger H(s)^{-1} w), w = (1, z): the Fubini-Study weight
/// of H(s) on O_E(1). Its L^2 metric is H(s)/2.
WeightField induce_weight(std::shared_ptr<const FiberGrid> grid, const HermitianFamily& H,
                          const BaseStencil& stencil);

/// Generator of phi - k log(1+|z|^2) at base point s.
using SmoothWeight = std::function<RealField(const FiberGrid&, Complex s)>;

/// Samples a weight of degree k from a smooth-part generator.
WeightField sample_weight(std::shared_ptr<const FiberGrid> grid, int k, const BaseStencil& stencil,
                          const SmoothWeight& smooth);

/// phi -> factor * phi, degree k -> new_k (factor = new_k / k).
WeightField rescale(const WeightField& W, int new_k);

/// phi -> phi + alpha(s).
WeightField add_base_function(const WeightField& W, const std::function<double(Complex)>& alpha);

enum class BaseFactor { one, s, ssbar };
enum class FiberShape {
  eigen,         // e_ab
  z_over_q_sq,   // (Re z / (1 + |z|^2))^2, real
  z2_over_q2,    // z^2 / (1 + |z|^2)^2
};

/// amplitude * Re(e^{i phase} sigma(s) shape(z)).
struct Perturbation {
  double amplitude = 0.0;
  double phase = 0.0;
  BaseFactor base = BaseFactor::one;
  FiberShape shape = FiberShape::eigen;
  int a = 0, b = 0;  // eigenfunction indices, 0-based
};

/// Values of the perturbation term on the fiber at s.
RealField perturbation_values(const FiberGrid& grid, const Perturbation& p, Complex s);

/// W plus the sum of the perturbation terms.
WeightField perturb(const WeightField& W, const std::vector<Perturbation>& terms);

/// Seeded random combination of real and imaginary parts of all eigenfunctions
/// with base factor one, each coefficient uniform in [-1, 1], normalized so the
/// largest coefficient magnitude is `amplitude`.
std::vector<Perturbation> random_perturbation(int rank, double amplitude, unsigned long seed);

/// Largest t in {amplitude, amplitude/2, ...} such that W + t/amplitude * terms
/// stays fiberwise positive with margin; returns the accepted terms.
std::vector<Perturbation> limit_to_positive(const WeightField& W, std::vector<Perturbation> terms,
                                            double margin = 0.1);

}  // namespace glab::metrics
