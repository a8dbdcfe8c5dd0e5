#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "glab/core/types.hpp"
#include "glab/projgeom/spherical_transform.hpp"

namespace glab::projgeom {

struct Resolution {
  int n_theta = 64;  // Gauss-Legendre nodes in cos(theta)
  int n_phi = 128;   // uniform azimuth nodes
};

struct FiberNode {
  int chart = 0;  // affine chart id; the n = 1 grid lives entirely in chart 0
  Complex z;      // affine coordinate W_2 / W_1
};

/// Quadrature and differentiation mesh on the fiber P^n (n = 1 supported).
///
/// Nodes sit at z = tan(theta/2) e^{i phi} with cos(theta) on Gauss-Legendre
/// nodes, so the point at infinity is never sampled. `quad_weights` carry the
/// Euclidean area element of the chart, so that
///   sum_i w_i g_FS(z_i) / pi == 1
/// where g_FS = (1 + |z|^2)^{-2} is the Fubini-Study metric d d-bar log(1+|z|^2).
/// Immutable after construction; share through shared_ptr<const FiberGrid>.
class FiberGrid {
 public:
  FiberGrid(int n, Resolution res);

  int dim() const { return dim_; }
  int rank() const { return dim_ + 1; }
  Resolution resolution() const { return res_; }
  std::size_t size() const { return nodes_.size(); }
  std::size_t node_index(int i_theta, int j_phi) const {
    return static_cast<std::size_t>(i_theta) * res_.n_phi + j_phi;
  }
  /// Node at the image of z under z -> 1/z (mirror latitude, negated azimuth).
  std::size_t chart_mirror(std::size_t node) const;

  const std::vector<FiberNode>& nodes() const { return nodes_; }
  std::span<const double> quad_weights() const { return weights_; }
  std::span<const double> cos_theta() const { return cos_theta_; }  // per node
  std::span<const double> fs_density() const { return fs_density_; }
  /// log(1 + |z|^2), the Fubini-Study weight on O(1).
  std::span<const double> fs_weight() const { return fs_weight_; }
  std::span<const Complex> azimuth_phase() const { return phase_; }  // e^{i phi}
  std::span<const double> radius() const { return radius_; }         // |z|

  const SphericalTransform& transform() const { return *sht_; }

 private:
  int dim_;
  Resolution res_;
  std::vector<FiberNode> nodes_;
  std::vector<double> weights_, cos_theta_, fs_density_, fs_weight_, radius_;
  std::vector<Complex> phase_;
  std::shared_ptr<const SphericalTransform> sht_;
};

/// Builds the fiber grid. Throws for n != 1 ("unsupported dimension") and for
/// resolutions below 4 nodes per direction.
std::shared_ptr<const FiberGrid> build_fiber_grid(int n, Resolution res);

/// n x n matrix per grid node, stored node-major.
struct TensorField {
  int n = 1;
  std::vector<Complex> data;
  bool hermitian = true;

  Complex& at(std::size_t node, int a, int b) { return data[(node * n + a) * n + b]; }
  Complex at(std::size_t node, int a, int b) const { return data[(node * n + a) * n + b]; }
  std::size_t nodes() const { return data.size() / (static_cast<std::size_t>(n) * n); }
};

}  // namespace glab::projgeom
