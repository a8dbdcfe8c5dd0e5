#include "glab/projgeom/fiber_grid.hpp"

#include <cmath>
#include <string>

namespace glab::projgeom {

FiberGrid::FiberGrid(int n, Resolution res) : dim_(n), res_(res) {
  if (n != 1) throw Error("build_fiber_grid: unsupported dimension " + std::to_string(n));
  if (res.n_theta < 4 || res.n_phi < 4)
    throw Error("build_fiber_grid: degenerate resolution " + std::to_string(res.n_theta) + "x" +
                std::to_string(res.n_phi));

  const auto rule = gauss_legendre(res.n_theta);
  const std::size_t count = static_cast<std::size_t>(res.n_theta) * res.n_phi;
  nodes_.resize(count);
  weights_.resize(count);
  cos_theta_.resize(count);
  fs_density_.resize(count);
  fs_weight_.resize(count);
  radius_.resize(count);
  phase_.resize(count);

  const double dphi = 2.0 * kPi / res.n_phi;
  for (int i = 0; i < res.n_theta; ++i) {
    const double x = rule.nodes[i];
    const double s = std::sqrt((1.0 - x) * (1.0 + x));
    const double rho = s / (1.0 + x);  // tan(theta/2)
    // |z|^2 = (1-x)/(1+x); d(area) = rho d(rho) d(phi) = dx d(phi) / (1+x)^2
    const double w = rule.weights[i] * dphi / ((1.0 + x) * (1.0 + x));
    const double g = 0.25 * (1.0 + x) * (1.0 + x);
    const double logpot = std::log(2.0) - std::log1p(x);
    for (int j = 0; j < res.n_phi; ++j) {
      const std::size_t k = node_index(i, j);
      const Complex ph = std::polar(1.0, dphi * j);
      nodes_[k] = FiberNode{0, rho * ph};
      weights_[k] = w;
      cos_theta_[k] = x;
      fs_density_[k] = g;
      fs_weight_[k] = logpot;
      radius_[k] = rho;
      phase_[k] = ph;
    }
  }
  sht_ = std::make_shared<const SphericalTransform>(rule, res.n_phi);
}

std::size_t FiberGrid::chart_mirror(std::size_t node) const {
  const int i = static_cast<int>(node / res_.n_phi);
  const int j = static_cast<int>(node % res_.n_phi);
  return node_index(res_.n_theta - 1 - i, (res_.n_phi - j) % res_.n_phi);
}

std::shared_ptr<const FiberGrid> build_fiber_grid(int n, Resolution res) {
  return std::make_shared<const FiberGrid>(n, res);
}

}  // namespace glab::projgeom
