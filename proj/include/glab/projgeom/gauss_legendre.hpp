#pragma once

#include <vector>

namespace glab::projgeom {

struct GaussLegendreRule {
  std::vector<double> nodes;    // descending, in (-1, 1), symmetric
  std::vector<double> weights;  // positive, sum to 2
};

/// n-point Gauss-Legendre rule on [-1, 1]. Nodes are returned in descending
/// order and are exactly mirror-symmetric (x_{n-1-i} == -x_i).
GaussLegendreRule gauss_legendre(int n);

}  // namespace glab::projgeom
