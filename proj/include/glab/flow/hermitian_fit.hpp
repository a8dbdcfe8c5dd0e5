#pragma once

#include "glab/core/types.hpp"
#include "glab/projgeom/fiber_grid.hpp"

namespace glab::flow {

struct HermitianFit {
  CMatrix M;              // positive hermitian, det M = 1
  double constant = 0.0;  // phi ~ k log(w^dagger M^{-1} w) + constant
  double residual = 0.0;  // sup over nodes of the fit error
  int iterations = 0;
  bool converged = false;
};

/// Least-squares fit (Fubini-Study weighted) of a fiber weight of degree k by
/// the Fubini-Study weight of a hermitian form. `smooth` holds
/// phi - k log(1+|z|^2). Gauss-Newton from the eigen-projection of
/// exp(smooth / k), capped at `max_iterations`.
HermitianFit extract_hermitian_form(const projgeom::FiberGrid& grid, const RealField& smooth, int k,
                                    int max_iterations = 50);

}  // namespace glab::flow
