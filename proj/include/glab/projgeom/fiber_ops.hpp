#pragma once

#include <span>

#include "glab/core/types.hpp"
#include "glab/projgeom/fiber_grid.hpp"

namespace glab::projgeom {

/// Quadrature sum  sum_i w_i density_i  against the Euclidean chart area.
/// Pass densities already multiplied by det(g)/pi^n to integrate against the
/// normalized measure d(mu_g) = det(g) dV_euc / pi^n.
/// Throws on the first non-finite node.
double integrate_fiber(const FiberGrid& grid, std::span<const double> density);
Complex integrate_fiber(const FiberGrid& grid, std::span<const Complex> density);

/// Homogeneous coordinates W = (1, z) at a node.
CVector homogeneous(const FiberGrid& grid, std::size_t node);

/// int W_a conj(W_b) / |W|^2 d(mu_FS)  (two indices) or
/// int W_a conj(W_b) W_c conj(W_d) / |W|^4 d(mu_FS)  (four indices); 0-based.
double fs_moment(const FiberGrid& grid, std::span<const int> indices);

// Chart derivatives of smooth functions on the fiber. The result is again a
// smooth function (the chart component extends smoothly over infinity), so
// these compose.
ComplexField dz(const FiberGrid& grid, std::span<const Complex> f, Exec exec = Exec::parallel);
ComplexField dzbar(const FiberGrid& grid, std::span<const Complex> f,
                   Exec exec = Exec::parallel);

/// Round-sphere Laplace-Beltrami operator (non-positive).
ComplexField sphere_laplacian(const FiberGrid& grid, std::span<const Complex> f,
                              Exec exec = Exec::parallel);
RealField sphere_laplacian(const FiberGrid& grid, std::span<const double> f,
                           Exec exec = Exec::parallel);

/// d d-bar f in the chart for a smooth function f: g_FS * Laplacian_S f.
RealField ddbar(const FiberGrid& grid, std::span<const double> f, Exec exec = Exec::parallel);

/// Box_g f = -g^{b a} d_a d_{b-bar} f. Throws if g is not positive definite at
/// some node.
RealField fiber_laplacian(const FiberGrid& grid, const TensorField& g, std::span<const double> f);

/// e_ab = r W_b conj(W_a) / |W|^2 - delta_ab  (0-based a, b).
ComplexField eigenfunction(const FiberGrid& grid, int a, int b);

struct EigenProjection {
  CMatrix lambda;   // f_hat = sum lambda(a, b) W_b conj(W_a) / |W|^2
  double residual;  // max over nodes |f - f_hat|
};

/// Best L^2(mu_FS) approximation of f in span{ W_b conj(W_a) / |W|^2 }.
/// The Gram matrix is the closed-form four-index moment matrix,
/// (I + v v^T) / (n+2)!, inverted exactly.
EigenProjection eigen_project(const FiberGrid& grid, std::span<const double> f);

/// Same, in linear coordinates W = T w (T invertible r x r), with the
/// Fubini-Study measure of those coordinates.
EigenProjection eigen_project(const FiberGrid& grid, std::span<const double> f, const CMatrix& T);

/// f_hat at every node for a given lambda (coordinates T, identity by default).
RealField eigen_reconstruct(const FiberGrid& grid, const CMatrix& lambda, const CMatrix& T);

/// Fubini-Study density of the coordinates W = T w: det(d d-bar log|Tw|^2).
RealField fs_density_in(const FiberGrid& grid, const CMatrix& T);

}  // namespace glab::projgeom
