#include "glab/projgeom/fiber_ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace glab::projgeom {

namespace {

ComplexField to_complex(std::span<const double> f) { return ComplexField(f.begin(), f.end()); }

RealField real_part(const ComplexField& f) {
  RealField out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = f[i].real();
  return out;
}

void check_size(const FiberGrid& grid, std::size_t n, const char* what) {
  if (n != grid.size())
    throw Error(std::string(what) + ": field has " + std::to_string(n) + " values, grid has " +
                std::to_string(grid.size()) + " nodes");
}

}  // namespace

double integrate_fiber(const FiberGrid& grid, std::span<const double> density) {
  check_size(grid, density.size(), "integrate_fiber");
  const auto w = grid.quad_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!std::isfinite(density[i]))
      throw Error("integrate_fiber: non-finite density at node " + std::to_string(i));
    sum += w[i] * density[i];
  }
  return sum;
}

Complex integrate_fiber(const FiberGrid& grid, std::span<const Complex> density) {
  check_size(grid, density.size(), "integrate_fiber");
  const auto w = grid.quad_weights();
  Complex sum = 0.0;
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (!std::isfinite(density[i].real()) || !std::isfinite(density[i].imag()))
      throw Error("integrate_fiber: non-finite density at node " + std::to_string(i));
    sum += w[i] * density[i];
  }
  return sum;
}

CVector homogeneous(const FiberGrid& grid, std::size_t node) {
  CVector w(grid.rank());
  w(0) = 1.0;
  w(1) = grid.nodes()[node].z;
  return w;
}

double fs_moment(const FiberGrid& grid, std::span<const int> idx) {
  if (idx.size() != 2 && idx.size() != 4) throw Error("fs_moment: need 2 or 4 indices");
  for (int a : idx)
    if (a < 0 || a >= grid.rank())
      throw Error("fs_moment: index " + std::to_string(a) + " out of range");
  ComplexField integrand(grid.size());
  const auto g = grid.fs_density();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CVector w = homogeneous(grid, k);
    const double n2 = w.squaredNorm();
    Complex v = w(idx[0]) * std::conj(w(idx[1])) / n2;
    if (idx.size() == 4) v *= w(idx[2]) * std::conj(w(idx[3])) / n2;
    integrand[k] = v * g[k] / kPi;
  }
  return integrate_fiber(grid, integrand).real();
}

ComplexField dzbar(const FiberGrid& grid, std::span<const Complex> f, Exec exec) {
  check_size(grid, f.size(), "dzbar");
  const auto& sht = grid.transform();
  const auto a = sht.analyze(f, exec);
  const auto ft = sht.synthesize_dtheta(a, exec);
  const auto fp = sht.synthesize_dphi(a, exec);
  const auto x = grid.cos_theta();
  const auto rho = grid.radius();
  const auto ph = grid.azimuth_phase();
  ComplexField out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    out[k] = 0.5 * ph[k] * ((1.0 + x[k]) * ft[k] + kI * fp[k] / rho[k]);
  return out;
}

ComplexField dz(const FiberGrid& grid, std::span<const Complex> f, Exec exec) {
  check_size(grid, f.size(), "dz");
  const auto& sht = grid.transform();
  const auto a = sht.analyze(f, exec);
  const auto ft = sht.synthesize_dtheta(a, exec);
  const auto fp = sht.synthesize_dphi(a, exec);
  const auto x = grid.cos_theta();
  const auto rho = grid.radius();
  const auto ph = grid.azimuth_phase();
  ComplexField out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k)
    out[k] = 0.5 * std::conj(ph[k]) * ((1.0 + x[k]) * ft[k] - kI * fp[k] / rho[k]);
  return out;
}

ComplexField sphere_laplacian(const FiberGrid& grid, std::span<const Complex> f, Exec exec) {
  check_size(grid, f.size(), "sphere_laplacian");
  const auto& sht = grid.transform();
  // Constants are annihilated exactly; removing one keeps their rounding out
  // of the high degrees.
  ComplexField shifted(f.begin(), f.end());
  for (auto& v : shifted) v -= f[0];
  auto a = sht.analyze(shifted, exec);
  sht.scale_by_degree(std::span<Complex>(a), [](int l) { return -double(l) * (l + 1); });
  return sht.synthesize(a, exec);
}

RealField sphere_laplacian(const FiberGrid& grid, std::span<const double> f, Exec exec) {
  return real_part(sphere_laplacian(grid, std::span<const Complex>(to_complex(f)), exec));
}

RealField ddbar(const FiberGrid& grid, std::span<const double> f, Exec exec) {
  auto lap = sphere_laplacian(grid, f, exec);
  const auto g = grid.fs_density();
  for (std::size_t k = 0; k < lap.size(); ++k) lap[k] *= g[k];
  return lap;
}

RealField fiber_laplacian(const FiberGrid& grid, const TensorField& g, std::span<const double> f) {
  if (g.n != grid.dim()) throw Error("fiber_laplacian: metric dimension mismatch");
  check_size(grid, g.nodes(), "fiber_laplacian");
  for (std::size_t k = 0; k < grid.size(); ++k)
    if (!(g.at(k, 0, 0).real() > 0.0))
      throw Error("fiber_laplacian: metric not positive definite at node " + std::to_string(k) +
                  " (z = " + std::to_string(grid.nodes()[k].z.real()) + " + " +
                  std::to_string(grid.nodes()[k].z.imag()) + "i)");
  auto out = ddbar(grid, f);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = -out[k] / g.at(k, 0, 0).real();
  return out;
}

ComplexField eigenfunction(const FiberGrid& grid, int a, int b) {
  const int r = grid.rank();
  if (a < 0 || a >= r || b < 0 || b >= r)
    throw Error("eigenfunction: index out of range");
  ComplexField e(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CVector w = homogeneous(grid, k);
    e[k] = double(r) * w(b) * std::conj(w(a)) / w.squaredNorm() - (a == b ? 1.0 : 0.0);
  }
  return e;
}

RealField fs_density_in(const FiberGrid& grid, const CMatrix& T) {
  const CMatrix A = T.adjoint() * T;
  const double det = A.determinant().real();
  RealField g(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CVector w = homogeneous(grid, k);
    const double q = (w.adjoint() * A * w)(0, 0).real();
    g[k] = det / (q * q);
  }
  return g;
}

EigenProjection eigen_project(const FiberGrid& grid, std::span<const double> f) {
  return eigen_project(grid, f, CMatrix::Identity(grid.rank(), grid.rank()));
}

EigenProjection eigen_project(const FiberGrid& grid, std::span<const double> f, const CMatrix& T) {
  check_size(grid, f.size(), "eigen_project");
  const int r = grid.rank();
  const int n = grid.dim();
  const auto g = fs_density_in(grid, T);
  const auto wq = grid.quad_weights();
  CMatrix b = CMatrix::Zero(r, r);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(f[k])) throw Error("eigen_project: non-finite value at node " + std::to_string(k));
    const CVector W = T * homogeneous(grid, k);
    const double mu = wq[k] * g[k] / std::pow(kPi, n);
    const double n2 = W.squaredNorm();
    // <f, B_ab> with B_ab = W_b conj(W_a) / |W|^2
    b += (f[k] * mu / n2) * (W * W.adjoint());
  }
  // Gram = (I + v v^T)/(n+2)!, v = vec(identity), |v|^2 = r.
  const Complex tr = b.trace();
  CMatrix lambda = factorial(n + 2) * (b - (tr / double(1 + r)) * CMatrix::Identity(r, r));
  if (!lambda.allFinite()) throw Error("eigen_project: singular Gram system");
  const auto fhat = eigen_reconstruct(grid, lambda, T);
  double res = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) res = std::max(res, std::abs(f[k] - fhat[k]));
  return {lambda, res};
}

RealField eigen_reconstruct(const FiberGrid& grid, const CMatrix& lambda, const CMatrix& T) {
  RealField out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const CVector W = T * homogeneous(grid, k);
    out[k] = (W.adjoint() * lambda * W)(0, 0).real() / W.squaredNorm();
  }
  return out;
}

}  // namespace glab::projgeom
