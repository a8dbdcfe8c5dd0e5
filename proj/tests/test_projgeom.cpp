#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <random>

#include "glab/projgeom/fiber_grid.hpp"
#include "glab/projgeom/fiber_ops.hpp"

using namespace glab;
using namespace glab::projgeom;

namespace {

double max_abs_diff(std::span<const Complex> a, std::span<const Complex> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

RealField fs_times(const FiberGrid& grid, const RealField& f) {
  RealField out(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) out[k] = f[k] * grid.fs_density()[k] / kPi;
  return out;
}

RealField real_of(const ComplexField& f) {
  RealField out(f.size());
  for (std::size_t k = 0; k < f.size(); ++k) out[k] = f[k].real();
  return out;
}

TensorField scalar_metric(const FiberGrid& grid, double scale) {
  TensorField g{1, ComplexField(grid.size()), true};
  for (std::size_t k = 0; k < grid.size(); ++k) g.at(k, 0, 0) = scale * grid.fs_density()[k];
  return g;
}

// A smooth, non-band-limited function on the sphere built from Cartesian
// coordinates (X, Y, Z) of the node.
RealField smooth_function(const FiberGrid& grid, std::array<double, 4> c) {
  RealField f(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double Z = grid.cos_theta()[k];
    const double s = std::sqrt(1.0 - Z * Z);
    const Complex ph = grid.azimuth_phase()[k];
    const double X = s * ph.real(), Y = s * ph.imag();
    f[k] = std::exp(c[0] * X + c[1] * Y * Z + c[2] * Z) + c[3] * X * X * Y;
  }
  return f;
}

}  // namespace

TEST_CASE("gauss-legendre rule integrates polynomials exactly") {
  const auto rule = gauss_legendre(12);
  for (int p = 0; p <= 23; ++p) {
    double q = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) q += rule.weights[i] * std::pow(rule.nodes[i], p);
    const double exact = (p % 2) ? 0.0 : 2.0 / (p + 1);
    CHECK(q == doctest::Approx(exact).epsilon(1e-13));
  }
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    CHECK(rule.nodes[i] == -rule.nodes[rule.nodes.size() - 1 - i]);
}

TEST_CASE("build_fiber_grid validates input") {
  CHECK_THROWS_WITH_AS(build_fiber_grid(0, {8, 16}), doctest::Contains("unsupported dimension"), Error);
  CHECK_THROWS_WITH_AS(build_fiber_grid(2, {8, 16}), doctest::Contains("unsupported dimension"), Error);
  CHECK_THROWS_AS(build_fiber_grid(1, {3, 16}), Error);
  CHECK_THROWS_AS(build_fiber_grid(1, {8, 2}), Error);
}

TEST_CASE("fiber grid invariants and Fubini-Study mass") {
  for (auto res : {Resolution{64, 128}, Resolution{8, 16}}) {
    const auto grid = build_fiber_grid(1, res);
    CHECK(grid->size() == std::size_t(res.n_theta) * res.n_phi);
    for (std::size_t k = 0; k < grid->size(); ++k) {
      CHECK(grid->quad_weights()[k] > 0.0);
      CHECK(std::isfinite(std::abs(grid->nodes()[k].z)));
    }
    const double mass = integrate_fiber(*grid, fs_times(*grid, RealField(grid->size(), 1.0)));
    CHECK(std::abs(mass - 1.0) <= (res.n_theta == 64 ? 1e-10 : 1e-6));
  }
  const auto grid = build_fiber_grid(1, {64, 128});
  CHECK(grid->size() == 8192);
}

TEST_CASE("integrate_fiber") {
  const auto grid = build_fiber_grid(1, {32, 64});
  CHECK(integrate_fiber(*grid, RealField(grid->size(), 0.0)) == 0.0);
  // (1 - |z|^2)/(1 + |z|^2) = cos(theta) integrates to zero against mu_FS.
  RealField odd(grid->size());
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double r2 = std::norm(grid->nodes()[k].z);
    odd[k] = (1.0 - r2) / (1.0 + r2);
  }
  CHECK(std::abs(integrate_fiber(*grid, fs_times(*grid, odd))) < 1e-14);
  RealField bad(grid->size(), 1.0);
  bad[17] = std::nan("");
  CHECK_THROWS_WITH_AS(integrate_fiber(*grid, bad), doctest::Contains("node 17"), Error);
}

TEST_CASE("fs_moment reproduces the closed forms") {
  const auto grid = build_fiber_grid(1, {64, 128});
  const int r = 2;
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      const std::array<int, 2> ab{a, b};
      CHECK(std::abs(fs_moment(*grid, ab) - (a == b ? 0.5 : 0.0)) < 1e-10);
      for (int c = 0; c < r; ++c)
        for (int d = 0; d < r; ++d) {
          const std::array<int, 4> idx{a, b, c, d};
          const double exact = ((a == b) * (c == d) + (a == d) * (c == b)) / 6.0;
          CHECK(std::abs(fs_moment(*grid, idx) - exact) < 1e-10);
        }
    }
  const std::array<int, 2> bad{0, 2};
  CHECK_THROWS_AS(fs_moment(*grid, bad), Error);
}

TEST_CASE("reference and parallel transforms agree") {
  const auto grid = build_fiber_grid(1, {12, 26});
  const auto& sht = grid->transform();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  ComplexField f(grid->size());
  for (auto& v : f) v = {n01(rng), n01(rng)};
  const auto a_ref = sht.analyze(f, Exec::reference);
  const auto a_par = sht.analyze(f, Exec::parallel);
  CHECK(max_abs_diff(a_ref, a_par) < 1e-12);
  CHECK(max_abs_diff(sht.synthesize(a_ref, Exec::reference), sht.synthesize(a_ref, Exec::parallel)) < 1e-12);
  CHECK(max_abs_diff(sht.synthesize_dtheta(a_ref, Exec::reference),
                     sht.synthesize_dtheta(a_ref, Exec::parallel)) < 1e-11);
}

TEST_CASE("band-limited fields round-trip exactly") {
  const auto grid = build_fiber_grid(1, {16, 32});
  const auto& sht = grid->transform();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n01;
  ComplexField coeffs(sht.coeff_count());
  for (auto& c : coeffs) c = {n01(rng), n01(rng)};
  const auto f = sht.synthesize(coeffs);
  CHECK(max_abs_diff(sht.analyze(f), coeffs) < 1e-12);
}

TEST_CASE("theta derivatives of low-degree harmonics") {
  const auto grid = build_fiber_grid(1, {10, 20});
  const auto& sht = grid->transform();
  ComplexField c10(sht.coeff_count(), 0.0), c11(sht.coeff_count(), 0.0);
  c10[sht.index(1, 0)] = 1.0;
  c11[sht.index(1, 1)] = 1.0;
  const auto d10 = sht.synthesize_dtheta(c10);
  const auto d11 = sht.synthesize_dtheta(c11);
  const double n10 = std::sqrt(1.5 / (2.0 * kPi));
  const double n11 = std::sqrt(0.75 / (2.0 * kPi));
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double x = grid->cos_theta()[k];
    CHECK(std::abs(d10[k] - Complex(-n10 * std::sqrt(1 - x * x))) < 1e-13);
    CHECK(std::abs(d11[k] - n11 * x * grid->azimuth_phase()[k]) < 1e-13);
  }
}

TEST_CASE("chart derivatives of cos(theta)") {
  const auto grid = build_fiber_grid(1, {24, 48});
  ComplexField x(grid->size());
  for (std::size_t k = 0; k < grid->size(); ++k) x[k] = grid->cos_theta()[k];
  const auto dzb = dzbar(*grid, x);
  const auto dzz = dz(*grid, x);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const Complex z = grid->nodes()[k].z;
    const double q = 1.0 + std::norm(z);
    CHECK(std::abs(dzb[k] - (-2.0 * z / (q * q))) < 1e-12);
    CHECK(std::abs(dzz[k] - (-2.0 * std::conj(z) / (q * q))) < 1e-12);
  }
  // d dbar via composition matches the Laplacian route.
  const auto dd = dz(*grid, dzb);
  const auto lap = ddbar(*grid, real_of(x));
  for (std::size_t k = 0; k < grid->size(); ++k) CHECK(std::abs(dd[k] - lap[k]) < 1e-11);
}

TEST_CASE("fiber_laplacian") {
  const auto grid = build_fiber_grid(1, {64, 128});
  const auto gfs = scalar_metric(*grid, 1.0);
  const auto one = fiber_laplacian(*grid, gfs, RealField(grid->size(), 1.0));
  for (double v : one) CHECK(std::abs(v) < 1e-10);
  const auto e = real_of(eigenfunction(*grid, 0, 0));
  const auto lap = fiber_laplacian(*grid, gfs, e);
  const auto lap2 = fiber_laplacian(*grid, scalar_metric(*grid, 2.0), e);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    CHECK(std::abs(lap[k] - 2.0 * e[k]) < 1e-10);
    CHECK(std::abs(lap2[k] - e[k]) < 1e-10);
  }
  auto bad = gfs;
  bad.at(100, 0, 0) = -1.0;
  CHECK_THROWS_WITH_AS(fiber_laplacian(*grid, bad, e), doctest::Contains("node 100"), Error);
}

TEST_CASE("eigenfunctions of the Fubini-Study Laplacian") {
  const auto grid = build_fiber_grid(1, {64, 128});
  const auto gfs = scalar_metric(*grid, 1.0);
  const auto e11 = eigenfunction(*grid, 0, 0);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double r2 = std::norm(grid->nodes()[k].z);
    CHECK(std::abs(e11[k] - (1.0 - r2) / (1.0 + r2)) < 1e-14);
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const auto e = eigenfunction(*grid, a, b);
      ComplexField dens(grid->size());
      for (std::size_t k = 0; k < grid->size(); ++k) dens[k] = e[k] * grid->fs_density()[k] / kPi;
      CHECK(std::abs(integrate_fiber(*grid, dens)) < 1e-13);
      RealField re(grid->size()), im(grid->size());
      for (std::size_t k = 0; k < grid->size(); ++k) re[k] = e[k].real(), im[k] = e[k].imag();
      const auto lre = fiber_laplacian(*grid, gfs, re);
      const auto lim = fiber_laplacian(*grid, gfs, im);
      double worst = 0.0;
      for (std::size_t k = 0; k < grid->size(); ++k)
        worst = std::max(worst, std::abs(Complex(lre[k], lim[k]) - 2.0 * e[k]));
      CHECK(worst <= 1e-6);
      if (a == b)
        for (const auto& v : e) CHECK(v.imag() == 0.0);
    }
  CHECK_THROWS_AS(eigenfunction(*grid, 0, 2), Error);
}

TEST_CASE("laplacian is self-adjoint for the metric measure") {
  const auto grid = build_fiber_grid(1, {64, 128});
  const auto f = smooth_function(*grid, {0.7, -0.4, 0.3, 0.2});
  const auto h = smooth_function(*grid, {-0.2, 0.9, 0.5, -0.6});
  // Non-FS metric g = g_FS * (1 + 0.3 cos theta) is positive.
  TensorField g{1, ComplexField(grid->size()), true};
  for (std::size_t k = 0; k < grid->size(); ++k)
    g.at(k, 0, 0) = grid->fs_density()[k] * (1.0 + 0.3 * grid->cos_theta()[k]);
  const auto lf = fiber_laplacian(*grid, g, f);
  const auto lh = fiber_laplacian(*grid, g, h);
  RealField a(grid->size()), b(grid->size());
  for (std::size_t k = 0; k < grid->size(); ++k) {
    const double mu = g.at(k, 0, 0).real() / kPi;
    a[k] = lf[k] * h[k] * mu;
    b[k] = f[k] * lh[k] * mu;
  }
  CHECK(std::abs(integrate_fiber(*grid, a) - integrate_fiber(*grid, b)) < 1e-8);
}

TEST_CASE("eigen_project") {
  const auto grid = build_fiber_grid(1, {32, 64});
  auto p1 = eigen_project(*grid, RealField(grid->size(), 1.0));
  CHECK((p1.lambda - CMatrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(p1.residual < 1e-12);

  const auto e11 = real_of(eigenfunction(*grid, 0, 0));
  auto pe = eigen_project(*grid, e11);
  CMatrix expect(2, 2);
  expect << 1.0, 0.0, 0.0, -1.0;
  CHECK((pe.lambda - expect).norm() < 1e-12);
  CHECK(pe.residual < 1e-12);

  // Idempotent on the span, also in skewed coordinates.
  CMatrix lambda(2, 2);
  lambda << 0.7, Complex(0.2, -0.5), Complex(0.2, 0.5), -0.3;
  CMatrix T(2, 2);
  T << 1.3, Complex(0.1, 0.4), 0.0, 0.8;
  const auto f = eigen_reconstruct(*grid, lambda, T);
  const auto back = eigen_project(*grid, f, T);
  CHECK((back.lambda - lambda).norm() < 1e-12);
  CHECK(back.residual < 1e-12);
  CHECK((back.lambda - back.lambda.adjoint()).norm() < 1e-14);
}
