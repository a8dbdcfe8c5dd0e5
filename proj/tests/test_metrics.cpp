#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "glab/metrics/base_stencil.hpp"
#include "glab/metrics/fiber_metric.hpp"
#include "glab/metrics/hermitian_family.hpp"
#include "glab/metrics/weight_field.hpp"
#include "glab/projgeom/fiber_ops.hpp"

using namespace glab;
using namespace glab::metrics;

namespace {

CMatrix complex_hermitian() {
  CMatrix H(2, 2);
  H << 1.5, Complex(0.3, -0.4), Complex(0.3, 0.4), 0.9;
  return H;
}

double sup_diff(const RealField& a, const RealField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("base stencil differentiates quadratics exactly") {
  BaseStencil st{0.05};
  std::vector<Complex> s, sb, ssb;
  std::vector<double> quad;
  for (int i = 0; i < 9; ++i) {
    const Complex p = st.point(i);
    s.push_back(p);
    sb.push_back(std::conj(p));
    ssb.push_back(std::norm(p));
    quad.push_back(3.0 + p.real() - 2.0 * p.imag() + 0.7 * std::norm(p) + 0.4 * (p * p).real());
  }
  CHECK(std::abs(st.ds(s) - 1.0) < 1e-13);
  CHECK(std::abs(st.ds(sb)) < 1e-13);
  CHECK(std::abs(st.dsbar(sb) - 1.0) < 1e-13);
  CHECK(std::abs(st.ddbar(ssb) - 1.0) < 1e-12);
  CHECK(std::abs(st.ddbar(quad) - 0.7) < 1e-12);
  CHECK(std::abs(st.ds(quad) - Complex(0.5, 1.0)) < 1e-13);
  CHECK(st.point(BaseStencil::kCenter) == Complex(0.0));
  CHECK(st.point(BaseStencil::index(1, -1)) == Complex(0.05, -0.05));

  std::vector<CMatrix> mats;
  for (int i = 0; i < 9; ++i) mats.push_back(CMatrix::Identity(2, 2) * ssb[i]);
  CHECK((st.ddbar(mats) - CMatrix::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("hermitian family generators") {
  const BaseStencil st{0.01};
  const auto model = HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2));
  const auto Hs = model.sample(st);
  for (int i = 0; i < 9; ++i)
    CHECK((Hs[i] - std::exp(-std::norm(st.point(i))) * CMatrix::Identity(2, 2)).norm() < 1e-15);
  CHECK((*model.exact_curvature() - CMatrix::Identity(2, 2)).norm() < 1e-15);

  const CMatrix M = complex_hermitian();
  const auto fam = HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), M);
  CHECK((fam.at(0.0) - M).norm() < 1e-13);

  CMatrix bad(2, 2);
  bad << 1.0, 0.0, 0.0, -1.0;
  CHECK_THROWS_AS(HermitianFamily::constant(bad), Error);
  auto samp = HermitianFamily::sampled(st, Hs);
  CHECK((samp.at(st.point(3)) - Hs[3]).norm() == 0.0);
  CHECK_THROWS_AS(samp.sample(BaseStencil{0.02}), Error);
}

TEST_CASE("induce_weight closed forms") {
  const auto grid = projgeom::build_fiber_grid(1, {16, 32});
  const BaseStencil st{0.01};
  const auto W = induce_weight(grid, HermitianFamily::constant(CMatrix::Identity(2, 2)), st);
  const auto model =
      induce_weight(grid, HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)), st);
  const auto diag = induce_weight(grid, HermitianFamily::diagonal({2.0, 0.5}), st);
  for (int p = 0; p < 9; ++p)
    for (std::size_t i = 0; i < grid->size(); ++i) {
      const double r2 = std::norm(grid->nodes()[i].z);
      CHECK(W.raw(p)[i] == doctest::Approx(std::log1p(r2)).epsilon(1e-13));
      CHECK(model.raw(p)[i] == doctest::Approx(std::norm(st.point(p)) + std::log1p(r2)).epsilon(1e-13));
      CHECK(diag.raw(p)[i] == doctest::Approx(std::log(1.0 / 2.0 + r2 / 0.5)).epsilon(1e-13));
    }
}

TEST_CASE("fiber_metric") {
  const auto grid = projgeom::build_fiber_grid(1, {64, 128});
  const BaseStencil st{0.01};
  const auto fs = induce_weight(grid, HermitianFamily::constant(CMatrix::Identity(2, 2)), st);
  const auto m1 = fiber_metric(fs, BaseStencil::kCenter);
  const auto m2 = fiber_metric(rescale(fs, 2), BaseStencil::kCenter);
  const auto model =
      induce_weight(grid, HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)), st);
  const auto m3 = fiber_metric(model, BaseStencil::kCenter);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double gfs = std::pow(1.0 + std::norm(grid->nodes()[i].z), -2.0);
    CHECK(std::abs(m1.g.at(i, 0, 0).real() / gfs - 1.0) < 1e-10);
    CHECK(std::abs(m2.g.at(i, 0, 0).real() / gfs - 2.0) < 1e-10);
    CHECK(std::abs(m3.g.at(i, 0, 0).real() / gfs - 1.0) < 1e-10);
    CHECK(std::abs(m1.g.at(i, 0, 0) * m1.g_inv.at(i, 0, 0) - 1.0) < 1e-12);
    CHECK(std::abs(m1.log_det[i] - std::log(gfs)) < 1e-11);
  }
  // Concave perturbation large enough to break fiber positivity.
  const auto broken = perturb(fs, {Perturbation{-2.0, 0.0, BaseFactor::one, FiberShape::eigen, 0, 0}});
  CHECK_THROWS_WITH_AS(fiber_metric(broken, 0), doctest::Contains("smallest eigenvalue"), Error);
}

TEST_CASE("scaling H shifts the weight and leaves g unchanged") {
  const auto grid = projgeom::build_fiber_grid(1, {32, 64});
  const BaseStencil st{0.01};
  const auto fam = HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), complex_hermitian());
  const auto W = induce_weight(grid, fam, st);
  const auto Wc = induce_weight(grid, fam.scaled(3.0), st);
  for (int p = 0; p < 9; ++p) {
    for (std::size_t i = 0; i < grid->size(); ++i)
      CHECK(std::abs(Wc.raw(p)[i] - (W.raw(p)[i] - std::log(3.0))) < 1e-12);
    const auto g = fiber_metric(W, p), gc = fiber_metric(Wc, p);
    CHECK(sup_diff(g.conformal, gc.conformal) < 1e-12);
  }
}

TEST_CASE("chart covariance of the fiber metric") {
  const auto grid = projgeom::build_fiber_grid(1, {64, 128});
  const BaseStencil st{0.01};
  const auto W = perturb(induce_weight(grid, HermitianFamily::constant(complex_hermitian()), st),
                         {Perturbation{0.2, 0.3, BaseFactor::one, FiberShape::eigen, 0, 1},
                          Perturbation{0.1, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}});
  // Same weight in the chart zeta = 1/z: phi'(zeta) = phi(1/zeta) + log|zeta|^2,
  // sampled at the grid nodes zeta_i, whose preimages are the mirror nodes.
  WeightField Wz = W;
  const auto raw = W.raw(BaseStencil::kCenter);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto m = grid->chart_mirror(i);
    Wz.values[BaseStencil::kCenter][i] =
        raw[m] + std::log(std::norm(grid->nodes()[i].z)) - grid->fs_weight()[i];
  }
  const auto g = fiber_metric(W, BaseStencil::kCenter);
  const auto gz = fiber_metric(Wz, BaseStencil::kCenter);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const auto m = grid->chart_mirror(i);
    CHECK(std::abs(grid->nodes()[m].z * grid->nodes()[i].z - 1.0) < 1e-12);
    // g'(zeta) = g(z) |dz/dzeta|^2; the conformal factors agree pointwise.
    CHECK(std::abs(gz.conformal[i] - g.conformal[m]) < 1e-8);
  }
}

TEST_CASE("isometry_defect") {
  const auto grid = projgeom::build_fiber_grid(1, {64, 128});
  const BaseStencil st{0.01};
  CMatrix B(2, 2);
  B << 1.0, 0.0, 0.0, 2.0;
  for (const auto& fam : {HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)),
                          HermitianFamily::exp_quadratic(B, CMatrix::Identity(2, 2)),
                          HermitianFamily::constant(complex_hermitian())}) {
    const auto W = induce_weight(grid, fam, st);
    const auto d = isometry_defect(W);
    for (int p = 0; p < 9; ++p) {
      CHECK(d.defect[p] <= 1e-8);
      // gamma = -log det H
      CHECK(std::abs(d.G.gamma[p] + std::log(fam.at(st.point(p)).determinant().real())) < 1e-10);
    }
  }
  const auto model =
      induce_weight(grid, HermitianFamily::exp_quadratic(CMatrix::Identity(2, 2), CMatrix::Identity(2, 2)), st);
  const auto dm = isometry_defect(model);
  for (int p = 0; p < 9; ++p) CHECK(std::abs(dm.G.gamma[p] - 2.0 * std::norm(st.point(p))) < 1e-12);

  const auto bumped = perturb(model, {Perturbation{0.1, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}});
  CHECK(isometry_defect(bumped).defect[BaseStencil::kCenter] > 1e-3);

  // Base-only shifts leave the defect unchanged.
  const auto shifted = add_base_function(bumped, [](Complex s) { return 5.0 * s.real() - std::norm(s); });
  const auto a = isometry_defect(bumped), b = isometry_defect(shifted);
  for (int p = 0; p < 9; ++p) CHECK(std::abs(a.defect[p] - b.defect[p]) < 1e-12);

  CHECK_THROWS_AS(isometry_defect(rescale(model, 2)), Error);
}

TEST_CASE("random perturbations are seeded and positivity-limited") {
  const auto grid = projgeom::build_fiber_grid(1, {16, 32});
  const BaseStencil st{0.01};
  const auto a = random_perturbation(2, 0.3, 7), b = random_perturbation(2, 0.3, 7);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].amplitude == b[i].amplitude);
  const auto W = induce_weight(grid, HermitianFamily::constant(CMatrix::Identity(2, 2)), st);
  const auto limited = limit_to_positive(W, random_perturbation(2, 5.0, 1));
  const auto P = perturb(W, limited);
  for (int p = 0; p < 9; ++p) CHECK_NOTHROW(fiber_metric(P, p));
}
