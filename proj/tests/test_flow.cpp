#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "glab/core/log.hpp"
#include "glab/directimage/theorem1.hpp"
#include "glab/family/family_fields.hpp"
#include "glab/flow/hermitian_fit.hpp"
#include "glab/flow/kr_flow.hpp"
#include "glab/flow/measures.hpp"
#include "glab/metrics/fiber_metric.hpp"
#include "glab/metrics/weight_field.hpp"

using namespace glab;
using namespace glab::metrics;
using namespace glab::flow;

namespace {

const CMatrix I2 = CMatrix::Identity(2, 2);
constexpr int C = BaseStencil::kCenter;

std::shared_ptr<const projgeom::FiberGrid> grid64() {
  static auto g = projgeom::build_fiber_grid(1, {64, 128});
  return g;
}

std::shared_ptr<const projgeom::FiberGrid> grid16() {
  static auto g = projgeom::build_fiber_grid(1, {16, 32});
  return g;
}

WeightField fs2(std::shared_ptr<const projgeom::FiberGrid> g) {
  return rescale(induce_weight(g, HermitianFamily::constant(I2), BaseStencil{0.01}), 2);
}

WeightField model2(std::shared_ptr<const projgeom::FiberGrid> g) {
  return rescale(induce_weight(g, HermitianFamily::exp_quadratic(I2, I2), BaseStencil{0.01}), 2);
}

double fs_integral(const projgeom::FiberGrid& g, const RealField& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.quad_weights()[i] * g.fs_density()[i] * f[i];
  return s / kPi;
}

double max_diff(const WeightField& a, const WeightField& b) {
  double d = 0.0;
  for (int p = 0; p < BaseStencil::kPoints; ++p)
    for (std::size_t i = 0; i < a.values[p].size(); ++i)
      d = std::max(d, std::abs(a.values[p][i] - b.values[p][i]));
  return d;
}

}  // namespace

TEST_CASE("det trivialization is chart covariant") {
  const auto g = grid64();
  const auto W = perturb(model2(g), random_perturbation(2, 0.3, 7));
  const DetTrivialization triv;
  for (int p : {0, C}) {
    const auto dz = triv.chart_density(W, p, Chart::z);
    const auto dw = triv.chart_density(W, p, Chart::w);
    const auto ds = triv.density(W, p);
    RealField split(ds.size());
    for (std::size_t i = 0; i < split.size(); ++i) split[i] = g->cos_theta()[i] > 0.0 ? dz[i] : dw[i];
    const double whole = std::exp(triv.log_mass(W, p));
    CHECK(std::abs(fs_integral(*g, split) - whole) <= 1e-12 * whole);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      CHECK(std::abs(dz[i] - ds[i]) <= 1e-11 * ds[i]);
      CHECK(std::abs(dw[i] - ds[i]) <= 1e-11 * ds[i]);
    }
  }
}

TEST_CASE("ma_density") {
  const auto g = grid64();
  const auto fs = ma_density(fs2(g), C);
  CHECK(std::abs(fs.V - 2.0) < 1e-12);
  for (double d : fs.density) CHECK(std::abs(d - 1.0) < 1e-11);
  const auto W = perturb(fs2(g), {Perturbation{0.1, 0.0, BaseFactor::one, FiberShape::eigen, 0, 0}});
  CHECK(std::abs(fs_integral(*g, ma_density(W, C).density) - 1.0) <= 1e-10);
  CHECK_THROWS_AS(ma_density(induce_weight(g, HermitianFamily::constant(I2), BaseStencil{}), C), Error);
}

TEST_CASE("canonical_density") {
  const auto g = grid64();
  const DetTrivialization triv;
  const auto fs = canonical_density(fs2(g), triv, C);
  const auto ma = ma_density(fs2(g), C);
  for (std::size_t i = 0; i < fs.density.size(); ++i) CHECK(std::abs(fs.density[i] - ma.density[i]) < 1e-11);
  const auto M = model2(g);
  const double psi0 = canonical_density(M, triv, C).psi;
  for (int p = 0; p < BaseStencil::kPoints; ++p) {
    const double s2 = std::norm(M.stencil.point(p));
    CHECK(std::abs(canonical_density(M, triv, p).psi - psi0 - 2.0 * s2) < 1e-14);
  }
  const auto R = perturb(M, limit_to_positive(M, random_perturbation(2, 0.5, 3)));
  CHECK(std::abs(fs_integral(*g, canonical_density(R, triv, 0).density) - 1.0) <= 1e-10);
}

TEST_CASE("ricci_potential") {
  const auto g = grid64();
  const DetTrivialization triv;
  double u0 = 0.0;
  for (double v : ricci_potential(fs2(g), triv, C)) u0 = std::max(u0, std::abs(v));
  CHECK(u0 <= 1e-10);

  const double eps = 1e-3;
  const auto W = perturb(fs2(g), {Perturbation{eps, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}});
  const auto u = ricci_potential(W, triv, C);
  double sup = 0.0;
  for (double v : u) sup = std::max(sup, std::abs(v));
  CHECK(sup <= 10 * eps);
  CHECK(sup >= 0.1 * eps);
  CHECK(std::abs(fs_integral(*g, u)) <= 10 * eps * eps);

  const auto R = perturb(fs2(g), random_perturbation(2, 0.3, 11));
  for (int p : {0, C, 8}) {
    const auto ur = ricci_potential(R, triv, p);
    const auto ma = ma_density(R, p);
    RealField f(ur.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::exp(-ur[i]) * ma.density[i];
    CHECK(std::abs(fs_integral(*g, f) - 1.0) <= 1e-8);
  }
}

TEST_CASE("Fubini-Study weights are fixed points") {
  const auto g = grid64();
  for (auto scheme : {Scheme::euler, Scheme::rk4, Scheme::imex}) {
    const auto s0 = initial_state(fs2(g));
    CHECK(sup_velocity(s0) <= 1e-10);
    const auto s1 = flow_step(s0, 1e-3, scheme);
    CHECK(max_diff(s0.W, s1.W) <= 1e-12);
  }
  // Fubini-Study in other coordinates.
  CMatrix H(2, 2);
  H << 2.0, Complex(0.3, 0.1), Complex(0.3, -0.1), 0.8;
  const auto s0 = initial_state(rescale(induce_weight(g, HermitianFamily::constant(H), BaseStencil{}), 2));
  CHECK(sup_velocity(s0) <= 1e-9);
  CHECK(max_diff(s0.W, flow_step(s0, 0.05, Scheme::imex).W) <= 1e-10);
}

TEST_CASE("reference and parallel steps agree") {
  const auto g = grid16();
  const auto s0 = initial_state(perturb(fs2(g), random_perturbation(2, 0.2, 5)));
  StepOptions ref;
  ref.exec = Exec::reference;
  for (auto scheme : {Scheme::euler, Scheme::rk4, Scheme::imex}) {
    const auto a = flow_step(s0, 1e-3, scheme);
    const auto b = flow_step(s0, 1e-3, scheme, ref);
    CHECK(max_diff(a.W, b.W) <= 1e-13);
  }
}

TEST_CASE("sup|u| contracts for small steps") {
  const auto start = perturb(fs2(grid16()), {Perturbation{0.1, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}});
  for (auto scheme : {Scheme::euler, Scheme::imex}) {
    auto s = initial_state(start);
    double prev = sup_velocity(s);
    for (int n = 0; n < 20; ++n) {
      s = flow_step(s, 2e-3, scheme);
      const double cur = sup_velocity(s);
      CHECK(cur < prev);
      prev = cur;
    }
  }
}

TEST_CASE("step rejection") {
  const auto g = grid16();
  const auto rough = perturb(fs2(g), limit_to_positive(fs2(g), random_perturbation(2, 1.0, 2)));
  const auto s0 = initial_state(rough);
  const auto s1 = flow_step(s0, 10.0, Scheme::euler);
  CHECK(s1.dt_used < 10.0);
  CHECK(s1.t == doctest::Approx(10.0));
  StepOptions none;
  none.max_halvings = 0;
  CHECK_THROWS_WITH_AS(flow_step(s0, 10.0, Scheme::euler, none), doctest::Contains("step rejected"), Error);
}

TEST_CASE("cocycle orders") {
  const auto start =
      initial_state(perturb(fs2(grid16()), {Perturbation{0.3, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}}));
  auto local_error = [&](Scheme scheme, double dt) {
    const auto one = flow_step(start, dt, scheme);
    const auto two = flow_step(flow_step(start, dt / 2, scheme), dt / 2, scheme);
    return max_diff(one.W, two.W);
  };
  const double p_euler = std::log2(local_error(Scheme::euler, 4e-3) / local_error(Scheme::euler, 2e-3));
  const double p_rk4 = std::log2(local_error(Scheme::rk4, 2e-2) / local_error(Scheme::rk4, 1e-2));
  MESSAGE("euler local order " << p_euler << ", rk4 local order " << p_rk4);
  CHECK(std::abs(p_euler - 2.0) <= 0.4);
  CHECK(std::abs(p_rk4 - 5.0) <= 1.0);
}

TEST_CASE("run_flow: stationary starts") {
  const auto g = grid64();
  const auto fs = run_flow(fs2(g));
  CHECK(fs.converged);
  CHECK(fs.steps == 0);
  FlowParams params;
  params.tol = 1e-300;  // keep stepping the stationary model
  params.t_max = 0.5;
  params.dt = 0.05;
  const auto model = run_flow(model2(g), params);
  const auto pos = positivity_monitor(model.diagnostics, 2);
  CHECK(model.diagnostics.samples.size() == 11);
  for (double m : pos.min_c) CHECK(std::abs(m - 2.0) < 1e-9);
  CHECK_FALSE(pos.first_sign_change);
  for (std::size_t j = 1; j + 1 < model.diagnostics.samples.size(); ++j) {
    const auto& s = model.diagnostics.samples[j];
    CHECK(s.residual_rescaled <= 1e-10);
    CHECK(std::abs(s.residual_raw - 2.0) <= 1e-6);
    CHECK(s.psi_ss == doctest::Approx(2.0).epsilon(1e-8));
  }
  CHECK(std::isnan(model.diagnostics.samples.front().residual_raw));
  const auto product = run_flow(fs2(g), params);
  for (double m : positivity_monitor(product.diagnostics, 2).min_c) CHECK(std::abs(m) < 1e-12);
}

TEST_CASE("run_flow: perturbed model converges to a Fubini-Study family") {
  const auto g = grid64();
  const auto W0 = perturb(model2(g), {Perturbation{0.3, 0.0, BaseFactor::one, FiberShape::eigen, 0, 1}});
  const auto res = run_flow(W0);
  REQUIRE(res.converged);
  REQUIRE(res.diagnostics.rate);
  CHECK(*res.diagnostics.rate > 0.0);
  CHECK(sup_velocity(res.final_state) < 1e-8);
  const auto fit = extract_hermitian_form(*g, res.final_state.W.center(), 2);
  CHECK(fit.residual <= 1e-4);
  CHECK(limit_splitting(res.final_state.W) <= 1e-4);
  const auto W1 = rescale(res.final_state.W, 1);
  const auto rep = directimage::theorem1_report(W1, isometry_defect(W1).G);
  CHECK(rep.positive);
  const auto ell = family::elliptic_residual(W1, isometry_defect(W1).G);
  CHECK(ell.sup <= 1e-3);
}

TEST_CASE("evolution residual vanishes at first order in dt") {
  const auto g = grid64();
  const auto W0 = perturb(model2(g), {Perturbation{0.05, 0.0, BaseFactor::s, FiberShape::z2_over_q2},
                                      Perturbation{0.2, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}});
  CHECK(family::kodaira_spencer_residual(W0) > 1e-2);
  std::vector<double> r;
  for (double dt : {0.02, 0.01, 0.005}) {
    FlowParams params;
    params.dt = dt;
    params.t_max = 0.2;
    const auto res = run_flow(W0, params);
    const auto& rows = res.diagnostics.samples;
    r.push_back(rows[rows.size() / 2].residual_rescaled);
  }
  const double order = std::log2((r[0] - r[1]) / (r[1] - r[2]));
  MESSAGE("residuals " << r[0] << " " << r[1] << " " << r[2] << ", order " << order);
  CHECK(r[2] < r[1]);
  CHECK(r[1] < r[0]);
  CHECK(std::abs(order - 1.0) <= 0.2);

  // Trajectory overload agrees with the on-line monitor.
  FlowParams params;
  params.dt = 0.01;
  params.t_max = 0.05;
  params.keep_trajectory = true;
  const auto res = run_flow(W0, params);
  const auto e = evolution_residual(res.trajectory);
  REQUIRE(e.size() == res.trajectory.size() - 2);
  for (std::size_t j = 0; j < e.size(); ++j)
    CHECK(e[j].sup_rescaled == doctest::Approx(res.diagnostics.samples[j + 1].residual_rescaled).epsilon(1e-12));
}

TEST_CASE("run_flow reports non-convergence as an outcome") {
  const auto W0 = perturb(model2(grid16()), {Perturbation{0.3, 0.0, BaseFactor::one, FiberShape::z_over_q_sq}});
  FlowParams params;
  params.t_max = 0.1;
  const auto res = run_flow(W0, params);
  CHECK_FALSE(res.converged);
  CHECK(res.outcome.find("not converged") != std::string::npos);
  CHECK_THROWS_AS(parse_scheme("leapfrog"), Error);
  CHECK(parse_scheme(to_string(Scheme::rk4)) == Scheme::rk4);
}
