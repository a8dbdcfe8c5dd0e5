// Reference (serial) against parallel kernels. Arg 0 selects the kernel
// variant, arg 1 the number of Gauss-Legendre rows (n_phi = 2 n_theta).
#include <benchmark/benchmark.h>

#include "glab/flow/kr_flow.hpp"
#include "glab/metrics/weight_field.hpp"
#include "glab/projgeom/fiber_ops.hpp"

using namespace glab;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::reference : Exec::parallel; }

std::shared_ptr<const projgeom::FiberGrid> grid_of(const benchmark::State& state) {
  const int n = static_cast<int>(state.range(1));
  return projgeom::build_fiber_grid(1, {n, 2 * n});
}

metrics::WeightField start(std::shared_ptr<const projgeom::FiberGrid> g) {
  const CMatrix I2 = CMatrix::Identity(2, 2);
  const auto W = metrics::rescale(
      metrics::induce_weight(g, metrics::HermitianFamily::exp_quadratic(I2, I2), metrics::BaseStencil{}), 2);
  return metrics::perturb(W, {metrics::Perturbation{0.3, 0.0, metrics::BaseFactor::one, metrics::FiberShape::eigen, 0, 1}});
}

void label(benchmark::State& state) { state.SetLabel(exec_of(state) == Exec::reference ? "reference" : "parallel"); }

void BM_SphereLaplacian(benchmark::State& state) {
  const auto g = grid_of(state);
  const auto W = start(g);
  const auto& f = W.center();
  for (auto _ : state) benchmark::DoNotOptimize(projgeom::sphere_laplacian(*g, f, exec_of(state)));
  label(state);
}

void BM_FlowStep(benchmark::State& state) {
  const auto g = grid_of(state);
  const Exec exec = exec_of(state);
  const auto s0 = flow::initial_state(start(g), exec);
  flow::StepOptions opts;
  opts.exec = exec;
  opts.imex_kappa = 1.0 / s0.min_conformal;
  for (auto _ : state) benchmark::DoNotOptimize(flow::flow_step(s0, 0.05, flow::Scheme::imex, opts));
  label(state);
}

void sizes(benchmark::internal::Benchmark* b) {
  for (int exec : {0, 1})
    for (int n : {32, 64, 128}) b->Args({exec, n});
  b->Unit(benchmark::kMicrosecond)->UseRealTime();
}

}  // namespace

BENCHMARK(BM_SphereLaplacian)->Apply(sizes);
BENCHMARK(BM_FlowStep)->Apply(sizes);

BENCHMARK_MAIN();
