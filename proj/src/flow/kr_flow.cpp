#include "glab/flow/kr_flow.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "glab/core/log.hpp"
#include "glab/family/family_fields.hpp"
#include "glab/metrics/fiber_metric.hpp"
#include "glab/projgeom/fiber_ops.hpp"

namespace glab::flow {

using metrics::BaseStencil;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double sup_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

double oscillation(const RealField& f) {
  const auto [lo, hi] = std::minmax_element(f.begin(), f.end());
  return *hi - *lo;
}

bool all_finite(const RealField& f) {
  return std::all_of(f.begin(), f.end(), [](double v) { return std::isfinite(v); });
}

// One fiber: weight, its velocity and smallest conformal factor.
struct FiberState {
  RealField phi;
  RealField u;
  double min_sigma = 0.0;
};

bool evaluate(const projgeom::FiberGrid& grid, int k, FiberState& s, RealField* lap, Exec exec) {
  s.min_sigma = ricci_potential_kernel(grid, k, s.phi, s.u, lap, exec);
  return s.min_sigma > 0.0 && all_finite(s.u);
}

RealField axpy(const RealField& x, double a, const RealField& y) {
  RealField out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] + a * y[i];
  return out;
}

// (1 - h kappa Laplacian_S)^{-1} f.
RealField implicit_solve(const projgeom::FiberGrid& grid, const RealField& f, double hk, Exec exec) {
  const auto& sht = grid.transform();
  const double shift = f[0];
  ComplexField c(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) c[i] = f[i] - shift;
  auto a = sht.analyze(c, exec);
  sht.scale_by_degree(std::span<Complex>(a), [hk](int l) { return 1.0 / (1.0 + hk * l * (l + 1)); });
  const auto back = sht.synthesize(a, exec);
  RealField out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) out[i] = back[i].real() + shift;
  return out;
}

// Advances one fiber by n substeps of h; false on loss of positivity.
bool advance(const projgeom::FiberGrid& grid, int k, FiberState& s, double h, int n, Scheme scheme,
             double kappa, Exec exec) {
  for (int step = 0; step < n; ++step) {
    switch (scheme) {
      case Scheme::euler: {
        s.phi = axpy(s.phi, h, s.u);
        break;
      }
      case Scheme::rk4: {
        FiberState st;
        st.phi = axpy(s.phi, 0.5 * h, s.u);
        if (!evaluate(grid, k, st, nullptr, exec)) return false;
        const RealField k2 = st.u;
        st.phi = axpy(s.phi, 0.5 * h, k2);
        if (!evaluate(grid, k, st, nullptr, exec)) return false;
        const RealField k3 = st.u;
        st.phi = axpy(s.phi, h, k3);
        if (!evaluate(grid, k, st, nullptr, exec)) return false;
        for (std::size_t i = 0; i < s.phi.size(); ++i)
          s.phi[i] += h / 6.0 * (s.u[i] + 2.0 * k2[i] + 2.0 * k3[i] + st.u[i]);
        break;
      }
      case Scheme::imex: {
        const auto lap = projgeom::sphere_laplacian(grid, s.phi, exec);
        RealField rhs(s.phi.size());
        for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = s.phi[i] + h * (s.u[i] - kappa * lap[i]);
        s.phi = implicit_solve(grid, rhs, h * kappa, exec);
        break;
      }
    }
    if (!all_finite(s.phi) || !evaluate(grid, k, s, nullptr, exec)) return false;
  }
  return true;
}

template <class F>
void for_each_point(Exec exec, F&& f) {
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int p = 0; p < BaseStencil::kPoints; ++p) f(p);
  } else {
    for (int p = 0; p < BaseStencil::kPoints; ++p) f(p);
  }
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::euler: return "euler";
    case Scheme::rk4: return "rk4";
    case Scheme::imex: return "imex";
  }
  return "unknown";
}

Scheme parse_scheme(const std::string& name) {
  if (name == "euler") return Scheme::euler;
  if (name == "rk4") return Scheme::rk4;
  if (name == "imex") return Scheme::imex;
  throw Error("unknown scheme '" + name + "' (expected euler, rk4 or imex)");
}

FlowState initial_state(WeightField W0, Exec exec) {
  if (W0.k != W0.grid->rank())
    throw Error("initial_state: the flow runs on O_E(r), got k = " + std::to_string(W0.k));
  FlowState s;
  s.velocity.resize(BaseStencil::kPoints);
  std::vector<double> mins(BaseStencil::kPoints);
  const auto& grid = *W0.grid;
  for_each_point(exec, [&](int p) {
    mins[p] = ricci_potential_kernel(grid, W0.k, W0.smooth_part(p), s.velocity[p], nullptr, exec);
  });
  for (int p = 0; p < BaseStencil::kPoints; ++p)
    if (!(mins[p] > 0.0))
      throw Error("initial_state: weight is not fiberwise positive at stencil point " + std::to_string(p) +
                  " (smallest conformal factor " + std::to_string(mins[p]) + ")");
  s.min_conformal = *std::min_element(mins.begin(), mins.end());
  s.W = std::move(W0);
  return s;
}

FlowState flow_step(const FlowState& state, double dt, Scheme scheme, const StepOptions& options) {
  if (!(dt > 0.0)) throw Error("flow_step: dt must be positive");
  const auto& grid = *state.W.grid;
  const int k = state.W.k;
  const double kappa = options.imex_kappa > 0.0 ? options.imex_kappa : 1.0 / state.min_conformal;
  for (int j = 0; j <= options.max_halvings; ++j) {
    const int n = 1 << j;
    const double h = dt / n;
    std::vector<FiberState> fibers(BaseStencil::kPoints);
    std::vector<char> ok(BaseStencil::kPoints, 0);
    for_each_point(options.exec, [&](int p) {
      fibers[p].phi = state.W.smooth_part(p);
      fibers[p].u = state.velocity[p];
      ok[p] = advance(grid, k, fibers[p], h, n, scheme, kappa, options.exec);
    });
    if (std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; })) {
      FlowState out;
      out.t = state.t + dt;
      out.W = state.W;
      out.velocity.resize(BaseStencil::kPoints);
      out.min_conformal = fibers[0].min_sigma;
      for (int p = 0; p < BaseStencil::kPoints; ++p) {
        out.W.values[p] = std::move(fibers[p].phi);
        out.velocity[p] = std::move(fibers[p].u);
        out.min_conformal = std::min(out.min_conformal, fibers[p].min_sigma);
      }
      out.dt_used = h;
      return out;
    }
  }
  throw Error("flow_step: step rejected at t = " + std::to_string(state.t) + " after " +
              std::to_string(options.max_halvings) + " halvings of dt = " + std::to_string(dt));
}

double sup_velocity(const FlowState& state) {
  double m = 0.0;
  for (const auto& u : state.velocity) m = std::max(m, sup_abs(u));
  return m;
}

MonitorFields monitor_fields(const FlowState& state, const DetTrivialization& triv) {
  const auto& W = state.W;
  const auto& grid = *W.grid;
  const int r = grid.rank();
  const auto ff = family::family_fields(W);
  const auto boxc = family::box(ff.metric, grid, ff.c_phi);

  std::vector<double> psi(BaseStencil::kPoints);
  for (int p = 0; p < BaseStencil::kPoints; ++p) psi[p] = -triv.log_mass(W, p);
  const double psi0 = psi[BaseStencil::kCenter];
  for (auto& v : psi) v -= psi0;

  MonitorFields m;
  m.t = state.t;
  m.psi_ss = W.stencil.ddbar(psi);
  m.c = ff.c_phi;
  m.min_c = *std::min_element(m.c.begin(), m.c.end());
  m.rhs_raw.resize(m.c.size());
  m.rhs_rescaled.resize(m.c.size());
  for (std::size_t i = 0; i < m.c.size(); ++i) {
    // Box of the rescaled metric on c / r equals Box_omega c.
    const double common = -boxc[i] + ff.A_normsq[i] - m.psi_ss;
    m.rhs_raw[i] = common + r * m.c[i];
    m.rhs_rescaled[i] = common + m.c[i];
  }
  return m;
}

EvolutionResidual evolution_residual(const std::vector<MonitorFields>& window) {
  if (window.size() != 3 && window.size() != 5)
    throw Error("evolution_residual: need a window of 3 or 5 samples");
  const std::size_t mid = window.size() / 2;
  const auto& a = window[mid - 1];
  const auto& b = window[mid + 1];
  const double span = b.t - a.t;
  for (std::size_t j = 1; j < window.size(); ++j) {
    const double d = window[j].t - window[j - 1].t;
    if (!(d > 0.0) || std::abs(d - 0.5 * span) > 1e-9 * span)
      throw Error("evolution_residual: samples are not equally spaced");
  }
  const auto& m = window[mid];
  EvolutionResidual out;
  out.raw.resize(m.c.size());
  out.rescaled.resize(m.c.size());
  for (std::size_t i = 0; i < m.c.size(); ++i) {
    const double dtc = (b.c[i] - a.c[i]) / span;
    out.raw[i] = dtc - m.rhs_raw[i];
    out.rescaled[i] = dtc - m.rhs_rescaled[i];
    if (window.size() == 5) {
      const double wide = (window[4].c[i] - window[0].c[i]) / (window[4].t - window[0].t);
      out.dt_error = std::max(out.dt_error, std::abs(wide - dtc) / 3.0);
    }
  }
  out.sup_raw = sup_abs(out.raw);
  out.sup_rescaled = sup_abs(out.rescaled);
  out.dt_too_coarse = out.dt_error > out.sup_rescaled && out.dt_error > 1e-12;
  return out;
}

std::vector<EvolutionResidual> evolution_residual(const std::vector<FlowState>& trajectory) {
  std::vector<MonitorFields> m;
  for (const auto& s : trajectory) m.push_back(monitor_fields(s));
  std::vector<EvolutionResidual> out;
  bool coarse = false;
  for (std::size_t j = 1; j + 1 < m.size(); ++j) {
    const bool wide = j >= 2 && j + 2 < m.size();
    const std::size_t lo = wide ? j - 2 : j - 1;
    const std::size_t hi = wide ? j + 2 : j + 1;
    out.push_back(evolution_residual(std::vector<MonitorFields>(m.begin() + lo, m.begin() + hi + 1)));
    coarse = coarse || out.back().dt_too_coarse;
  }
  if (coarse)
    warn("evolution_residual: time step too coarse; the d_t error estimate exceeds the residual");
  return out;
}

FlowResult run_flow(const WeightField& W0, const FlowParams& params) {
  if (!(params.dt > 0.0) || !(params.tol > 0.0) || !(params.t_max >= 0.0) || params.sample_every < 1)
    throw Error("run_flow: dt, tol, t_max and sample_every must be positive");
  const Exec exec = params.step.exec;
  FlowResult res;
  FlowState state = initial_state(W0, exec);
  StepOptions step = params.step;
  if (!(step.imex_kappa > 0.0)) step.imex_kappa = 1.0 / state.min_conformal;
  const DetTrivialization triv;
  const int r = state.W.grid->rank();

  auto& rows = res.diagnostics.samples;
  std::deque<MonitorFields> recent;  // last five monitor samples
  bool coarse = false;
  int last_sampled = -1;

  auto fill_residual = [&](std::size_t row, std::size_t first, std::size_t count) {
    // `first` indexes the global sample sequence; `recent` holds its tail.
    const std::size_t offset = rows.size() - recent.size();
    std::vector<MonitorFields> win(recent.begin() + (first - offset), recent.begin() + (first - offset) + count);
    try {
      const auto e = evolution_residual(win);
      rows[row].residual_raw = e.sup_raw;
      rows[row].residual_rescaled = e.sup_rescaled;
      coarse = coarse || e.dt_too_coarse;
    } catch (const Error&) {
      // unequal spacing at the final sample: leave NaN
    }
  };

  auto record = [&]() {
    FlowSample s;
    s.t = state.t;
    s.sup_u = sup_velocity(state);
    s.residual_raw = s.residual_rescaled = kNaN;
    if (params.monitor) {
      auto m = monitor_fields(state, triv);
      s.min_c_over_r = m.min_c / r;
      s.psi_ss = m.psi_ss;
      s.iso_defect = metrics::isometry_defect(metrics::rescale(state.W, 1)).defect[BaseStencil::kCenter];
      recent.push_back(std::move(m));
      if (recent.size() > 5) recent.pop_front();
    } else {
      std::vector<double> psi(BaseStencil::kPoints);
      for (int p = 0; p < BaseStencil::kPoints; ++p) psi[p] = -triv.log_mass(state.W, p);
      const double psi0 = psi[BaseStencil::kCenter];
      for (auto& v : psi) v -= psi0;
      s.psi_ss = state.W.stencil.ddbar(psi);
      s.min_c_over_r = s.iso_defect = kNaN;
    }
    rows.push_back(s);
    if (params.keep_trajectory) res.trajectory.push_back(state);
    last_sampled = res.steps;
    if (!params.monitor) return;
    const std::size_t m = rows.size() - 1;
    if (m == 2) fill_residual(1, 0, 3);
    if (m >= 4) fill_residual(m - 2, m - 4, 5);
  };

  record();
  while (true) {
    if (sup_velocity(state) < params.tol) {
      res.converged = true;
      break;
    }
    if (state.t >= params.t_max - 1e-9 * params.dt) break;
    state = flow_step(state, params.dt, params.scheme, step);
    ++res.steps;
    if (res.steps % params.sample_every == 0) record();
  }
  if (last_sampled != res.steps) record();
  if (params.monitor && rows.size() >= 3) {
    const std::size_t L = rows.size() - 1;
    if (L >= 2 && std::isnan(rows[L - 1].residual_rescaled)) fill_residual(L - 1, L - 2, 3);
  }
  if (coarse) warn("run_flow: time step too coarse; the d_t error estimate exceeds the evolution residual");

  // Exponential rate of sup|u_t| once it is below 0.1.
  std::vector<double> ts, ls;
  for (const auto& s : rows)
    if (s.sup_u < 0.1 && s.sup_u > 0.0) {
      ts.push_back(s.t);
      ls.push_back(std::log(s.sup_u));
    }
  if (res.converged && ts.size() >= 3) {
    const double n = ts.size();
    double st = 0, sl = 0, stt = 0, stl = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      st += ts[i];
      sl += ls[i];
      stt += ts[i] * ts[i];
      stl += ts[i] * ls[i];
    }
    const double denom = n * stt - st * st;
    if (denom > 0.0) res.diagnostics.rate = -(n * stl - st * sl) / denom;
  }

  if (res.converged)
    res.outcome = res.steps == 0 ? "converged at t = 0" : "converged at t = " + std::to_string(state.t);
  else
    res.outcome = "not converged by t_max = " + std::to_string(params.t_max) +
                  " (sup|u| = " + std::to_string(sup_velocity(state)) + ")";
  if (res.converged && res.diagnostics.rate && *res.diagnostics.rate <= 0.0)
    warn("run_flow: fitted decay rate is not positive");
  res.final_state = std::move(state);
  return res;
}

PositivityMonitor positivity_monitor(const FlowDiagnostics& diagnostics, int rank) {
  PositivityMonitor out;
  for (const auto& s : diagnostics.samples) out.min_c.push_back(rank * s.min_c_over_r);
  for (std::size_t j = 1; j < out.min_c.size(); ++j)
    if ((out.min_c[j] < 0.0) != (out.min_c[0] < 0.0)) {
      out.first_sign_change = j;
      break;
    }
  return out;
}

double limit_splitting(const WeightField& W, const DetTrivialization& triv) {
  double worst = 0.0;
  for (int p = 0; p < BaseStencil::kPoints; ++p) {
    auto f = metrics::log_det_plus(W, p, 1.0);
    const double psi = -triv.log_mass(W, p);
    for (auto& v : f) v -= psi;
    worst = std::max(worst, oscillation(f));
  }
  return worst;
}

}  // namespace glab::flow
