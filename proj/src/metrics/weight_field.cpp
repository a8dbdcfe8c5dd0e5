#include "glab/metrics/weight_field.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "glab/metrics/fiber_metric.hpp"
#include "glab/projgeom/fiber_ops.hpp"

namespace glab::metrics {

RealField WeightField::raw(int point) const {
  const auto& rel = values.at(point);
  const auto R = grid->fs_weight();
  RealField out(rel.size());
  for (std::size_t i = 0; i < rel.size(); ++i) out[i] = rel[i] + k * R[i];
  return out;
}

WeightField sample_weight(std::shared_ptr<const FiberGrid> grid, int k, const BaseStencil& stencil,
                          const SmoothWeight& smooth) {
  if (!(stencil.h > 0.0)) throw Error("sample_weight: stencil step must be positive");
  if (k < 1) throw Error("sample_weight: degree must be positive");
  WeightField W{grid, k, stencil, {}};
  W.values.resize(BaseStencil::kPoints);
  for (int p = 0; p < BaseStencil::kPoints; ++p) {
    auto v = smooth(*grid, stencil.point(p));
    if (v.size() != grid->size()) throw Error("sample_weight: generator returned wrong size");
    W.values[p] = std::move(v);
  }
  return W;
}

WeightField induce_weight(std::shared_ptr<const FiberGrid> grid, const HermitianFamily& H,
                          const BaseStencil& stencil) {
  if (H.rank() != grid->rank()) throw Error("induce_weight: family rank does not match the fiber");
  const auto Hs = H.sample(stencil);
  std::vector<CMatrix> P(Hs.size());
  for (std::size_t p = 0; p < Hs.size(); ++p) P[p] = Hs[p].inverse();
  int next = 0;
  // log(w^dagger P w) - log(1+|z|^2) = log(u^dagger P u), u = w/|w|. The
  // scalar part of P is split off so fiber-constant factors stay exact.
  return sample_weight(grid, 1, stencil, [&](const FiberGrid& g, Complex) {
    const CMatrix& Pp = P[next++];
    const double scale = Pp.trace().real() / Pp.rows();
    const CMatrix shape = Pp / scale;
    const double log_scale = std::log(scale);
    RealField out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      CVector u = projgeom::homogeneous(g, i);
      u /= u.norm();
      out[i] = log_scale + std::log((u.adjoint() * shape * u)(0, 0).real());
    }
    return out;
  });
}

WeightField rescale(const WeightField& W, int new_k) {
  if (new_k < 1) throw Error("rescale: degree must be positive");
  WeightField out = W;
  const double f = double(new_k) / W.k;
  out.k = new_k;
  for (auto& v : out.values)
    for (auto& x : v) x *= f;
  return out;
}

WeightField add_base_function(const WeightField& W, const std::function<double(Complex)>& alpha) {
  WeightField out = W;
  for (int p = 0; p < BaseStencil::kPoints; ++p) {
    const double a = alpha(W.stencil.point(p));
    for (auto& x : out.values[p]) x += a;
  }
  return out;
}

RealField perturbation_values(const FiberGrid& grid, const Perturbation& p, Complex s) {
  Complex sigma = 1.0;
  if (p.base == BaseFactor::s) sigma = s;
  if (p.base == BaseFactor::ssbar) sigma = std::norm(s);
  sigma *= p.amplitude * std::polar(1.0, p.phase);
  RealField out(grid.size());
  if (p.shape == FiberShape::eigen) {
    const auto e = projgeom::eigenfunction(grid, p.a, p.b);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (sigma * e[i]).real();
    return out;
  }
  const auto x = grid.cos_theta();
  const auto ph = grid.azimuth_phase();
  for (std::size_t i = 0; i < out.size(); ++i) {
    // z / (1 + |z|^2) = sin(theta) e^{i phi} / 2
    const Complex zq = 0.5 * std::sqrt((1.0 - x[i]) * (1.0 + x[i])) * ph[i];
    const Complex shape = (p.shape == FiberShape::z_over_q_sq) ? Complex(zq.real() * zq.real()) : zq * zq;
    out[i] = (sigma * shape).real();
  }
  return out;
}

WeightField perturb(const WeightField& W, const std::vector<Perturbation>& terms) {
  WeightField out = W;
  for (const auto& t : terms)
    for (int p = 0; p < BaseStencil::kPoints; ++p) {
      const auto v = perturbation_values(*W.grid, t, W.stencil.point(p));
      for (std::size_t i = 0; i < v.size(); ++i) out.values[p][i] += v[i];
    }
  return out;
}

std::vector<Perturbation> random_perturbation(int rank, double amplitude, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Perturbation> terms;
  for (int a = 0; a < rank; ++a)
    for (int b = a; b < rank; ++b)
      for (double phase : {0.0, -0.5 * kPi}) {
        if (a == b && phase != 0.0) continue;  // e_aa is real
        Perturbation t;
        t.amplitude = u(rng);
        t.phase = phase;
        t.a = a;
        t.b = b;
        terms.push_back(t);
      }
  double largest = 0.0;
  for (const auto& t : terms) largest = std::max(largest, std::abs(t.amplitude));
  for (auto& t : terms) t.amplitude *= amplitude / largest;
  return terms;
}

std::vector<Perturbation> limit_to_positive(const WeightField& W, std::vector<Perturbation> terms,
                                            double margin) {
  for (int attempt = 0; attempt < 30; ++attempt) {
    const auto trial = perturb(W, terms);
    bool ok = true;
    for (int p = 0; p < BaseStencil::kPoints && ok; ++p) {
      const auto lap = projgeom::sphere_laplacian(*W.grid, trial.smooth_part(p));
      for (double v : lap)
        if (!(W.k + v > margin * W.k)) {
          ok = false;
          break;
        }
    }
    if (ok) return terms;
    for (auto& t : terms) t.amplitude *= 0.5;
  }
  throw Error("limit_to_positive: no positive amplitude found");
}

}  // namespace glab::metrics
