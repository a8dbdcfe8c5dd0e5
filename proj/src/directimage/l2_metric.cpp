#include "glab/directimage/l2_metric.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "glab/core/log.hpp"
#include "glab/metrics/fiber_metric.hpp"
#include "glab/projgeom/fiber_ops.hpp"

namespace glab::directimage {

namespace {

// integral of f(z) W_a conj(W_b) e^{-phi} d(mu_omega) for a weight of degree 1,
// with e^{-phi} = e^{-smooth} / |w|^2 so every factor stays bounded.
CMatrix weighted_gram(const WeightField& W, int point, const RealField& sigma, const RealField* f) {
  const auto& grid = *W.grid;
  const auto& smooth = W.smooth_part(point);
  const int r = grid.rank();
  CMatrix H = CMatrix::Zero(r, r);
  const auto wq = grid.quad_weights();
  const auto gfs = grid.fs_density();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CVector u = projgeom::homogeneous(grid, i);
    u /= u.norm();
    double dens = wq[i] * gfs[i] * sigma[i] / std::pow(kPi, grid.dim()) * std::exp(-smooth[i]);
    if (f) dens *= (*f)[i];
    if (!std::isfinite(dens)) throw Error("l2_metric: non-finite integrand at node " + std::to_string(i));
    H.noalias() += dens * (u * u.adjoint());
  }
  return 0.5 * (H + H.adjoint());
}

}  // namespace

std::string to_string(CurvatureMethod m) {
  switch (m) {
    case CurvatureMethod::finite_difference: return "finite-difference";
    case CurvatureMethod::richardson: return "finite-difference-richardson";
    case CurvatureMethod::to_weng: return "to-weng";
  }
  return "unknown";
}

L2MetricField l2_metric(const WeightField& W) {
  if (W.k != 1) throw Error("l2_metric: expects a weight on O_E(1)");
  L2MetricField out{W.stencil, {}};
  for (int p = 0; p < BaseStencil::kPoints; ++p)
    out.H.push_back(weighted_gram(W, p, metrics::conformal_factor(W, p), nullptr));
  return out;
}

double griffiths_min(const CMatrix& theta, const CMatrix& H) {
  Eigen::LLT<CMatrix> llt(H);
  if (llt.info() != Eigen::Success) throw Error("griffiths_min: metric is not positive definite");
  const CMatrix Linv = llt.matrixL().solve(CMatrix::Identity(H.rows(), H.cols()));
  CMatrix S = Linv * theta * Linv.adjoint();
  S = 0.5 * (S + S.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> es(S, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

CurvatureReport chern_curvature(const std::vector<CMatrix>& H, const BaseStencil& stencil) {
  if (H.size() != BaseStencil::kPoints) throw Error("chern_curvature: need 9 stencil matrices");
  const CMatrix& H0 = H[BaseStencil::kCenter];
  Eigen::FullPivLU<CMatrix> lu(H0);
  if (!lu.isInvertible()) throw Error("chern_curvature: singular metric at the center");
  const CMatrix dH = stencil.ds(H);
  const CMatrix dbH = stencil.dsbar(H);
  CMatrix theta = -stencil.ddbar(H) + dH * lu.solve(dbH);
  theta = 0.5 * (theta + theta.adjoint());
  return {theta, CurvatureMethod::finite_difference, griffiths_min(theta, H0)};
}

CurvatureReport chern_curvature(const L2MetricField& Hf) { return chern_curvature(Hf.H, Hf.stencil); }

CurvatureReport chern_curvature(const metrics::HermitianFamily& H, const BaseStencil& stencil) {
  return chern_curvature(H.sample(stencil), stencil);
}

CurvatureReport chern_curvature_richardson(const std::function<WeightField(const BaseStencil&)>& weight_at,
                                           double h) {
  const auto coarse = chern_curvature(l2_metric(weight_at(BaseStencil{h})));
  const auto Hf = l2_metric(weight_at(BaseStencil{0.5 * h}));
  const auto fine = chern_curvature(Hf);
  CMatrix theta = (4.0 * fine.theta - coarse.theta) / 3.0;
  return {theta, CurvatureMethod::richardson, griffiths_min(theta, Hf.center())};
}

namespace {

CMatrix toweng_theta(const WeightField& W, const metrics::FiberMetric& metric, const RealField& c) {
  const auto bc = family::box(metric, *W.grid, c);
  RealField f(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) f[i] = c[i] + bc[i];
  return weighted_gram(W, BaseStencil::kCenter, metric.conformal, &f);
}

void check_a(double sup_a, double threshold) {
  if (sup_a > threshold)
    warn("toweng_curvature: sup|A| = " + std::to_string(sup_a) +
         " exceeds threshold; the omitted Green term is not negligible");
}

}  // namespace

CurvatureReport toweng_curvature(const WeightField& W, const family::FamilyFields& ff, double a_threshold) {
  if (W.k != 1) throw Error("toweng_curvature: expects a weight on O_E(1)");
  check_a(family::kodaira_spencer_residual(ff), a_threshold);
  const CMatrix theta = toweng_theta(W, ff.metric, ff.c_phi);
  const CMatrix H0 = weighted_gram(W, BaseStencil::kCenter, ff.metric.conformal, nullptr);
  return {theta, CurvatureMethod::to_weng, griffiths_min(theta, H0)};
}

CurvatureReport toweng_curvature_richardson(const std::function<WeightField(const BaseStencil&)>& weight_at,
                                            double h, double a_threshold) {
  const auto Wc = weight_at(BaseStencil{h});
  const auto Wf = weight_at(BaseStencil{0.5 * h});
  const auto fc = family::family_fields(Wc);
  const auto ff = family::family_fields(Wf);
  check_a(family::kodaira_spencer_residual(ff), a_threshold);
  RealField c(ff.c_phi.size());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = (4.0 * ff.c_phi[i] - fc.c_phi[i]) / 3.0;
  const CMatrix theta = toweng_theta(Wf, ff.metric, c);
  const CMatrix H0 = weighted_gram(Wf, BaseStencil::kCenter, ff.metric.conformal, nullptr);
  return {theta, CurvatureMethod::to_weng, griffiths_min(theta, H0)};
}

CMatrix congruence(const CMatrix& H, const CMatrix& S) { return S.adjoint() * H * S; }

}  // namespace glab::directimage
