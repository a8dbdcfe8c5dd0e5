#pragma once

#include <functional>
#include <string>
#include <vector>

#include "glab/core/types.hpp"
#include "glab/family/family_fields.hpp"
#include "glab/metrics/base_stencil.hpp"
#include "glab/metrics/hermitian_family.hpp"
#include "glab/metrics/weight_field.hpp"

namespace glab::directimage {

using metrics::BaseStencil;
using metrics::WeightField;

/// H(s)(i, j) = integral of f_i conj(f_j) e^{-phi(s)} d(mu_omega_s) per stencil
/// point, sections f = (1, z).
struct L2MetricField {
  BaseStencil stencil;
  std::vector<CMatrix> H;
  const CMatrix& center() const { return H.at(BaseStencil::kCenter); }
};

L2MetricField l2_metric(const WeightField& W);

enum class CurvatureMethod { finite_difference, richardson, to_weng };
std::string to_string(CurvatureMethod m);

struct CurvatureReport {
  CMatrix theta;  // Theta_{s sbar} at the center, hermitian
  CurvatureMethod method = CurvatureMethod::finite_difference;
  double griffiths_min = 0.0;
};

/// Smallest eigenvalue of L^{-1} Theta L^{-dagger}, H = L L^dagger: the minimum
/// of v^dagger Theta v / v^dagger H v.
double griffiths_min(const CMatrix& theta, const CMatrix& H);

/// Theta = -d dbar H + dH H^{-1} dbar H at the center.
CurvatureReport chern_curvature(const std::vector<CMatrix>& H, const BaseStencil& stencil);
CurvatureReport chern_curvature(const L2MetricField& Hf);
CurvatureReport chern_curvature(const metrics::HermitianFamily& H, const BaseStencil& stencil);

/// Richardson combination (4 X_{h/2} - X_h) / 3 of finite-difference curvatures
/// of weights sampled by `weight_at` on stencils of step h and h/2.
CurvatureReport chern_curvature_richardson(const std::function<WeightField(const BaseStencil&)>& weight_at,
                                           double h);

/// Theta_ab = integral of (c + Box c) f_a conj(f_b) e^{-phi} d(mu_omega) at the
/// center. Only the second To-Weng term: warns when sup |A| exceeds
/// `a_threshold` (the result then omits the negative Green term).
CurvatureReport toweng_curvature(const WeightField& W, const family::FamilyFields& ff,
                                 double a_threshold = 1e-4);

/// Same with c(phi) Richardson-extrapolated in the base step.
CurvatureReport toweng_curvature_richardson(const std::function<WeightField(const BaseStencil&)>& weight_at,
                                            double h, double a_threshold = 1e-4);

/// Change of section basis: S^dagger H S.
CMatrix congruence(const CMatrix& H, const CMatrix& S);

}  // namespace glab::directimage
