#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "glab/core/types.hpp"
#include "glab/metrics/base_stencil.hpp"

namespace glab::metrics {

/// A hermitian metric H(s) on the trivial rank-r bundle E over a disc, given
/// either by a closed-form generator or by samples on a fixed stencil.
/// Matrix convention: H(i, j) = <e_i, e_j>, linear in the first slot.
class HermitianFamily {
 public:
  using Generator = std::function<CMatrix(Complex)>;

  /// H(s) = H for all s.
  static HermitianFamily constant(const CMatrix& H);
  /// H(s) = diag(d) for all s.
  static HermitianFamily diagonal(const std::vector<double>& d);
  /// H(s) = M^{1/2} exp(-s sbar B) M^{1/2} with B hermitian and M positive.
  /// B = I, M = I is the model family e^{-s sbar} I; B = -I flips the sign.
  static HermitianFamily exp_quadratic(const CMatrix& B, const CMatrix& M);
  /// Values on the points of `stencil`, in stencil order.
  static HermitianFamily sampled(const BaseStencil& stencil, std::vector<CMatrix> values);
  /// Arbitrary closed-form generator.
  static HermitianFamily from_generator(int rank, Generator gen, std::string name);

  int rank() const { return rank_; }
  const std::string& name() const { return name_; }
  bool analytic() const { return static_cast<bool>(gen_); }

  /// H(s). Sampled families only answer at their stencil points.
  CMatrix at(Complex s) const;
  /// Values on `stencil`, validated hermitian and positive definite.
  std::vector<CMatrix> sample(const BaseStencil& stencil) const;
  /// Same family times a positive constant.
  HermitianFamily scaled(double c) const;
  /// Exact Chern curvature -d dbar H + dH H^{-1} dbar H at s = 0 when known
  /// in closed form.
  const std::optional<CMatrix>& exact_curvature() const { return exact_theta_; }

 private:
  int rank_ = 0;
  std::string name_;
  Generator gen_;
  std::optional<BaseStencil> stencil_;
  std::vector<CMatrix> samples_;
  std::optional<CMatrix> exact_theta_;
};

/// Throws unless M is hermitian (to 1e-12 relative) and positive definite.
void check_positive_hermitian(const CMatrix& M, const std::string& what);

/// Principal square root of a positive hermitian matrix.
CMatrix sqrt_positive(const CMatrix& M);

}  // namespace glab::metrics
