#include "glab/metrics/hermitian_family.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace glab::metrics {

void check_positive_hermitian(const CMatrix& M, const std::string& what) {
  if (M.rows() != M.cols() || M.rows() == 0) throw Error(what + ": matrix is not square");
  if (!M.allFinite()) throw Error(what + ": matrix has non-finite entries");
  const double scale = std::max(1.0, M.norm());
  if ((M - M.adjoint()).norm() > 1e-12 * scale) throw Error(what + ": matrix is not hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(M);
  if (!(es.eigenvalues().minCoeff() > 0.0))
    throw Error(what + ": matrix is not positive definite (smallest eigenvalue " +
                std::to_string(es.eigenvalues().minCoeff()) + ")");
}

CMatrix sqrt_positive(const CMatrix& M) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(M);
  return es.operatorSqrt();
}

HermitianFamily HermitianFamily::constant(const CMatrix& H) {
  check_positive_hermitian(H, "HermitianFamily::constant");
  HermitianFamily f;
  f.rank_ = static_cast<int>(H.rows());
  f.name_ = "constant";
  f.gen_ = [H](Complex) { return H; };
  f.exact_theta_ = CMatrix::Zero(H.rows(), H.cols());
  return f;
}

HermitianFamily HermitianFamily::diagonal(const std::vector<double>& d) {
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) H(i, i) = d[i];
  auto f = constant(H);
  f.name_ = "diagonal";
  return f;
}

HermitianFamily HermitianFamily::exp_quadratic(const CMatrix& B, const CMatrix& M) {
  if (B.rows() != M.rows() || B.cols() != M.cols()) throw Error("exp_quadratic: shape mismatch");
  if ((B - B.adjoint()).norm() > 1e-12 * std::max(1.0, B.norm()))
    throw Error("exp_quadratic: B is not hermitian");
  check_positive_hermitian(M, "exp_quadratic");
  const CMatrix root = sqrt_positive(M);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(B);
  const CMatrix V = es.eigenvectors();
  const Eigen::VectorXd mu = es.eigenvalues();
  HermitianFamily f;
  f.rank_ = static_cast<int>(B.rows());
  f.name_ = "exp-quadratic";
  f.gen_ = [root, V, mu](Complex s) {
    const double t = std::norm(s);
    Eigen::VectorXcd e(mu.size());
    for (Eigen::Index i = 0; i < mu.size(); ++i) e(i) = std::exp(-t * mu(i));
    const CMatrix E = V * e.asDiagonal() * V.adjoint();
    return CMatrix(root * E * root);
  };
  // At s = 0: dH = 0 and d dbar H = -M^{1/2} B M^{1/2}.
  f.exact_theta_ = CMatrix(root * B * root);
  return f;
}

HermitianFamily HermitianFamily::sampled(const BaseStencil& stencil, std::vector<CMatrix> values) {
  if (values.size() != BaseStencil::kPoints) throw Error("HermitianFamily::sampled: need 9 values");
  for (const auto& v : values) check_positive_hermitian(v, "HermitianFamily::sampled");
  HermitianFamily f;
  f.rank_ = static_cast<int>(values[0].rows());
  f.name_ = "sampled";
  f.stencil_ = stencil;
  f.samples_ = std::move(values);
  return f;
}

HermitianFamily HermitianFamily::from_generator(int rank, Generator gen, std::string name) {
  HermitianFamily f;
  f.rank_ = rank;
  f.name_ = std::move(name);
  f.gen_ = std::move(gen);
  return f;
}

CMatrix HermitianFamily::at(Complex s) const {
  if (gen_) return gen_(s);
  for (int i = 0; i < BaseStencil::kPoints; ++i)
    if (std::abs(stencil_->point(i) - s) <= 1e-14 * std::max(1.0, std::abs(s))) return samples_[i];
  throw Error("HermitianFamily::at: sampled family has no value at the requested point");
}

std::vector<CMatrix> HermitianFamily::sample(const BaseStencil& stencil) const {
  if (!gen_ && stencil_->h != stencil.h)
    throw Error("HermitianFamily::sample: sampled family was built on a different stencil");
  std::vector<CMatrix> out;
  out.reserve(BaseStencil::kPoints);
  for (int i = 0; i < BaseStencil::kPoints; ++i) {
    CMatrix H = gen_ ? gen_(stencil.point(i)) : samples_[i];
    check_positive_hermitian(H, "HermitianFamily " + name_);
    out.push_back(0.5 * (H + H.adjoint()));
  }
  return out;
}

HermitianFamily HermitianFamily::scaled(double c) const {
  if (!(c > 0.0)) throw Error("HermitianFamily::scaled: factor must be positive");
  HermitianFamily f = *this;
  if (gen_) {
    auto g = gen_;
    f.gen_ = [g, c](Complex s) { return CMatrix(c * g(s)); };
  }
  for (auto& v : f.samples_) v *= c;
  if (f.exact_theta_) *f.exact_theta_ *= c;
  return f;
}

}  // namespace glab::metrics
