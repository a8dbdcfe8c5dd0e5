#include "glab/flow/hermitian_fit.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "glab/projgeom/fiber_ops.hpp"

namespace glab::flow {

namespace {

// Real basis of the hermitian r x r matrices.
std::vector<CMatrix> hermitian_basis(int r) {
  std::vector<CMatrix> basis;
  for (int a = 0; a < r; ++a) {
    CMatrix E = CMatrix::Zero(r, r);
    E(a, a) = 1.0;
    basis.push_back(E);
    for (int b = a + 1; b < r; ++b) {
      CMatrix Re = CMatrix::Zero(r, r), Im = CMatrix::Zero(r, r);
      Re(a, b) = Re(b, a) = 1.0;
      Im(a, b) = kI;
      Im(b, a) = -kI;
      basis.push_back(Re);
      basis.push_back(Im);
    }
  }
  return basis;
}

bool positive(const CMatrix& P) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(P, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff() > 0.0;
}

// log(u^dagger P u) per node, u = w / |w|.
RealField log_form(const projgeom::FiberGrid& grid, const std::vector<CVector>& u, const CMatrix& P) {
  RealField out(grid.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log((u[i].adjoint() * P * u[i])(0, 0).real());
  return out;
}

}  // namespace

HermitianFit extract_hermitian_form(const projgeom::FiberGrid& grid, const RealField& smooth, int k,
                                    int max_iterations) {
  if (k < 1) throw Error("extract_hermitian_form: degree must be positive");
  if (smooth.size() != grid.size()) throw Error("extract_hermitian_form: size mismatch");
  const int r = grid.rank();
  const std::size_t N = grid.size();

  std::vector<CVector> u(N);
  RealField mu(N), target(N), expo(N);
  for (std::size_t i = 0; i < N; ++i) {
    u[i] = projgeom::homogeneous(grid, i);
    u[i] /= u[i].norm();
    mu[i] = grid.quad_weights()[i] * grid.fs_density()[i];
    target[i] = smooth[i] / k;
  }
  // Center the target so the exponential stays O(1).
  double shift = 0.0, mass = 0.0;
  for (std::size_t i = 0; i < N; ++i) shift += mu[i] * target[i], mass += mu[i];
  shift /= mass;
  for (std::size_t i = 0; i < N; ++i) expo[i] = std::exp(target[i] - shift);

  // Exactly representable weights are recovered by the projection alone.
  CMatrix P = projgeom::eigen_project(grid, expo).lambda;
  P = 0.5 * (P + P.adjoint());
  if (!positive(P)) P = CMatrix::Identity(r, r);

  const auto basis = hermitian_basis(r);
  const int np = static_cast<int>(basis.size());
  HermitianFit fit;
  auto weighted_error = [&](const CMatrix& Q) {
    const auto lq = log_form(grid, u, Q);
    double e = 0.0;
    for (std::size_t i = 0; i < N; ++i) e += mu[i] * std::pow(target[i] - shift - lq[i], 2);
    return e;
  };
  double err = weighted_error(P);
  for (int it = 0; it < max_iterations; ++it) {
    fit.iterations = it + 1;
    Eigen::MatrixXd JtJ = Eigen::MatrixXd::Zero(np, np);
    Eigen::VectorXd Jte = Eigen::VectorXd::Zero(np);
    for (std::size_t i = 0; i < N; ++i) {
      const double q = (u[i].adjoint() * P * u[i])(0, 0).real();
      const double e = target[i] - shift - std::log(q);
      Eigen::VectorXd J(np);
      for (int j = 0; j < np; ++j) J(j) = (u[i].adjoint() * basis[j] * u[i])(0, 0).real() / q;
      JtJ.noalias() += mu[i] * J * J.transpose();
      Jte.noalias() += mu[i] * e * J;
    }
    const Eigen::VectorXd delta = JtJ.ldlt().solve(Jte);
    CMatrix step = CMatrix::Zero(r, r);
    for (int j = 0; j < np; ++j) step += delta(j) * basis[j];
    // Damped update: keep P positive and the error non-increasing.
    double t = 1.0;
    CMatrix next = P + step;
    double next_err = positive(next) ? weighted_error(next) : INFINITY;
    while (next_err > err && t > 1e-6) {
      t *= 0.5;
      next = P + t * step;
      next_err = positive(next) ? weighted_error(next) : INFINITY;
    }
    if (!(next_err <= err)) {
      fit.converged = true;  // no further descent possible at working precision
      break;
    }
    const double rel = step.norm() * t / P.norm();
    P = next;
    err = next_err;
    if (rel < 1e-14) {
      fit.converged = true;
      break;
    }
  }

  const double det = P.determinant().real();
  const CMatrix Pn = P / std::pow(det, 1.0 / r);
  fit.M = Pn.inverse();
  fit.M = 0.5 * (fit.M + fit.M.adjoint());
  const auto lq = log_form(grid, u, Pn);
  RealField rest(N);
  double c = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    rest[i] = smooth[i] - k * lq[i];
    c += mu[i] * rest[i];
  }
  fit.constant = c / mass;
  for (std::size_t i = 0; i < N; ++i) fit.residual = std::max(fit.residual, std::abs(rest[i] - fit.constant));
  return fit;
}

}  // namespace glab::flow
