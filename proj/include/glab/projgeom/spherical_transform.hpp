#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "glab/core/types.hpp"
#include "glab/projgeom/gauss_legendre.hpp"

namespace glab::projgeom {

/// Spherical-harmonic transform on a Gauss-Legendre (latitude) x uniform
/// (longitude) grid.
///
/// Fields are node-major: value (i, j) lives at i * n_phi + j, where i runs
/// over the Gauss-Legendre nodes x_i = cos(theta_i) in descending order and
/// j over longitudes phi_j = 2 pi j / n_phi. The basis is
///
///   Y_lm(theta, phi) = P_lm(cos theta) e^{i m phi} / sqrt(2 pi),
///
/// with P_lm orthonormal on [-1, 1] and no Condon-Shortley phase, so that
/// {Y_lm} is orthonormal for the area element d(cos theta) d(phi).
/// Truncation: degree L = n_theta - 1, order M = min(L, n_phi / 2 - 1).
/// Band-limited fields of degree <= L are transformed exactly.
///
/// The `parallel` path uses FFTW for the longitude stage and OpenMP over
/// orders; the `reference` path is a plain serial DFT + Legendre sum kept as
/// a test oracle. Both write each output from exactly one loop iteration, so
/// results do not depend on the thread count.
class SphericalTransform {
 public:
  SphericalTransform(const GaussLegendreRule& rule, int n_phi);
  ~SphericalTransform();
  SphericalTransform(const SphericalTransform&) = delete;
  SphericalTransform& operator=(const SphericalTransform&) = delete;

  int n_theta() const { return n_theta_; }
  int n_phi() const { return n_phi_; }
  int degree() const { return degree_; }
  int order() const { return order_; }
  std::size_t node_count() const { return static_cast<std::size_t>(n_theta_) * n_phi_; }
  std::size_t coeff_count() const { return coeff_count_; }
  std::size_t index(int l, int m) const;

  ComplexField analyze(std::span<const Complex> field, Exec exec = Exec::parallel) const;
  ComplexField synthesize(std::span<const Complex> coeffs, Exec exec = Exec::parallel) const;
  /// d/dtheta of the synthesized field.
  ComplexField synthesize_dtheta(std::span<const Complex> coeffs, Exec exec = Exec::parallel) const;
  /// d/dphi of the synthesized field.
  ComplexField synthesize_dphi(std::span<const Complex> coeffs, Exec exec = Exec::parallel) const;

  /// Multiplies every coefficient of degree l by factor(l), in place.
  template <class F>
  void scale_by_degree(std::span<Complex> coeffs, F&& factor) const {
    for (int m = -order_; m <= order_; ++m)
      for (int l = std::abs(m); l <= degree_; ++l) coeffs[index(l, m)] *= factor(l);
  }

  /// Normalized associated Legendre value P_lm(x_i), 0 <= m <= l <= L.
  double legendre(int l, int m, int i) const;
  /// d/dtheta P_lm(cos theta) at node i.
  double legendre_dtheta(int l, int m, int i) const;

 private:
  enum class Table { value, dtheta };
  ComplexField synthesize_impl(std::span<const Complex> coeffs, Table table, bool dphi,
                               Exec exec) const;
  void forward_rows(std::span<const Complex> in, std::span<Complex> out, Exec exec) const;
  void backward_rows(std::span<const Complex> in, std::span<Complex> out, Exec exec) const;
  const double* table_row(Table t, int m, int i) const;

  int n_theta_;
  int n_phi_;
  int degree_;
  int order_;
  std::size_t coeff_count_;
  std::vector<double> weights_;
  std::vector<std::size_t> m_offset_;         // by m + order_
  std::vector<std::vector<double>> p_;        // by |m|: [i * (L - m + 1) + (l - m)]
  std::vector<std::vector<double>> dp_;
  std::vector<double> phi_;

  struct FftPlans;
  std::unique_ptr<FftPlans> plans_;
};

}  // namespace glab::projgeom
