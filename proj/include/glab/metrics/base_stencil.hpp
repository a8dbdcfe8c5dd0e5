#pragma once

#include <array>
#include <cstddef>
#include <type_traits>
#include <vector>

#include "glab/core/types.hpp"

namespace glab::metrics {

/// Nine base points s_pq = (p + i q) h, p, q in {-1, 0, 1}, around s = 0.
///
/// Derivatives at the center are second-order finite differences:
///   d_s      = (d_x - i d_y) / 2   (central differences)
///   d_s d_sb = Laplacian / 4       (compact 9-point Laplacian)
struct BaseStencil {
  static constexpr int kPoints = 9;
  static constexpr int kCenter = 4;

  double h = 1e-2;

  static constexpr int index(int p, int q) { return (p + 1) * 3 + (q + 1); }
  Complex point(int idx) const { return Complex(idx / 3 - 1, idx % 3 - 1) * h; }

  std::array<Complex, kPoints> ds_weights() const {
    std::array<Complex, kPoints> c{};
    const double f = 1.0 / (4.0 * h);
    c[index(1, 0)] = f;
    c[index(-1, 0)] = -f;
    c[index(0, 1)] = Complex(0.0, -f);
    c[index(0, -1)] = Complex(0.0, f);
    return c;
  }

  std::array<Complex, kPoints> dsbar_weights() const {
    auto c = ds_weights();
    for (auto& v : c) v = std::conj(v);
    return c;
  }

  std::array<double, kPoints> ddbar_weights() const {
    std::array<double, kPoints> c{};
    const double f = 1.0 / (24.0 * h * h);
    for (int p = -1; p <= 1; ++p)
      for (int q = -1; q <= 1; ++q) c[index(p, q)] = (p == 0 || q == 0) ? 4.0 * f : f;
    c[kCenter] = -20.0 * f;
    return c;
  }

  /// sum_i c_i v_i for any vector-space value type (double, Complex, CMatrix).
  template <class C, class T>
  static auto apply(const std::array<C, kPoints>& c, const std::vector<T>& v) {
    if constexpr (std::is_same_v<T, CMatrix>) {
      CMatrix acc = CMatrix::Zero(v[0].rows(), v[0].cols());
      for (int i = 0; i < kPoints; ++i) acc += Complex(c[i]) * v[i];
      return acc;
    } else {
      decltype(C{} * T{}) acc{};
      for (int i = 0; i < kPoints; ++i) acc += c[i] * v[i];
      return acc;
    }
  }

  template <class T>
  auto ds(const std::vector<T>& v) const { return apply(ds_weights(), v); }
  template <class T>
  auto dsbar(const std::vector<T>& v) const { return apply(dsbar_weights(), v); }
  template <class T>
  auto ddbar(const std::vector<T>& v) const { return apply(ddbar_weights(), v); }

  /// Node-wise stencil combination of nine fiber fields.
  template <class C, class F>
  static auto apply_fields(const std::array<C, kPoints>& c, const std::vector<F>& fields) {
    using Out = std::vector<decltype(C{} * typename F::value_type{})>;
    Out out(fields.at(0).size());
    for (std::size_t k = 0; k < out.size(); ++k) {
      auto acc = c[0] * fields[0][k];
      for (int i = 1; i < kPoints; ++i) acc += c[i] * fields[i][k];
      out[k] = acc;
    }
    return out;
  }
};

}  // namespace glab::metrics
