#include "glab/projgeom/spherical_transform.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include <fftw3.h>

namespace glab::projgeom {

namespace {
// FFTW planning is not thread-safe; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(Complex* p) { return reinterpret_cast<fftw_complex*>(p); }
fftw_complex* as_fftw(const Complex* p) {
  return reinterpret_cast<fftw_complex*>(const_cast<Complex*>(p));
}
}  // namespace

struct SphericalTransform::FftPlans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ~FftPlans() {
    std::lock_guard lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

SphericalTransform::SphericalTransform(const GaussLegendreRule& rule, int n_phi)
    : n_theta_(static_cast<int>(rule.nodes.size())),
      n_phi_(n_phi),
      degree_(n_theta_ - 1),
      order_(std::min(n_theta_ - 1, n_phi / 2 - 1)),
      weights_(rule.weights) {
  if (n_theta_ < 2 || n_phi_ < 4) throw Error("SphericalTransform: grid too small");

  m_offset_.resize(2 * order_ + 1);
  std::size_t off = 0;
  for (int m = -order_; m <= order_; ++m) {
    m_offset_[m + order_] = off;
    off += static_cast<std::size_t>(degree_ - std::abs(m) + 1);
  }
  coeff_count_ = off;

  phi_.resize(n_phi_);
  for (int j = 0; j < n_phi_; ++j) phi_[j] = 2.0 * kPi * j / n_phi_;

  const int L = degree_;
  p_.resize(order_ + 1);
  dp_.resize(order_ + 1);
  for (int m = 0; m <= order_; ++m) {
    p_[m].assign(static_cast<std::size_t>(n_theta_) * (L - m + 1), 0.0);
    dp_[m].assign(p_[m].size(), 0.0);
  }
  // Recurrences run in extended precision; rounding once keeps the discrete
  // orthogonality close to machine precision at high degree.
  using Real = long double;
  std::vector<Real> row(L + 1), drow(L + 1);
  for (int i = 0; i < n_theta_; ++i) {
    const Real x = rule.nodes[i];
    const Real s = std::sqrt((1.0L - x) * (1.0L + x));
    Real pmm = 1.0L / std::sqrt(2.0L);
    for (int m = 0; m <= order_; ++m) {
      if (m > 0) pmm *= std::sqrt((2.0L * m + 1.0L) / (2.0L * m)) * s;
      const int width = L - m + 1;
      row[0] = pmm;
      if (width > 1) row[1] = std::sqrt(2.0L * m + 3.0L) * x * pmm;
      for (int l = m + 2; l <= L; ++l) {
        const Real ll = l, mm = m;
        const Real a = std::sqrt((4.0L * ll * ll - 1.0L) / (ll * ll - mm * mm));
        const Real b = std::sqrt(((ll - 1.0L) * (ll - 1.0L) - mm * mm) /
                                 (4.0L * (ll - 1.0L) * (ll - 1.0L) - 1.0L));
        row[l - m] = a * (x * row[l - m - 1] - b * row[l - m - 2]);
      }
      // (1 - x^2) dP/dx = -l x P_l + c_lm P_{l-1};  dP/dtheta = -sin(theta) dP/dx
      for (int l = m; l <= L; ++l) {
        const Real ll = l, mm = m;
        const Real c = std::sqrt((2.0L * ll + 1.0L) * (ll * ll - mm * mm) / (2.0L * ll - 1.0L));
        const Real prev = (l > m) ? row[l - m - 1] : 0.0L;
        drow[l - m] = (ll * x * row[l - m] - c * prev) / s;
      }
      double* out = p_[m].data() + static_cast<std::size_t>(i) * width;
      double* dout = dp_[m].data() + static_cast<std::size_t>(i) * width;
      for (int t = 0; t < width; ++t) {
        out[t] = static_cast<double>(row[t]);
        dout[t] = static_cast<double>(drow[t]);
      }
    }
  }

  plans_ = std::make_unique<FftPlans>();
  std::vector<Complex> a(n_phi_), b(n_phi_);
  std::lock_guard lock(fftw_planner_mutex());
  plans_->forward = fftw_plan_dft_1d(n_phi_, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->backward = fftw_plan_dft_1d(n_phi_, as_fftw(a.data()), as_fftw(b.data()),
                                      FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!plans_->forward || !plans_->backward) throw Error("SphericalTransform: FFTW planning failed");
}

SphericalTransform::~SphericalTransform() = default;

std::size_t SphericalTransform::index(int l, int m) const {
  return m_offset_[m + order_] + static_cast<std::size_t>(l - std::abs(m));
}

double SphericalTransform::legendre(int l, int m, int i) const {
  return p_[m][static_cast<std::size_t>(i) * (degree_ - m + 1) + (l - m)];
}

double SphericalTransform::legendre_dtheta(int l, int m, int i) const {
  return dp_[m][static_cast<std::size_t>(i) * (degree_ - m + 1) + (l - m)];
}

const double* SphericalTransform::table_row(Table t, int m, int i) const {
  const int am = std::abs(m);
  const auto& tab = (t == Table::value) ? p_[am] : dp_[am];
  return tab.data() + static_cast<std::size_t>(i) * (degree_ - am + 1);
}

void SphericalTransform::forward_rows(std::span<const Complex> in, std::span<Complex> out,
                                      Exec exec) const {
  if (exec == Exec::reference) {
    for (int i = 0; i < n_theta_; ++i)
      for (int k = 0; k < n_phi_; ++k) {
        Complex acc = 0.0;
        for (int j = 0; j < n_phi_; ++j)
          acc += in[i * n_phi_ + j] * std::polar(1.0, -phi_[j] * k);
        out[i * n_phi_ + k] = acc;
      }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_theta_; ++i)
    fftw_execute_dft(plans_->forward, as_fftw(in.data() + i * n_phi_),
                     as_fftw(out.data() + i * n_phi_));
}

void SphericalTransform::backward_rows(std::span<const Complex> in, std::span<Complex> out,
                                       Exec exec) const {
  if (exec == Exec::reference) {
    for (int i = 0; i < n_theta_; ++i)
      for (int j = 0; j < n_phi_; ++j) {
        Complex acc = 0.0;
        for (int k = 0; k < n_phi_; ++k)
          acc += in[i * n_phi_ + k] * std::polar(1.0, phi_[j] * k);
        out[i * n_phi_ + j] = acc;
      }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n_theta_; ++i)
    fftw_execute_dft(plans_->backward, as_fftw(in.data() + i * n_phi_),
                     as_fftw(out.data() + i * n_phi_));
}

ComplexField SphericalTransform::analyze(std::span<const Complex> field, Exec exec) const {
  if (field.size() != node_count()) throw Error("SphericalTransform::analyze: size mismatch");
  ComplexField spec(node_count());
  forward_rows(field, spec, exec);
  const double scale = std::sqrt(2.0 * kPi) / n_phi_;
  ComplexField coeffs(coeff_count_, Complex{});

  auto one_order = [&](int m) {
    const int k = (m >= 0) ? m : m + n_phi_;
    Complex* out = coeffs.data() + m_offset_[m + order_];
    const int width = degree_ - std::abs(m) + 1;
    for (int i = 0; i < n_theta_; ++i) {
      const Complex fm = spec[static_cast<std::size_t>(i) * n_phi_ + k] * (weights_[i] * scale);
      const double* row = table_row(Table::value, m, i);
      for (int t = 0; t < width; ++t) out[t] += fm * row[t];
    }
  };

  if (exec == Exec::reference) {
    for (int m = -order_; m <= order_; ++m) one_order(m);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int m = -order_; m <= order_; ++m) one_order(m);
  }
  return coeffs;
}

ComplexField SphericalTransform::synthesize_impl(std::span<const Complex> coeffs, Table table,
                                                 bool dphi, Exec exec) const {
  if (coeffs.size() != coeff_count_) throw Error("SphericalTransform::synthesize: size mismatch");
  ComplexField spec(node_count(), Complex{});
  const double scale = 1.0 / std::sqrt(2.0 * kPi);

  auto one_order = [&](int m) {
    const int k = (m >= 0) ? m : m + n_phi_;
    const Complex* a = coeffs.data() + m_offset_[m + order_];
    const int width = degree_ - std::abs(m) + 1;
    const Complex factor = dphi ? Complex(0.0, m) * scale : Complex(scale);
    for (int i = 0; i < n_theta_; ++i) {
      const double* row = table_row(table, m, i);
      Complex acc = 0.0;
      for (int t = 0; t < width; ++t) acc += a[t] * row[t];
      spec[static_cast<std::size_t>(i) * n_phi_ + k] = acc * factor;
    }
  };

  if (exec == Exec::reference) {
    for (int m = -order_; m <= order_; ++m) one_order(m);
  } else {
#pragma omp parallel for schedule(dynamic)
    for (int m = -order_; m <= order_; ++m) one_order(m);
  }
  ComplexField out(node_count());
  backward_rows(spec, out, exec);
  return out;
}

ComplexField SphericalTransform::synthesize(std::span<const Complex> coeffs, Exec exec) const {
  return synthesize_impl(coeffs, Table::value, false, exec);
}

ComplexField SphericalTransform::synthesize_dtheta(std::span<const Complex> coeffs,
                                                   Exec exec) const {
  return synthesize_impl(coeffs, Table::dtheta, false, exec);
}

ComplexField SphericalTransform::synthesize_dphi(std::span<const Complex> coeffs,
                                                 Exec exec) const {
  return synthesize_impl(coeffs, Table::value, true, exec);
}

}  // namespace glab::projgeom
