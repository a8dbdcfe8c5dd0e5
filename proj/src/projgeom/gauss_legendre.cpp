#include "glab/projgeom/gauss_legendre.hpp"

#include <cmath>

#include "glab/core/types.hpp"

namespace glab::projgeom {

GaussLegendreRule gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: need at least one node");
  using Real = long double;  // extra bits keep weights and nodes correctly rounded
  GaussLegendreRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  auto legendre_pair = [n](Real x, Real& pn, Real& pn1) {
    Real p0 = 1.0L, p1 = 0.0L;
    for (int j = 1; j <= n; ++j) {
      const Real p2 = p1;
      p1 = p0;
      p0 = ((2.0L * j - 1.0L) * x * p1 - (j - 1.0L) * p2) / j;
    }
    pn = p0;
    pn1 = p1;
  };
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    Real x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    Real pn = 0, pn1 = 0;
    for (int iter = 0; iter < 100; ++iter) {
      legendre_pair(x, pn, pn1);
      const Real dp = n * (x * pn - pn1) / (x * x - 1.0L);
      const Real dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-19L) break;
    }
    legendre_pair(x, pn, pn1);
    const Real dp = n * (x * pn - pn1) / (x * x - 1.0L);
    const Real w = 2.0L / ((1.0L - x * x) * dp * dp);
    rule.nodes[i] = static_cast<double>(x);
    rule.nodes[n - 1 - i] = -static_cast<double>(x);
    rule.weights[i] = static_cast<double>(w);
    rule.weights[n - 1 - i] = static_cast<double>(w);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace glab::projgeom
