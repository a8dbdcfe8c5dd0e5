#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace glab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

/// One real value per fiber grid node.
using RealField = std::vector<double>;
/// One complex value per fiber grid node.
using ComplexField = std::vector<Complex>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Complex kI{0.0, 1.0};

/// Execution policy for the data-parallel kernels. `reference` selects the
/// plain serial implementation that the parallel path is tested against.
enum class Exec { reference, parallel };

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// n! for the small arguments that occur in fiber normalizations.
constexpr double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace glab
