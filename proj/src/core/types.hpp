#pragma once

#include <complex>
#include <numbers>

#include <Eigen/Dense>

namespace qcrit {

using cplx = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Vec2 = Eigen::Vector2cd;
using Mat2r = Eigen::Matrix2d;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kI{0.0, 1.0};

enum class Statistics { Boson, Fermion };

inline const char* to_string(Statistics s) {
  return s == Statistics::Boson ? "boson" : "fermion";
}

/// σ₂ = iσ_y = [[0, 1], [−1, 0]].
inline Mat2 sigma2() {
  Mat2 s;
  s << 0.0, 1.0, -1.0, 0.0;
  return s;
}

/// Symplectic unit σ = iσ_y ⊗ 𝟙_n in the ν-major (u₁ block, u₂ block) ordering.
inline MatX symplectic_unit(int n) {
  MatX s = MatX::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    s(j, n + j) = 1.0;
    s(n + j, j) = -1.0;
  }
  return s;
}

}  // namespace qcrit
