#pragma once

#include <array>
#include <map>

#include "core/model.hpp"
#include "core/types.hpp"

namespace qcrit {

/// 2×2 matrix-valued trigonometric polynomial p(φ) = Σ_j c(j) e^{−iφj}.
/// Entire in φ; evaluation at complex φ is the holomorphic extension.
class TrigPolynomial {
 public:
  TrigPolynomial() = default;
  explicit TrigPolynomial(std::map<int, Mat2> coeffs);

  Mat2 operator()(cplx phi) const;
  const std::map<int, Mat2>& coefficients() const { return coeffs_; }
  bool is_zero(double tol = 0.0) const;

  /// q with q(φ) = p(−φ)ᵀ, i.e. the symbol of the real-space transpose.
  TrigPolynomial reflected_transpose() const;

  TrigPolynomial& operator+=(const TrigPolynomial& other);
  friend TrigPolynomial operator+(TrigPolynomial a, const TrigPolynomial& b) { return a += b; }
  friend TrigPolynomial operator*(cplx s, TrigPolynomial p);
  /// Constant-matrix products: A·p(φ) and p(φ)·A.
  friend TrigPolynomial operator*(const Mat2& a, TrigPolynomial p);
  friend TrigPolynomial operator*(TrigPolynomial p, const Mat2& a);

 private:
  std::map<int, Mat2> coeffs_;
};

TrigPolynomial hamiltonian_symbol(const NumericModel& model);

/// l̃_μ(φ) = Σ_j l_μ(j) e^{−iφj}.
Vec2 lindblad_symbol(const std::map<int, Vec2>& channel, cplx phi);

/// m̃ = Σ_μ l̃_μ ⊗ conj(l̃_μ), as the coefficients m(r) = Σ_s l(r+s) l(s)^†.
TrigPolynomial bath_symbol(const NumericModel& model);

struct BathSplit {
  TrigPolynomial real;  ///< m̃_r(φ) = (m̃(φ) + m̃ᵀ(−φ))/2
  TrigPolynomial imag;  ///< m̃_i(φ) = −i(m̃(φ) − m̃ᵀ(−φ))/2
};
BathSplit split_bath(const TrigPolynomial& m);

/// Drift x̃ and forcing ỹ of the per-momentum fixed-point equation
/// x̃ᵀ(−φ) γ̃ + γ̃ x̃(φ) = ỹ.
///   bosons:   x̃ = −(4h̃ + 2m̃_i)σ₂,  ỹ = 4σ₂ᵀ m̃_r σ₂
///   fermions: x̃ = −4i h̃ + 2m̃_r,     ỹ = 4m̃_i
struct DriftForcing {
  Statistics statistics = Statistics::Fermion;
  TrigPolynomial drift;
  TrigPolynomial forcing;
};
DriftForcing drift_and_forcing(const NumericModel& model);

/// Eigenvalues of a 2×2 matrix ordered by (Re, Im) lexicographically.
std::array<cplx, 2> eigenvalues2(const Mat2& m);
std::array<cplx, 2> drift_eigenvalues(const TrigPolynomial& drift, cplx phi);

}  // namespace qcrit
