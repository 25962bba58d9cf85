#pragma once

#include <cmath>
#include <random>

#include <doctest.h>

#include "core/criticality.hpp"
#include "core/entanglement.hpp"
#include "core/error.hpp"
#include "core/model.hpp"
#include "core/oracle.hpp"
#include "core/steady_state.hpp"
#include "core/symbol.hpp"

namespace qt {

using namespace qcrit;

inline NumericModel two_site(double g, double eps = 1.0, double B = 0.5, double Gamma = 0.5) {
  return evaluate_validated(with_noise(preset_xy_fermion(B, Gamma), NoiseKind::TwoSiteFermion, eps, g));
}

inline NumericModel on_site_fermion(double g, double eps = 1.0, double B = 1.5, double Gamma = 0.5) {
  return evaluate_validated(with_noise(preset_xy_fermion(B, Gamma), NoiseKind::OnSiteFermion, eps, g));
}

inline NumericModel boson(double g, double eps = 1.0, double t = 1.0, double v = 0.0) {
  return evaluate_validated(with_noise(preset_boson_hopping(t, v), NoiseKind::OnSiteBoson, eps, g));
}

inline Mat2 pauli_x() {
  Mat2 m;
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

inline Mat2 pauli_y() {
  Mat2 m;
  m << 0.0, cplx(0, -1), cplx(0, 1), 0.0;
  return m;
}

inline double max_abs(const Mat2& m) { return m.cwiseAbs().maxCoeff(); }

/// Random symmetric positive definite 2n×2n matrix with symplectic spectrum ≥ 1.
inline MatX random_physical_boson(int n, std::mt19937& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  MatX A(2 * n, 2 * n);
  for (int i = 0; i < 2 * n; ++i)
    for (int j = 0; j < 2 * n; ++j) A(i, j) = 0.3 * N(rng);
  // S Sᵀ with S symplectic-ish plus thermal padding keeps γ + iσ ⪰ 0.
  MatX g = A * A.transpose() + MatX::Identity(2 * n, 2 * n);
  const double lmin = symplectic_spectrum(g).front();
  if (lmin < 1.0) g *= 1.0 / lmin;
  return g;
}

}  // namespace qt
