#include "core/symbol.hpp"

namespace qcrit {

TrigPolynomial::TrigPolynomial(std::map<int, Mat2> coeffs) : coeffs_(std::move(coeffs)) {}

Mat2 TrigPolynomial::operator()(cplx phi) const {
  Mat2 out = Mat2::Zero();
  for (const auto& [j, c] : coeffs_) out += c * std::exp(-kI * phi * static_cast<double>(j));
  return out;
}

bool TrigPolynomial::is_zero(double tol) const {
  for (const auto& [_, c] : coeffs_)
    if (c.cwiseAbs().maxCoeff() > tol) return false;
  return true;
}

TrigPolynomial TrigPolynomial::reflected_transpose() const {
  std::map<int, Mat2> out;
  for (const auto& [j, c] : coeffs_) out[-j] = c.transpose();
  return TrigPolynomial(std::move(out));
}

TrigPolynomial& TrigPolynomial::operator+=(const TrigPolynomial& other) {
  for (const auto& [j, c] : other.coeffs_) {
    auto [it, inserted] = coeffs_.try_emplace(j, c);
    if (!inserted) it->second += c;
  }
  return *this;
}

TrigPolynomial operator*(cplx s, TrigPolynomial p) {
  for (auto& [_, c] : p.coeffs_) c *= s;
  return p;
}

TrigPolynomial operator*(const Mat2& a, TrigPolynomial p) {
  for (auto& [_, c] : p.coeffs_) c = a * c;
  return p;
}

TrigPolynomial operator*(TrigPolynomial p, const Mat2& a) {
  for (auto& [_, c] : p.coeffs_) c = c * a;
  return p;
}

TrigPolynomial hamiltonian_symbol(const NumericModel& model) {
  return TrigPolynomial(model.hamiltonian);
}

Vec2 lindblad_symbol(const std::map<int, Vec2>& channel, cplx phi) {
  Vec2 out = Vec2::Zero();
  for (const auto& [j, l] : channel) out += l * std::exp(-kI * phi * static_cast<double>(j));
  return out;
}

TrigPolynomial bath_symbol(const NumericModel& model) {
  std::map<int, Mat2> m;
  for (const auto& channel : model.lindblads) {
    for (const auto& [a, la] : channel) {
      for (const auto& [b, lb] : channel) {
        Mat2 outer = la * lb.adjoint();
        auto [it, inserted] = m.try_emplace(a - b, outer);
        if (!inserted) it->second += outer;
      }
    }
  }
  return TrigPolynomial(std::move(m));
}

BathSplit split_bath(const TrigPolynomial& m) {
  const TrigPolynomial mt = m.reflected_transpose();
  return {cplx(0.5) * (m + mt), cplx(0.0, -0.5) * (m + cplx(-1.0) * mt)};
}

DriftForcing drift_and_forcing(const NumericModel& model) {
  const TrigPolynomial h = hamiltonian_symbol(model);
  const BathSplit bath = split_bath(bath_symbol(model));
  DriftForcing out;
  out.statistics = model.statistics;
  if (model.statistics == Statistics::Boson) {
    const Mat2 s2 = sigma2();
    out.drift = (cplx(-4.0) * h + cplx(-2.0) * bath.imag) * s2;
    out.forcing = cplx(4.0) * (Mat2(s2.transpose()) * bath.real * s2);
  } else {
    out.drift = cplx(0.0, -4.0) * h + cplx(2.0) * bath.real;
    out.forcing = cplx(4.0) * bath.imag;
  }
  return out;
}

std::array<cplx, 2> eigenvalues2(const Mat2& m) {
  const cplx half_trace = 0.5 * (m(0, 0) + m(1, 1));
  const cplx half_diff = 0.5 * (m(0, 0) - m(1, 1));
  const cplx disc = std::sqrt(half_diff * half_diff + m(0, 1) * m(1, 0));
  cplx a = half_trace + disc;
  cplx b = half_trace - disc;
  auto less = [](cplx x, cplx y) {
    return x.real() < y.real() || (x.real() == y.real() && x.imag() < y.imag());
  };
  if (less(b, a)) std::swap(a, b);
  return {a, b};
}

std::array<cplx, 2> drift_eigenvalues(const TrigPolynomial& drift, cplx phi) {
  return eigenvalues2(drift(phi));
}

}  // namespace qcrit
