#include "core/steady_state.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace qcrit {

Eigen::Matrix4cd sylvester_operator(const Mat2& xm, const Mat2& xp) {
  Eigen::Matrix4cd op = Eigen::Matrix4cd::Zero();
  const Mat2 a = xm.transpose();
  // vec(Aγ) = (I ⊗ A) vec γ, vec(γB) = (Bᵀ ⊗ I) vec γ
  for (int col = 0; col < 2; ++col) op.block<2, 2>(2 * col, 2 * col) += a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) op.block<2, 2>(2 * i, 2 * j) += xp(j, i) * Mat2::Identity();
  return op;
}

namespace {

Eigen::Vector4cd vec(const Mat2& m) { return Eigen::Map<const Eigen::Vector4cd>(m.data()); }

Mat2 unvec(const Eigen::Vector4cd& v) { return Eigen::Map<const Mat2>(v.data()); }

// y − (xmᵀ g + g xp) accumulated in long double.
Mat2 extended_residual(const Mat2& xm, const Mat2& xp, const Mat2& g, const Mat2& y) {
  using lc = std::complex<long double>;
  Mat2 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      lc acc = lc(y(i, j));
      for (int k = 0; k < 2; ++k) acc -= lc(xm(k, i)) * lc(g(k, j)) + lc(g(i, k)) * lc(xp(k, j));
      out(i, j) = cplx(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
    }
  return out;
}

}  // namespace

SylvesterSolution solve_sylvester_at(const Mat2& xm, const Mat2& xp, const Mat2& y,
                                     double condition_limit) {
  const Eigen::Matrix4cd op = sylvester_operator(xm, xp);
  Eigen::JacobiSVD<Eigen::Matrix4cd> svd(op, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cond = sv(3) > 0.0 ? sv(0) / sv(3) : std::numeric_limits<double>::infinity();
  if (!(cond <= condition_limit)) {
    std::ostringstream msg;
    msg << "Sylvester system singular (condition " << cond << ")";
    throw Error(ErrorCode::Singular, msg.str());
  }
  SylvesterSolution sol;
  sol.value = unvec(svd.solve(vec(y)));
  // one refinement step, residual in extended precision
  sol.value += unvec(svd.solve(vec(extended_residual(xm, xp, sol.value, y))));
  sol.condition = cond;
  const Mat2 r = xm.transpose() * sol.value + sol.value * xp - y;
  const double scale = std::max({y.norm(), sv(0) * sol.value.norm(), 1e-300});
  sol.residual = r.norm() / scale;
  return sol;
}

Mat2 min_norm_sylvester(const Mat2& xm, const Mat2& xp, const Mat2& y) {
  const Eigen::Matrix4cd op = sylvester_operator(xm, xp);
  Eigen::CompleteOrthogonalDecomposition<Eigen::Matrix4cd> cod(op);
  cod.setThreshold(1e-12);
  return unvec(cod.solve(vec(y)));
}

std::vector<double> momentum_grid(int n) {
  std::vector<double> phi(static_cast<size_t>(n));
  for (int k = 0; k < n; ++k) phi[static_cast<size_t>(k)] = 2.0 * kPi * (k - n / 2) / n;
  return phi;
}

size_t CovarianceSymbol::flagged_count() const {
  size_t c = 0;
  for (char f : flagged) c += f ? 1 : 0;
  return c;
}

StabilityScan stability_scan(const DriftForcing& system, int n) {
  StabilityScan scan;
  scan.min_re_beta = std::numeric_limits<double>::infinity();
  for (double phi : momentum_grid(n)) {
    const auto beta = drift_eigenvalues(system.drift, phi);
    const double re = beta[0].real();  // ordered, smallest real part first
    if (re < scan.min_re_beta) {
      scan.min_re_beta = re;
      scan.argmin_phi = phi;
    }
    const double tol = 1e-12 * (1.0 + std::abs(beta[0]));
    if (re < -tol) scan.unstable_momenta.push_back(phi);
  }
  return scan;
}

CovarianceSymbol covariance_symbol(const DriftForcing& system, int n, int jobs) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "momentum grid size must be positive");
  if (system.statistics == Statistics::Boson) {
    const auto scan = stability_scan(system, n);
    if (!scan.unstable_momenta.empty()) {
      std::ostringstream msg;
      msg << "Unstable: " << scan.unstable_momenta.size() << " of " << n
          << " momenta have Re beta < 0 (min Re beta = " << scan.min_re_beta << " at phi = "
          << scan.argmin_phi << "); offending phi:";
      const size_t shown = std::min<size_t>(scan.unstable_momenta.size(), 8);
      for (size_t i = 0; i < shown; ++i) msg << ' ' << scan.unstable_momenta[i];
      if (shown < scan.unstable_momenta.size()) msg << " ...";
      throw Error(ErrorCode::Unstable, msg.str());
    }
  }

  CovarianceSymbol out;
  out.statistics = system.statistics;
  out.system = system;
  out.phi = momentum_grid(n);
  out.values.assign(out.phi.size(), Mat2::Zero());
  out.flagged.assign(out.phi.size(), 0);
  std::vector<double> residuals(out.phi.size(), 0.0);

  parallel_for(out.phi.size(), jobs, [&](size_t k) {
    const double phi = out.phi[k];
    try {
      auto sol = solve_sylvester_at(system.drift(-phi), system.drift(phi), system.forcing(phi));
      out.values[k] = sol.value;
      residuals[k] = sol.residual;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
      out.flagged[k] = 1;
    }
  });
  for (double r : residuals) out.max_residual = std::max(out.max_residual, r);
  return out;
}

CovarianceSymbol covariance_symbol(const NumericModel& model, int n, int jobs) {
  return covariance_symbol(drift_and_forcing(model), n, jobs);
}

CovarianceField correlations(const CovarianceSymbol& symbol, int r_max) {
  const int n = static_cast<int>(symbol.size());
  if (r_max < 0) throw Error(ErrorCode::InvalidArgument, "r_max must be non-negative");
  if (n < 2 * r_max + 1)
    throw Error(ErrorCode::InvalidArgument,
                "grid size " + std::to_string(n) + " cannot resolve offsets up to " +
                    std::to_string(r_max));
  const double cell = 2.0 * kPi / n;
  auto regular_at = [&](double phi, Mat2& out) {
    try {
      out = solve_sylvester_at(symbol.system.drift(-phi), symbol.system.drift(phi),
                               symbol.system.forcing(phi))
                .value;
      return true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Singular) throw;
      return false;
    }
  };
  // Flagged momenta: symmetric pairs φ ± δ, φ ± 2δ with Richardson extrapolation in δ²,
  // smallest δ = cell·2^{-j} that keeps all four samples regular.
  std::vector<Mat2> values = symbol.values;
  size_t refined = 0;
  for (size_t k = 0; k < symbol.size(); ++k) {
    if (!symbol.flagged[k]) continue;
    bool ok = false;
    for (int j = 12; j >= 0 && !ok; --j) {
      const double d = std::ldexp(cell, -j);
      Mat2 a, b, c, e;
      const double phi = symbol.phi[k];
      if (regular_at(phi - d, a) && regular_at(phi + d, b) && regular_at(phi - 2 * d, c) &&
          regular_at(phi + 2 * d, e)) {
        values[k] = (4.0 * 0.5 * (a + b) - 0.5 * (c + e)) / 3.0;
        ok = true;
      }
    }
    if (!ok) {
      std::ostringstream msg;
      msg << "Singular: no regular momentum near phi = " << symbol.phi[k];
      throw Error(ErrorCode::Singular, msg.str());
    }
    ++refined;
  }

  CovarianceField field;
  field.statistics = symbol.statistics;
  field.grid_size = n;
  field.r_max = r_max;
  field.refined_cells = refined;
  field.aliasing_guard = n >= 8 * r_max;
  field.blocks.assign(static_cast<size_t>(2 * r_max + 1), Mat2r::Zero());
  for (int r = -r_max; r <= r_max; ++r) {
    Mat2 acc = Mat2::Zero();
    for (size_t k = 0; k < values.size(); ++k) acc += values[k] * std::exp(kI * (symbol.phi[k] * r));
    acc /= double(n);
    field.blocks[static_cast<size_t>(r + r_max)] = acc.real();
    field.max_imag = std::max(field.max_imag, acc.imag().cwiseAbs().maxCoeff());
  }
  return field;
}

CovarianceSymbol zero_symbol(const DriftForcing& system, int n) {
  CovarianceSymbol s;
  s.statistics = system.statistics;
  s.system = system;
  s.phi = momentum_grid(n);
  s.values.assign(s.phi.size(), Mat2::Zero());
  s.flagged.assign(s.phi.size(), 0);
  return s;
}

CovarianceSymbol evolve_symbol(const CovarianceSymbol& initial, double time, int steps, int jobs) {
  if (steps < 1) throw Error(ErrorCode::InvalidArgument, "steps must be >= 1");
  if (!(time >= 0.0)) throw Error(ErrorCode::InvalidArgument, "time must be >= 0");
  const DriftForcing& system = initial.system;
  if (system.statistics == Statistics::Boson) {
    const auto scan = stability_scan(system, static_cast<int>(initial.size()));
    if (!scan.unstable_momenta.empty())
      throw Error(ErrorCode::Unstable, "Unstable: " + std::to_string(scan.unstable_momenta.size()) +
                                           " grid momenta have Re beta < 0; evolution diverges");
  }
  CovarianceSymbol out = initial;
  out.max_residual = 0.0;
  std::fill(out.flagged.begin(), out.flagged.end(), 0);
  const double dt = time / steps;
  parallel_for(out.size(), jobs, [&](size_t k) {
    const double phi = out.phi[k];
    const Mat2 a = system.drift(-phi).transpose();
    const Mat2 b = system.drift(phi);
    const Mat2 y = system.forcing(phi);
    auto rhs = [&](const Mat2& g) -> Mat2 { return -(a * g + g * b) + y; };
    Mat2 g = initial.values[k];
    for (int s = 0; s < steps; ++s) {
      const Mat2 k1 = rhs(g);
      const Mat2 k2 = rhs(g + 0.5 * dt * k1);
      const Mat2 k3 = rhs(g + 0.5 * dt * k2);
      const Mat2 k4 = rhs(g + dt * k3);
      g += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.values[k] = g;
  });
  return out;
}

double covariance_decay_rate(const DriftForcing& system, double phi) {
  const auto bm = drift_eigenvalues(system.drift, -phi);
  const auto bp = drift_eigenvalues(system.drift, phi);
  double rate = std::numeric_limits<double>::infinity();
  for (const auto& a : bm)
    for (const auto& b : bp) rate = std::min(rate, (a + b).real());
  return rate;
}

}  // namespace qcrit
