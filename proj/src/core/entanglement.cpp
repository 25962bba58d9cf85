#include "core/entanglement.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "core/error.hpp"
#include "core/parallel.hpp"

namespace qcrit {

void BlockPartition::check() const {
  if (total_sites < 2 || begin < 0 || end > total_sites || begin >= end || size() >= total_sites)
    throw Error(ErrorCode::InvalidArgument,
                "block partition must be a nonempty proper sub-range of the sites");
}

BlockPartition centered_block(int total_sites, int size) {
  BlockPartition p{total_sites, (total_sites - size) / 2, (total_sites - size) / 2 + size};
  p.check();
  return p;
}

MatX assemble_restriction(const CovarianceField& field, int n, double tail_tol) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "restriction size must be positive");
  if (n - 1 > field.r_max) {
    const double ref = std::max(field.at(0).norm(), 1e-300);
    const double tail = std::max(field.at(field.r_max).norm(), field.at(-field.r_max).norm());
    if (tail > tail_tol * ref)
      throw Error(ErrorCode::TailTooFat,
                  "TailTooFat: |gamma(r_max)| = " + std::to_string(tail) +
                      " relative to |gamma(0)| exceeds the truncation tolerance");
  }
  MatX m = MatX::Zero(2 * n, 2 * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      const int r = a - b;
      if (std::abs(r) > field.r_max) continue;
      const Mat2r& blk = field.at(r);
      for (int nu = 0; nu < 2; ++nu)
        for (int mu = 0; mu < 2; ++mu) m(nu * n + a, mu * n + b) = blk(nu, mu);
    }
  return m;
}

PositivityCheck check_positivity(const MatX& gamma, Statistics statistics, double tol) {
  PositivityCheck c;
  const auto n = gamma.rows() / 2;
  if (statistics == Statistics::Boson) {
    c.symmetry_error = (gamma - gamma.transpose()).norm();
    const MatXc h = gamma.cast<cplx>() + kI * symplectic_unit(static_cast<int>(n)).cast<cplx>();
    Eigen::SelfAdjointEigenSolver<MatXc> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
    c.margin = es.eigenvalues().minCoeff();
    c.ok = c.margin >= -tol;
  } else {
    c.symmetry_error = (gamma + gamma.transpose()).norm();
    Eigen::JacobiSVD<MatX> svd(gamma);
    c.margin = 1.0 - (svd.singularValues().size() ? svd.singularValues()(0) : 0.0);
    c.ok = c.margin >= -tol;
  }
  return c;
}

namespace {

struct SymplecticForm {
  std::vector<double> values;
  MatXc m;  // γ^{1/2} iσ γ^{1/2}
  Eigen::SelfAdjointEigenSolver<MatXc> eig;
};

SymplecticForm symplectic_form(const MatX& gamma) {
  if (gamma.rows() != gamma.cols() || gamma.rows() % 2 != 0)
    throw Error(ErrorCode::InvalidArgument, "covariance must be square of even size");
  const int n = static_cast<int>(gamma.rows() / 2);
  const MatX sym = 0.5 * (gamma + gamma.transpose());
  Eigen::SelfAdjointEigenSolver<MatX> es(sym);
  const double lo = es.eigenvalues().minCoeff();
  if (!(lo > 0.0))
    throw Error(ErrorCode::NotPositive,
                "NotPositive: covariance has eigenvalue " + std::to_string(lo));
  const MatX root = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
                    es.eigenvectors().transpose();
  SymplecticForm f;
  const MatXc rc = root.cast<cplx>();
  f.m = rc * (kI * symplectic_unit(n).cast<cplx>()) * rc;
  f.m = 0.5 * (f.m + f.m.adjoint());
  f.eig.compute(f.m);
  const auto& ev = f.eig.eigenvalues();  // ascending, ±λ pairs
  for (int i = n; i < 2 * n; ++i) f.values.push_back(ev(i));
  return f;
}

}  // namespace

std::vector<double> symplectic_spectrum(const MatX& gamma) { return symplectic_form(gamma).values; }

DarkStateCheck is_dark_state(const MatX& gamma, Statistics statistics, double tol) {
  DarkStateCheck d;
  if (statistics == Statistics::Boson) {
    for (double v : symplectic_spectrum(gamma)) d.deviation = std::max(d.deviation, std::abs(v - 1.0));
  } else {
    Eigen::JacobiSVD<MatX> svd(gamma);
    const auto& s = svd.singularValues();
    for (Eigen::Index i = 0; i < s.size(); ++i) d.deviation = std::max(d.deviation, std::abs(s(i) - 1.0));
  }
  d.pure = d.deviation <= tol;
  return d;
}

DarkStateCheck is_dark_state(const CovarianceField& field, int n, double tol) {
  return is_dark_state(assemble_restriction(field, n), field.statistics, tol);
}

MatX partial_transpose(const MatX& gamma, const BlockPartition& part) {
  part.check();
  const int n = part.total_sites;
  if (gamma.rows() != 2 * n) throw Error(ErrorCode::InvalidArgument, "partition size mismatch");
  Eigen::VectorXd p = Eigen::VectorXd::Ones(2 * n);
  for (int a = part.begin; a < part.end; ++a) p(n + a) = -1.0;
  return p.asDiagonal() * gamma * p.asDiagonal();
}

Negativity log_negativity(const MatX& gamma, const BlockPartition& part) {
  const MatX pt = partial_transpose(gamma, part);
  const SymplecticForm f = symplectic_form(pt);
  Negativity out;
  out.spectrum = f.values;
  for (double l : f.values) {
    out.log_negativity += std::log2(std::max(1.0, 1.0 / l));
    out.spectral_sum += std::abs(1.0 / l - 1.0);
  }
  // K^{−1/2} = |M|^{−1} for the Hermitian M = γ^{1/2} iσ γ^{1/2}
  const auto& ev = f.eig.eigenvalues();
  const MatXc& v = f.eig.eigenvectors();
  const MatXc kinv = v * ev.cwiseAbs().cwiseInverse().cast<cplx>().asDiagonal() * v.adjoint();
  out.l1_bound = (kinv - MatXc::Identity(kinv.rows(), kinv.cols())).cwiseAbs().sum();
  out.chain_holds = out.log_negativity <= out.spectral_sum + 1e-9 &&
                    out.spectral_sum <= out.l1_bound + 1e-9;
  return out;
}

namespace {

double plateau(const std::vector<AreaLawRow>& rows, int from, double Negativity::*field) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  bool any = false;
  for (const auto& r : rows) {
    if (r.block_size < from) continue;
    any = true;
    lo = std::min(lo, r.value.*field);
    hi = std::max(hi, r.value.*field);
  }
  if (!any || hi == 0.0) return 1.0;
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

double AreaLawScan::l1_plateau_ratio(int from) const { return plateau(rows, from, &Negativity::l1_bound); }

double AreaLawScan::negativity_plateau_ratio(int from) const {
  return plateau(rows, from, &Negativity::log_negativity);
}

bool AreaLawScan::chain_holds() const {
  return std::all_of(rows.begin(), rows.end(), [](const AreaLawRow& r) { return r.value.chain_holds; });
}

AreaLawScan area_law_scan(const CovarianceField& field, int n, const std::vector<int>& sizes, int jobs) {
  if (field.statistics != Statistics::Boson)
    throw Error(ErrorCode::StatisticsMismatch, "area-law scan is defined for bosonic fields");
  const MatX gamma = assemble_restriction(field, n);
  AreaLawScan scan;
  scan.total_sites = n;
  scan.rows.resize(sizes.size());
  parallel_for(sizes.size(), jobs, [&](size_t i) {
    scan.rows[i] = {sizes[i], log_negativity(gamma, centered_block(n, sizes[i]))};
  });
  return scan;
}

AreaLawScan area_law_scan(const NumericModel& model, int n, const std::vector<int>& sizes, int jobs) {
  if (model.statistics != Statistics::Boson)
    throw Error(ErrorCode::StatisticsMismatch, "area-law scan is defined for bosonic models");
  const int r_max = std::max(1, n - 1);
  int grid = 1024;
  while (grid < 8 * r_max) grid <<= 1;
  const auto field = correlations(covariance_symbol(model, grid, jobs), r_max);
  return area_law_scan(field, n, sizes, jobs);
}

}  // namespace qcrit
