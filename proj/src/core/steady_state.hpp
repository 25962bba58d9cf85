#pragma once

#include <vector>

#include "core/symbol.hpp"

namespace qcrit {

inline constexpr double kSylvesterConditionLimit = 1e12;

/// Column-major Kronecker form of γ ↦ xmᵀγ + γxp.
Eigen::Matrix4cd sylvester_operator(const Mat2& xm, const Mat2& xp);

struct SylvesterSolution {
  Mat2 value;
  double condition = 0.0;
  double residual = 0.0;  ///< relative to max(‖ỹ‖, ‖op‖·‖γ̃‖)
};

/// Solves x̃ᵀ(−φ)γ̃ + γ̃x̃(φ) = ỹ given xm = x̃(−φ), xp = x̃(φ).
/// Throws Error(Singular) when the 4×4 condition number exceeds `condition_limit`.
SylvesterSolution solve_sylvester_at(const Mat2& xm, const Mat2& xp, const Mat2& y,
                                     double condition_limit = kSylvesterConditionLimit);

/// Minimum-norm least-squares solution; defined at pole momenta.
Mat2 min_norm_sylvester(const Mat2& xm, const Mat2& xp, const Mat2& y);

/// Ring momenta φ_k = 2π(k − ⌊N/2⌋)/N; for even N this starts at −π.
std::vector<double> momentum_grid(int n);

struct StabilityScan {
  double min_re_beta = 0.0;
  double argmin_phi = 0.0;
  std::vector<double> unstable_momenta;  ///< grid momenta with Re β < 0
};
StabilityScan stability_scan(const DriftForcing& system, int n);

struct CovarianceSymbol {
  Statistics statistics = Statistics::Fermion;
  DriftForcing system;
  std::vector<double> phi;
  std::vector<Mat2> values;    ///< zero where flagged
  std::vector<char> flagged;   ///< Singular at this momentum
  double max_residual = 0.0;

  size_t size() const { return phi.size(); }
  size_t flagged_count() const;
};

/// Samples γ̃ on the N-point grid. Bosonic models with any Re β < 0 on the
/// grid throw Error(Unstable) listing the offending momenta.
CovarianceSymbol covariance_symbol(const DriftForcing& system, int n, int jobs = 0);
CovarianceSymbol covariance_symbol(const NumericModel& model, int n, int jobs = 0);

struct CovarianceField {
  Statistics statistics = Statistics::Fermion;
  int grid_size = 0;
  int r_max = 0;
  std::vector<Mat2r> blocks;  ///< index r + r_max
  double max_imag = 0.0;      ///< largest discarded imaginary part
  size_t refined_cells = 0;   ///< flagged momenta re-sampled locally
  bool aliasing_guard = true; ///< grid_size >= 8 r_max

  const Mat2r& at(int r) const { return blocks.at(static_cast<size_t>(r + r_max)); }
};

/// γ(r) = (1/N) Σ_k γ̃(φ_k) e^{iφ_k r} for |r| ≤ r_max. A flagged momentum is
/// re-sampled at φ ± δ, φ ± 2δ inside its cell and extrapolated to δ → 0; if no
/// such δ is regular, Error(Singular). Requires N ≥ 2 r_max + 1.
CovarianceField correlations(const CovarianceSymbol& symbol, int r_max);

/// Integrates dγ̃/dt = −x̃ᵀ(−φ)γ̃ − γ̃x̃(φ) + ỹ per momentum with classical RK4
/// (step T/steps). The initial symbol's grid is reused.
CovarianceSymbol evolve_symbol(const CovarianceSymbol& initial, double time, int steps, int jobs = 0);

/// γ̃ ≡ 0 on the grid, carrying `system`; starting point for relaxation runs.
CovarianceSymbol zero_symbol(const DriftForcing& system, int n);

/// Slowest relaxation rate of the covariance at φ: min Re(β_a(−φ) + β_b(φ)).
double covariance_decay_rate(const DriftForcing& system, double phi);

}  // namespace qcrit
