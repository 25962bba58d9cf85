#pragma once

#include <optional>
#include <string>
#include <vector>

#include "core/steady_state.hpp"

namespace qcrit {

enum class PoleCondition { SameBranch, CrossBranch };
const char* to_string(PoleCondition c);

struct PoleReport {
  cplx phi_star;
  double im_abs = 0.0;
  PoleCondition condition = PoleCondition::SameBranch;
  int branch = 0;          ///< ν ∈ {1, 2} for SameBranch, 0 for CrossBranch
  double residual = 0.0;   ///< |β_a(φ*) + β_b(−φ*)| / max(1, |β_a| + |β_b|)
  int multiplicity = 1;    ///< zero order of the pair determinant
  bool removable = false;  ///< γ̃ stays bounded around φ*
  bool on_real_axis = false;
  double residue = 0.0;    ///< relative size of the Laurent principal part
};

struct PoleSearch {
  double im_cap = 0.0;
  std::vector<PoleReport> poles;  ///< sorted by im_abs, then Re φ*
  bool ambiguous = false;         ///< distinct orbits tie in im_abs within 1e-9
  bool critical = false;          ///< a non-removable root lies on the real axis

  /// Nearest pole of γ̃ itself (skips removable roots); nullptr if none.
  const PoleReport* nearest() const;
};

/// det of γ̃ ↦ x̃ᵀ(−φ)γ̃ + γ̃x̃(φ), i.e. Π_{a,b} (β_a(−φ) + β_b(φ)). Entire in φ.
cplx pair_determinant(const DriftForcing& system, cplx phi);

/// Zeros of the pair determinant in Re φ ∈ [re_lo, re_lo + 2π), im_lo < Im φ < im_hi,
/// counted by the argument principle. Throws InvalidArgument if a zero sits on the contour.
int count_roots(const DriftForcing& system, double im_lo, double im_hi, double re_lo = -kPi + 0.0123);

/// All pole-condition roots with |Im φ| ≤ im_cap, Re φ ∈ [−π, π).
/// Throws Error(NoPoles) when the strip holds none.
PoleSearch find_poles(const DriftForcing& system, double im_cap);

enum class LengthSource { Pole, TailFit };
const char* to_string(LengthSource s);

struct TailFit {
  bool available = false;
  double xi_inv = 0.0;
  double amplitude = 0.0;  ///< C in ‖γ(r)‖ ≈ C e^{−r/ξ}
  int r_lo = 0;
  int r_hi = 0;
  int points = 0;
};

/// Slope fit of log‖γ(r)‖ on the upper convex hull of the samples in [r_lo, r_hi],
/// truncated where ‖γ(r)‖ < 1e-11 max_r ‖γ(r)‖.
TailFit fit_tail(const CovarianceField& field, int r_lo, int r_hi);

struct LengthOptions {
  double im_cap = 5.0;
  int grid = 0;   ///< 0: automatic
  int r_max = 0;  ///< 0: automatic
  int jobs = 0;
  bool tail_fit = true;
};

struct CorrelationLength {
  double xi_inv = 0.0;
  LengthSource source = LengthSource::Pole;
  std::optional<PoleReport> pole;
  std::optional<PoleSearch> search;
  TailFit tail;
  double agreement = 0.0;  ///< |tail − pole| / pole when both exist
  int grid = 0;
  int r_max = 0;
};

CorrelationLength correlation_length(const DriftForcing& system, const LengthOptions& options = {});
CorrelationLength correlation_length(const NumericModel& model, const LengthOptions& options = {});

struct SweepSample {
  double g = 0.0;
  double xi_inv = 0.0;
};

struct SweepFit {
  std::vector<SweepSample> samples;
  double g_c = 0.0;
  double lambda = 0.0;
  double Lambda = 0.0;
  double residual = 0.0;  ///< RMS on the log scale
  double window_lo = 0.0; ///< min |g − g_c|
  double window_hi = 0.0; ///< max |g − g_c|
  std::optional<double> reference_lambda;
  bool reference_discrepant = false;  ///< |λ − reference| > 0.05
};

/// Fits ξ⁻¹ ≈ Λ|g − g_c|^λ. Needs ≥ 10 samples on one side of `g_c_hint`.
/// Throws FitDegenerate when ξ⁻¹ does not decrease monotonically toward g_c
/// or varies by less than a factor 2.
SweepFit exponent_fit(const std::vector<SweepSample>& samples, double g_c_hint,
                      std::optional<double> reference_lambda = std::nullopt);

/// Rebinds `param` to each grid value and evaluates ξ⁻¹ (pole route, tail fit off).
std::vector<SweepSample> sweep_correlation_length(const ModelSpec& spec, const std::string& param,
                                                  const std::vector<double>& grid,
                                                  const LengthOptions& options = {});

/// min over real φ of Re eig x̃(φ), with local refinement of the grid minimum.
double min_drift_rate(const DriftForcing& system, int n = 4096);

struct SlowingDownPoint {
  double g = 0.0;
  double tau = 0.0;
  double xi = 0.0;
  double ratio = 0.0;
};

struct SlowingDownReport {
  std::vector<SlowingDownPoint> points;
  double inf_ratio = 0.0;
  double sup_ratio = 0.0;
  double band() const { return sup_ratio / inf_ratio; }
  bool bounded_below() const;  ///< inf τ/ξ finite and > 0
};

SlowingDownReport slowing_down_check(const ModelSpec& spec, const std::string& param,
                                     const std::vector<double>& grid, const LengthOptions& options = {});

/// Min-norm γ̃ at a real momentum; meaningful at a real pole where the
/// Sylvester system is singular.
Mat2 symbol_at_real_pole(const DriftForcing& system, double phi);

/// ModelSpec with `param` rebound.
ModelSpec with_param(ModelSpec spec, const std::string& param, double value);

}  // namespace qcrit
