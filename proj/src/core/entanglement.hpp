#pragma once

#include <vector>

#include "core/steady_state.hpp"

namespace qcrit {

/// Region A = sites [begin, end) of an n-site segment.
struct BlockPartition {
  int total_sites = 0;
  int begin = 0;
  int end = 0;

  int size() const { return end - begin; }
  void check() const;  ///< throws InvalidArgument unless A is nonempty and proper
};

/// Centered block of the given size.
BlockPartition centered_block(int total_sites, int size);

/// Block-Toeplitz restriction Γ_{(ν,a),(μ,b)} = γ(a−b)_{νμ}, index ν·n + a.
/// Offsets beyond r_max are dropped; TailTooFat if ‖γ(±r_max)‖ exceeds
/// `tail_tol`·‖γ(0)‖ in that case.
MatX assemble_restriction(const CovarianceField& field, int n, double tail_tol = 1e-12);

struct PositivityCheck {
  bool ok = false;
  double margin = 0.0;  ///< bosons: min eig(Γ + iσ); fermions: 1 − max singular value
  double symmetry_error = 0.0;  ///< ‖Γ ∓ Γᵀ‖ for bosons / fermions
};
/// Uncertainty relation at tolerance 1e-8.
PositivityCheck check_positivity(const MatX& gamma, Statistics statistics, double tol = 1e-8);

/// Positive eigenvalues of iσγ, ascending, singly counted. NotPositive if γ is not positive definite.
std::vector<double> symplectic_spectrum(const MatX& gamma);

struct DarkStateCheck {
  bool pure = false;
  double deviation = 0.0;
};
/// Bosons: symplectic eigenvalues equal 1; fermions: singular values of Γ equal 1.
DarkStateCheck is_dark_state(const MatX& gamma, Statistics statistics, double tol = 1e-6);
DarkStateCheck is_dark_state(const CovarianceField& field, int n, double tol = 1e-6);

/// PγP with P flipping the momentum quadrature u₂ of every site in A.
MatX partial_transpose(const MatX& gamma, const BlockPartition& part);

struct Negativity {
  double log_negativity = 0.0;  ///< Σ log₂ max(1, 1/λ_j) of γ^Γ
  double spectral_sum = 0.0;    ///< Σ |1/λ_j − 1|
  double l1_bound = 0.0;        ///< entrywise ‖K^{−1/2} − 𝟙‖₁ with K = (γ^{Γ/2} iσ γ^{Γ/2})²
  std::vector<double> spectrum; ///< symplectic spectrum of γ^Γ
  bool chain_holds = false;     ///< E_N ≤ spectral_sum ≤ l1_bound, slack 1e-9
};
Negativity log_negativity(const MatX& gamma, const BlockPartition& part);

struct AreaLawRow {
  int block_size = 0;
  Negativity value;
};

struct AreaLawScan {
  int total_sites = 0;
  std::vector<AreaLawRow> rows;
  /// max/min over rows with block_size ≥ from; 1 when all entries vanish.
  double l1_plateau_ratio(int from = 0) const;
  double negativity_plateau_ratio(int from = 0) const;
  bool chain_holds() const;
};

/// Centered blocks of each size in an n-site restriction of a bosonic field.
AreaLawScan area_law_scan(const CovarianceField& field, int n, const std::vector<int>& sizes, int jobs = 0);
/// Computes the field first (r_max = n − 1, grid ≥ max(1024, 8 r_max)).
AreaLawScan area_law_scan(const NumericModel& model, int n, const std::vector<int>& sizes, int jobs = 0);

}  // namespace qcrit
