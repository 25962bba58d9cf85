#pragma once

#include <cstdint>
#include <string>

#include "core/steady_state.hpp"

namespace qcrit {

/// Periodic L-site ring assembled from the stencils (offsets wrap mod L).
struct FiniteRing {
  Statistics statistics = Statistics::Fermion;
  int L = 0;
  MatXc H;  ///< 2L×2L quadratic form, index ν·L + j
  MatXc M;  ///< bath matrix Σ l ⊗ l̄ over all translates and channels
  MatX X;
  MatX Y;
};

FiniteRing build_ring(const NumericModel& model, int L);

struct LyapunovSolution {
  MatX gamma;
  double residual = 0.0;
  std::string method;     ///< "kronecker" or "bartels-stewart"
  bool physical = false;  ///< passes the uncertainty relation at 1e-8
};

/// Solves Xᵀγ + γX = s·Y with s = forcing_sign (−1 only for negative controls).
/// Throws Error(Singular) when the steady state is not unique.
LyapunovSolution dense_lyapunov(const FiniteRing& ring, double forcing_sign = 1.0);

/// Right-hand side of the covariance equation of motion, −Xᵀγ − γX + tr(ρ)·Y.
MatX covariance_rate(const FiniteRing& ring, const MatX& gamma, double trace = 1.0);

struct CompareReport {
  double max_deviation = 0.0;
  int r_checked = 0;
  double tolerance = 1e-8;
  bool pass = false;
};

/// Max block deviation between the symbol route and row 0 of the dense covariance, |r| ≤ L/4.
/// Throws Error(StatisticsMismatch) if the tags differ.
CompareReport compare(const CovarianceField& symbol_route, const MatX& dense, Statistics dense_statistics,
                      double tolerance = 1e-8);

struct ExactOptions {
  int fock_cutoff = 8;
  bool convergence_check = true;  ///< bosons: repeat with doubled cutoff
};

struct ExactSteadyState {
  Statistics statistics = Statistics::Fermion;
  int L = 0;
  long hilbert_dim = 0;
  int kernel_dim = 0;
  MatX covariance;
  double residual = 0.0;       ///< ‖𝓛ρ‖ / ‖ρ‖ in the vectorized norm
  int fock_cutoff = 0;
  double cutoff_delta = 0.0;   ///< covariance change under cutoff doubling
};

/// Kernel of the full Liouvillian on the ring. Fermions L ≤ 5 (Jordan-Wigner);
/// bosons L ≤ 2 in a truncated Fock space (iterative solve). DegenerateKernel if the kernel is not one-dimensional.
ExactSteadyState exact_master_equation(const NumericModel& model, int L, const ExactOptions& options = {});

struct RateProbe {
  MatX covariance;  ///< covariance of a random non-stationary ρ
  MatX exact_rate;  ///< covariance functional applied to 𝓛ρ
};

/// Fermions only: d/dt of the covariance at a random density matrix, from the exact Liouvillian.
RateProbe exact_covariance_rate(const NumericModel& model, int L, std::uint64_t seed);

}  // namespace qcrit
