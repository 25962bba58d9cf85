#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "core/expr.hpp"
#include "core/types.hpp"

namespace qcrit {

struct ComplexExpr {
  Expr re;
  Expr im;

  cplx eval(const ParamMap& p) const { return {re.eval(p), im.eval(p)}; }
  friend bool operator==(const ComplexExpr& a, const ComplexExpr& b) {
    return a.re.source() == b.re.source() && a.im.source() == b.im.source();
  }
};

/// 2×2 block h(j) coupling coordinate ν of site x+j to coordinate ν' of site x.
struct BlockExpr {
  std::array<std::array<ComplexExpr, 2>, 2> entry;

  Mat2 eval(const ParamMap& p) const;
  friend bool operator==(const BlockExpr&, const BlockExpr&) = default;
};

struct HamiltonianStencil {
  std::map<int, BlockExpr> entries;
  friend bool operator==(const HamiltonianStencil&, const HamiltonianStencil&) = default;
};

/// One Lindblad channel per site: offset j → coefficients on (ν=1, ν=2) at site x+j.
struct LindbladStencil {
  std::map<int, std::array<ComplexExpr, 2>> entries;
  friend bool operator==(const LindbladStencil&, const LindbladStencil&) = default;
};

struct ModelSpec {
  Statistics statistics = Statistics::Fermion;
  int dimension = 1;
  HamiltonianStencil hamiltonian;
  std::vector<LindbladStencil> lindblads;
  ParamMap params;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Stencils with all parameters substituted.
struct NumericModel {
  Statistics statistics = Statistics::Fermion;
  std::map<int, Mat2> hamiltonian;
  std::vector<std::map<int, Vec2>> lindblads;
};

NumericModel evaluate(const ModelSpec& spec);
std::map<int, Vec2> evaluate_channel(const LindbladStencil& channel, const ParamMap& params);

/// Names referenced anywhere in the stencils.
std::set<std::string> referenced_parameters(const ModelSpec& spec);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;

  bool ok() const;
  const ValidationCheck* find(std::string_view name) const;
};

ValidationReport validate(const ModelSpec& spec);

/// Throws Error(Validation) with the failing checks listed.
NumericModel evaluate_validated(const ModelSpec& spec);

// Presets. Stencils reference the named parameters so sweeps only rebind values.

/// Jordan-Wigner XY chain: h̃(φ) = ½(B − cos φ)σ_y + (Γ/2) sin φ σ_x. Parameters B, Gamma.
ModelSpec preset_xy_fermion(double B, double Gamma);

/// Hopping chain with h̃(φ) = t(cos φ − v)·𝟙₂. Parameters t, v.
ModelSpec preset_boson_hopping(double t, double v);

enum class NoiseKind { OnSiteFermion, TwoSiteFermion, OnSiteBoson };

NoiseKind parse_noise_kind(std::string_view name, Statistics stats);
const char* to_string(NoiseKind kind);

/// Single-channel noise referencing parameters `eps` and `g`; rejects ε < 0.
LindbladStencil preset_noise(NoiseKind kind, double eps, double g);

/// Appends `preset_noise(kind, eps, g)` and binds eps, g.
ModelSpec with_noise(ModelSpec spec, NoiseKind kind, double eps, double g);

}  // namespace qcrit
