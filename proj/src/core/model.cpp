#include "core/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "core/error.hpp"

namespace qcrit {

namespace {

ComplexExpr real_part(const char* re) { return {Expr::parse(re), Expr()}; }
ComplexExpr imag_part(const char* im) { return {Expr(), Expr::parse(im)}; }

BlockExpr off_diagonal_imag(const char* upper, const char* lower) {
  BlockExpr b;
  b.entry[0][1] = imag_part(upper);
  b.entry[1][0] = imag_part(lower);
  return b;
}

BlockExpr diagonal_real(const char* value) {
  BlockExpr b;
  b.entry[0][0] = real_part(value);
  b.entry[1][1] = real_part(value);
  return b;
}

}  // namespace

Mat2 BlockExpr::eval(const ParamMap& p) const {
  Mat2 m;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) m(a, b) = entry[a][b].eval(p);
  return m;
}

std::map<int, Vec2> evaluate_channel(const LindbladStencil& channel, const ParamMap& params) {
  std::map<int, Vec2> out;
  for (const auto& [offset, coeffs] : channel.entries)
    out[offset] = Vec2(coeffs[0].eval(params), coeffs[1].eval(params));
  return out;
}

NumericModel evaluate(const ModelSpec& spec) {
  NumericModel m;
  m.statistics = spec.statistics;
  for (const auto& [offset, block] : spec.hamiltonian.entries)
    m.hamiltonian[offset] = block.eval(spec.params);
  for (const auto& channel : spec.lindblads)
    m.lindblads.push_back(evaluate_channel(channel, spec.params));
  return m;
}

std::set<std::string> referenced_parameters(const ModelSpec& spec) {
  std::set<std::string> names;
  auto add = [&](const ComplexExpr& e) {
    for (const auto& n : e.re.identifiers()) names.insert(n);
    for (const auto& n : e.im.identifiers()) names.insert(n);
  };
  for (const auto& [_, block] : spec.hamiltonian.entries)
    for (const auto& row : block.entry)
      for (const auto& e : row) add(e);
  for (const auto& channel : spec.lindblads)
    for (const auto& [_, coeffs] : channel.entries)
      for (const auto& e : coeffs) add(e);
  return names;
}

bool ValidationReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const ValidationCheck* ValidationReport::find(std::string_view name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ValidationReport validate(const ModelSpec& spec) {
  ValidationReport report;
  auto add = [&](std::string name, bool passed, std::string detail) {
    report.checks.push_back({std::move(name), passed, std::move(detail)});
  };

  add("dimension", spec.dimension == 1,
      spec.dimension == 1 ? "1" : "dimension " + std::to_string(spec.dimension) +
                                      " is not supported beyond construction");

  std::vector<std::string> missing;
  for (const auto& name : referenced_parameters(spec))
    if (!spec.params.contains(name)) missing.push_back(name);
  {
    std::string detail;
    for (const auto& n : missing) detail += (detail.empty() ? "unbound: " : ", ") + n;
    add("parameter-binding", missing.empty(), detail);
  }

  size_t support = spec.hamiltonian.entries.size();
  for (const auto& ch : spec.lindblads) support += ch.entries.size();
  add("finite-support", true, std::to_string(support) + " stencil entries");

  if (!missing.empty()) {
    for (const char* name : {"block-reality", "stencil-symmetry", "symbol-hermitian", "finite-values"})
      add(name, false, "skipped: unbound parameters");
    return report;
  }

  const NumericModel m = evaluate(spec);
  const bool boson = spec.statistics == Statistics::Boson;

  bool finite = true;
  for (const auto& [_, h] : m.hamiltonian) finite = finite && h.allFinite();
  for (const auto& ch : m.lindblads)
    for (const auto& [_, l] : ch) finite = finite && l.allFinite();
  add("finite-values", finite, finite ? "" : "non-finite stencil coefficient");

  double scale = 0.0;
  for (const auto& [_, h] : m.hamiltonian) scale = std::max(scale, h.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * std::max(1.0, scale);

  double reality_err = 0.0;
  for (const auto& [_, h] : m.hamiltonian)
    reality_err = std::max(reality_err, boson ? h.imag().cwiseAbs().maxCoeff()
                                              : h.real().cwiseAbs().maxCoeff());
  add("block-reality", reality_err <= tol,
      std::string(boson ? "max |Im h(j)| = " : "max |Re h(j)| = ") + std::to_string(reality_err));

  double sym_err = 0.0;
  std::string sym_detail;
  for (const auto& [j, h] : m.hamiltonian) {
    auto it = m.hamiltonian.find(-j);
    Mat2 partner = it == m.hamiltonian.end() ? Mat2::Zero() : it->second;
    Mat2 expected = boson ? Mat2(h.transpose()) : Mat2(-h.transpose());
    double err = (partner - expected).cwiseAbs().maxCoeff();
    if (err > sym_err) {
      sym_err = err;
      sym_detail = "offset " + std::to_string(j) + ": |h(-j) " + (boson ? "- h(j)^T" : "+ h(j)^T") +
                   "| = " + std::to_string(err);
    }
  }
  add("stencil-symmetry", sym_err <= tol, sym_detail);

  double herm_err = 0.0;
  constexpr int kGrid = 1024;
  for (int k = 0; k < kGrid; ++k) {
    double phi = -kPi + 2.0 * kPi * k / kGrid;
    Mat2 s = Mat2::Zero();
    for (const auto& [j, h] : m.hamiltonian) s += h * std::exp(-kI * (phi * j));
    herm_err = std::max(herm_err, (s - s.adjoint()).cwiseAbs().maxCoeff());
  }
  add("symbol-hermitian", herm_err <= tol,
      "max |h~ - h~^dagger| on 1024-grid = " + std::to_string(herm_err));
  return report;
}

NumericModel evaluate_validated(const ModelSpec& spec) {
  auto report = validate(spec);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "model validation failed:";
    for (const auto& c : report.checks)
      if (!c.passed) msg << " [" << c.name << ": " << c.detail << "]";
    throw Error(ErrorCode::Validation, msg.str());
  }
  return evaluate(spec);
}

ModelSpec preset_xy_fermion(double B, double Gamma) {
  ModelSpec spec;
  spec.statistics = Statistics::Fermion;
  // Majorana blocks of ½(B − cos φ)σ_y + (Γ/2) sin φ σ_x, offsets 0 and ±1.
  spec.hamiltonian.entries[0] = off_diagonal_imag("-B/2", "B/2");
  spec.hamiltonian.entries[1] = off_diagonal_imag("(1+Gamma)/4", "(Gamma-1)/4");
  spec.hamiltonian.entries[-1] = off_diagonal_imag("(1-Gamma)/4", "-(1+Gamma)/4");
  spec.params["B"] = B;
  spec.params["Gamma"] = Gamma;
  return spec;
}

ModelSpec preset_boson_hopping(double t, double v) {
  ModelSpec spec;
  spec.statistics = Statistics::Boson;
  spec.hamiltonian.entries[0] = diagonal_real("-t*v");
  spec.hamiltonian.entries[1] = diagonal_real("t/2");
  spec.hamiltonian.entries[-1] = diagonal_real("t/2");
  spec.params["t"] = t;
  spec.params["v"] = v;
  return spec;
}

NoiseKind parse_noise_kind(std::string_view name, Statistics stats) {
  if (name == "two-site") {
    if (stats != Statistics::Fermion)
      throw Error(ErrorCode::InvalidArgument, "two-site noise preset is fermionic");
    return NoiseKind::TwoSiteFermion;
  }
  if (name == "on-site")
    return stats == Statistics::Fermion ? NoiseKind::OnSiteFermion : NoiseKind::OnSiteBoson;
  throw Error(ErrorCode::InvalidArgument,
              "unknown noise kind '" + std::string(name) + "' (expected on-site|two-site)");
}

const char* to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::OnSiteFermion: return "on-site-fermion";
    case NoiseKind::TwoSiteFermion: return "two-site-fermion";
    case NoiseKind::OnSiteBoson: return "on-site-boson";
  }
  return "?";
}

LindbladStencil preset_noise(NoiseKind kind, double eps, double g) {
  if (!(eps >= 0.0))
    throw Error(ErrorCode::InvalidArgument, "noise amplitude eps must be >= 0");
  (void)g;
  LindbladStencil ch;
  auto c = [](const char* re, const char* im) { return ComplexExpr{Expr::parse(re), Expr::parse(im)}; };
  switch (kind) {
    case NoiseKind::OnSiteFermion:
      // ε w₁ + ε e^{ig} w₂
      ch.entries[0] = {c("eps", "0"), c("eps*cos(g)", "eps*sin(g)")};
      break;
    case NoiseKind::TwoSiteFermion:
      // ε w₁(x) + ε e^{ig} w₁(x+1)
      ch.entries[0] = {c("eps", "0"), c("0", "0")};
      ch.entries[1] = {c("eps*cos(g)", "eps*sin(g)"), c("0", "0")};
      break;
    case NoiseKind::OnSiteBoson:
      // ε u₁ − ε e^{ig} u₂; damping (L = 2εb) at g = π/2
      ch.entries[0] = {c("eps", "0"), c("-eps*cos(g)", "-eps*sin(g)")};
      break;
  }
  return ch;
}

ModelSpec with_noise(ModelSpec spec, NoiseKind kind, double eps, double g) {
  const bool boson_noise = kind == NoiseKind::OnSiteBoson;
  if (boson_noise != (spec.statistics == Statistics::Boson))
    throw Error(ErrorCode::InvalidArgument,
                std::string("noise kind ") + to_string(kind) + " does not match " +
                    to_string(spec.statistics) + " statistics");
  spec.lindblads.push_back(preset_noise(kind, eps, g));
  spec.params["eps"] = eps;
  spec.params["g"] = g;
  return spec;
}

}  // namespace qcrit
