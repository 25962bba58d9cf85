// qcrit command-line driver. Talks to the library only through qcrit.h.
#include <qcrit/qcrit.h>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emit.hpp"

namespace {

using qcli::Csv;
using qcli::jnum;
using qcli::json;
using qcli::num;

enum Exit { kOk = 0, kUsage = 1, kInvariant = 2, kPhysics = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ApiError : std::runtime_error {
  qcrit_status status;
  ApiError(qcrit_status s, const std::string& what) : std::runtime_error(what), status(s) {}
};

void check(qcrit_status s) {
  if (s != QCRIT_OK) throw ApiError(s, qcrit_last_error());
}

int exit_for(qcrit_status s) {
  switch (s) {
    case QCRIT_E_INVALID_ARGUMENT:
    case QCRIT_E_PARSE:
    case QCRIT_E_VALIDATION:
    case QCRIT_E_STATISTICS_MISMATCH: return kUsage;
    case QCRIT_E_SINGULAR:
    case QCRIT_E_UNSTABLE:
    case QCRIT_E_DEGENERATE_KERNEL:
    case QCRIT_E_NO_POLES: return kPhysics;
    default: return kInvariant;
  }
}

struct ModelDeleter {
  void operator()(qcrit_model* m) const { qcrit_model_free(m); }
};
struct SymbolDeleter {
  void operator()(qcrit_symbol* s) const { qcrit_symbol_free(s); }
};
struct FieldDeleter {
  void operator()(qcrit_field* f) const { qcrit_field_free(f); }
};
using Model = std::unique_ptr<qcrit_model, ModelDeleter>;
using Symbol = std::unique_ptr<qcrit_symbol, SymbolDeleter>;
using Field = std::unique_ptr<qcrit_field, FieldDeleter>;

std::string take_string(char* s) {
  std::string out = s ? s : "";
  qcrit_string_free(s);
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw UsageError("invalid number for " + what + ": '" + text + "'");
  return v;
}

int parse_int(const std::string& text, const std::string& what) {
  int v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e) throw UsageError("invalid integer for " + what + ": '" + text + "'");
  return v;
}

std::string trim(std::string s) {
  auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  size_t i = 0;
  while (i < s.size() && ws(s[i])) ++i;
  return s.substr(i);
}

// ---- model sources ----

struct PresetInfo {
  const char* name;
  const char* statistics;
  std::vector<std::pair<const char*, double>> defaults;  // Hamiltonian params, then eps, g
  const char* noise;
  std::vector<const char*> noise_kinds;
};

const std::vector<PresetInfo>& presets() {
  static const std::vector<PresetInfo> p = {
      {"xy-fermion", "fermion",
       {{"B", 0.5}, {"Gamma", 0.5}, {"eps", 0.5}, {"g", std::numbers::pi / 3}},
       "two-site", {"two-site", "on-site", "none"}},
      {"boson-hopping", "boson",
       {{"t", 1.0}, {"v", 0.5}, {"eps", 1.0}, {"g", std::numbers::pi / 4}},
       "on-site", {"on-site", "none"}},
  };
  return p;
}

const PresetInfo& find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (name == p.name) return p;
  throw UsageError("unknown preset '" + name + "' (try: model list)");
}

struct SourceArgs {
  std::string preset;
  std::string config;
  std::vector<std::string> set;
};

/// k=v pairs in command-line order; later keys override earlier ones.
std::vector<std::pair<std::string, std::string>> parse_set(const std::vector<std::string>& items) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      if (part.empty()) continue;
      const auto eq = part.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + part + "'");
      std::string key = trim(part.substr(0, eq));
      std::string value = trim(part.substr(eq + 1));
      auto it = std::find_if(out.begin(), out.end(), [&](const auto& kv) { return kv.first == key; });
      if (it != out.end())
        it->second = value;
      else
        out.emplace_back(std::move(key), std::move(value));
    }
  }
  return out;
}

/// Resolves --preset/--config/--set into {"source": ..., "model": <model json>}.
json resolve_source(const SourceArgs& args) {
  if (args.preset.empty() == args.config.empty())
    throw UsageError("exactly one of --preset or --config is required");
  const auto overrides = parse_set(args.set);
  json source;
  json over = json::object();
  Model model;

  if (!args.preset.empty()) {
    const auto& info = find_preset(args.preset);
    std::vector<std::pair<std::string, double>> values(info.defaults.begin(), info.defaults.end());
    std::string noise = info.noise;
    for (const auto& [k, v] : overrides) {
      if (k == "noise") {
        if (std::find(info.noise_kinds.begin(), info.noise_kinds.end(), v) == info.noise_kinds.end())
          throw UsageError("preset " + args.preset + " does not support noise=" + v);
        noise = v;
        over[k] = v;
        continue;
      }
      auto it = std::find_if(values.begin(), values.end(), [&](const auto& kv) { return kv.first == k; });
      if (it == values.end()) {
        std::string allowed;
        for (const auto& d : info.defaults) allowed += std::string(allowed.empty() ? "" : ", ") + d.first;
        throw UsageError("preset " + args.preset + " has no parameter '" + k + "' (allowed: " + allowed +
                         ", noise)");
      }
      it->second = parse_double(v, k);
      over[k] = it->second;
    }
    qcrit_model* raw = nullptr;
    check(qcrit_model_preset(info.name, &raw));
    model.reset(raw);
    double eps = 0.0, g = 0.0;
    for (const auto& [k, v] : values) {
      if (k == "eps")
        eps = v;
      else if (k == "g")
        g = v;
      else
        check(qcrit_model_set_param(model.get(), k.c_str(), v));
    }
    if (noise != "none") check(qcrit_model_add_noise(model.get(), noise.c_str(), eps, g));
    source["preset"] = args.preset;
  } else {
    std::ifstream in(args.config, std::ios::binary);
    if (!in) throw UsageError("cannot read config '" + args.config + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    qcrit_model* raw = nullptr;
    check(qcrit_model_from_json(buf.str().c_str(), &raw));
    model.reset(raw);
    for (const auto& [k, v] : overrides) {
      if (k == "noise") throw UsageError("noise=... applies to presets only; add the channel to the config");
      const double x = parse_double(v, k);
      check(qcrit_model_set_param(model.get(), k.c_str(), x));
      over[k] = x;
    }
    source["config"] = args.config;
  }
  source["overrides"] = over;

  char* text = nullptr;
  check(qcrit_model_to_json(model.get(), &text));
  return json{{"source", source}, {"model", json::parse(take_string(text))}};
}

Model load_model(const json& manifest) {
  qcrit_model* raw = nullptr;
  check(qcrit_model_from_json(manifest.at("model").dump().c_str(), &raw));
  Model m(raw);
  char* report = nullptr;
  const auto st = qcrit_model_validate(m.get(), &report);
  const std::string text = take_string(report);
  if (st == QCRIT_E_VALIDATION) throw ApiError(st, "model validation failed:\n" + text);
  check(st);
  return m;
}

qcrit_statistics statistics_of(const qcrit_model* m) {
  qcrit_statistics s;
  check(qcrit_model_statistics(m, &s));
  return s;
}

const char* name_of(qcrit_statistics s) { return s == QCRIT_BOSON ? "boson" : "fermion"; }

std::string timestamp() {
  std::time_t t = std::time(nullptr);
  if (const char* sde = std::getenv("SOURCE_DATE_EPOCH")) t = static_cast<std::time_t>(std::atoll(sde));
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json make_manifest(const std::string& command, const json& resolved, const json& settings,
                   const std::vector<std::string>& outputs) {
  json m;
  m["command"] = command;
  m["source"] = resolved.at("source");
  m["model"] = resolved.at("model");
  m["settings"] = settings;
  m["outputs"] = outputs;
  m["timestamp"] = timestamp();
  m["version"] = qcrit_version();
  return m;
}

struct Run {
  std::filesystem::path out_dir;
  int jobs = 0;
};

void write_outputs(const Run& run, const json& manifest,
                   const std::vector<std::pair<std::string, std::string>>& files) {
  for (const auto& [name, content] : files) qcli::write_file(run.out_dir, name, content);
  qcli::write_file(run.out_dir, "manifest.json", qcli::dump_document(manifest));
}

json document(const json& manifest) {
  json doc;
  doc["manifest"] = manifest;
  return doc;
}

std::vector<std::string> matrix_header(const std::string& first) {
  return {first, "re_g11[1]", "im_g11[1]", "re_g12[1]", "im_g12[1]",
          "re_g21[1]", "im_g21[1]", "re_g22[1]", "im_g22[1]", "flagged"};
}

std::string symbol_csv(const json& manifest, const qcrit_symbol* sym) {
  Csv csv(manifest, matrix_header("phi[rad]"));
  size_t n = 0;
  check(qcrit_symbol_size(sym, &n));
  for (size_t i = 0; i < n; ++i) {
    double phi, v[8];
    int flagged;
    check(qcrit_symbol_get(sym, i, &phi, v, &flagged));
    csv.row(phi, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], flagged);
  }
  return csv.text();
}

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void check_grid(int grid, int r_max) {
  if (!is_pow2(grid) || grid < 256) throw UsageError("--grid must be a power of two >= 256");
  if (r_max < 1) throw UsageError("--rmax must be positive");
  if (grid < 8 * r_max) throw UsageError("--grid must be at least 8 * rmax");
}

json check_entry(const std::string& name, bool passed, double value, double tolerance) {
  return json{{"name", name}, {"passed", passed}, {"value", jnum(value)}, {"tolerance", tolerance}};
}

// ---- commands ----

int run_steady(const json& manifest, const Run& run) {
  const auto& s = manifest.at("settings");
  const int grid = s.at("grid");
  const int r_max = s.at("r_max");
  const double res_tol = s.at("residual_tol");
  const double imag_tol = s.at("imag_tol");
  const double pos_tol = s.at("positivity_tol");
  check_grid(grid, r_max);
  auto model = load_model(manifest);

  qcrit_symbol* sraw = nullptr;
  check(qcrit_covariance_symbol(model.get(), grid, run.jobs, &sraw));
  Symbol sym(sraw);
  qcrit_field* fraw = nullptr;
  check(qcrit_correlations(sym.get(), r_max, &fraw));
  Field field(fraw);

  qcrit_field_info info;
  check(qcrit_field_info_get(field.get(), &info));
  double residual = 0.0;
  check(qcrit_symbol_max_residual(sym.get(), &residual));

  Csv corr(manifest, {"r[sites]", "g11[1]", "g12[1]", "g21[1]", "g22[1]", "norm[1]"});
  for (int r = -r_max; r <= r_max; ++r) {
    double b[4];
    check(qcrit_field_block(field.get(), r, b));
    corr.row(r, b[0], b[1], b[2], b[3], std::sqrt(b[0] * b[0] + b[1] * b[1] + b[2] * b[2] + b[3] * b[3]));
  }

  const int n = std::min(r_max + 1, 64);
  int pos_ok = 0;
  double margin = 0.0;
  check(qcrit_field_positivity(field.get(), n, &pos_ok, &margin));

  json checks = json::array();
  checks.push_back(check_entry("sylvester_residual", residual <= res_tol, residual, res_tol));
  checks.push_back(check_entry("imaginary_part", info.max_imag <= imag_tol, info.max_imag, imag_tol));
  checks.push_back(check_entry("positivity_margin", margin >= -pos_tol, margin, pos_tol));
  bool pass = true;
  for (const auto& c : checks) pass = pass && c.at("passed").get<bool>();

  json doc = document(manifest);
  doc["statistics"] = name_of(info.statistics);
  doc["grid"] = info.grid_size;
  doc["r_max"] = info.r_max;
  doc["restriction_sites"] = n;
  doc["refined_cells"] = info.refined_cells;
  doc["checks"] = checks;
  doc["pass"] = pass;

  write_outputs(run, manifest,
                {{"symbol.csv", symbol_csv(manifest, sym.get())},
                 {"correlations.csv", corr.text()},
                 {"steady.json", qcli::dump_document(doc)}});
  if (!pass) std::cerr << "steady: invariant check failed\n";
  return pass ? kOk : kInvariant;
}

qcrit_length_options length_options(const json& s, int jobs, bool tail) {
  qcrit_length_options o{};
  o.im_cap = s.at("im_cap");
  o.grid = s.at("grid");
  o.r_max = s.at("r_max");
  o.jobs = jobs;
  o.tail_fit = tail ? 1 : 0;
  return o;
}

int run_sweep(const json& manifest, const Run& run) {
  const auto& s = manifest.at("settings");
  const std::string param = s.at("param");
  const double lo = s.at("lo"), hi = s.at("hi");
  const int count = s.at("count");
  const double hint = s.at("gc_hint");
  const double ref = s.at("reference_lambda").is_null() ? std::nan("") : s.at("reference_lambda").get<double>();
  auto base = load_model(manifest);
  {
    double dummy;
    check(qcrit_model_get_param(base.get(), param.c_str(), &dummy));
  }

  std::vector<double> grid(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) grid[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);

  Csv csv(manifest, {param + "[1]", "xi_inv_pole[1/site]", "xi_inv_tailfit[1/site]", "tau[1/rate]",
                     "tau_over_xi[1]", "flags"});
  std::vector<double> fit_g, fit_xi;
  double inf_ratio = INFINITY, sup_ratio = 0.0, inf_xi = INFINITY, sup_xi = 0.0;
  bool physics_flag = false;
  const auto opts = length_options(s, run.jobs, s.at("tail_fit").get<bool>());

  for (double g : grid) {
    qcrit_model* raw = nullptr;
    check(qcrit_model_clone(base.get(), &raw));
    Model m(raw);
    check(qcrit_model_set_param(m.get(), param.c_str(), g));
    std::vector<std::string> flags;
    double xi_pole = NAN, xi_tail = NAN, tau = NAN;
    qcrit_length len{};
    const auto st = qcrit_correlation_length(m.get(), &opts, &len);
    if (st == QCRIT_OK) {
      if (len.source == QCRIT_LENGTH_POLE) {
        xi_pole = len.xi_inv;
        if (len.xi_inv == 0.0) flags.push_back("critical");
      } else {
        flags.push_back("no-poles");
      }
      if (len.tail_available)
        xi_tail = len.tail_xi_inv;
      else if (opts.tail_fit)
        flags.push_back("tail-unavailable");
      double rate = 0.0;
      check(qcrit_min_drift_rate(m.get(), &rate));
      tau = rate > 0 ? 1.0 / rate : INFINITY;
    } else if (st == QCRIT_E_UNSTABLE || st == QCRIT_E_SINGULAR || st == QCRIT_E_NO_POLES) {
      flags.push_back(st == QCRIT_E_UNSTABLE ? "unstable" : st == QCRIT_E_SINGULAR ? "singular" : "no-poles");
      physics_flag = physics_flag || st != QCRIT_E_NO_POLES;
      std::cerr << "sweep: " << param << "=" << num(g) << ": " << qcrit_last_error() << "\n";
    } else {
      check(st);
    }
    const double xi_inv = std::isfinite(xi_pole) ? xi_pole : xi_tail;
    const double ratio = tau * xi_inv;
    if (std::isfinite(xi_inv)) {
      inf_xi = std::min(inf_xi, xi_inv);
      sup_xi = std::max(sup_xi, xi_inv);
      if (xi_inv > 0 && std::isfinite(ratio)) {
        inf_ratio = std::min(inf_ratio, ratio);
        sup_ratio = std::max(sup_ratio, ratio);
      }
      fit_g.push_back(g);
      fit_xi.push_back(xi_inv);
    }
    std::string f;
    for (const auto& x : flags) f += (f.empty() ? "" : "|") + x;
    csv.row(g, xi_pole, xi_tail, tau, ratio, f.empty() ? std::string("ok") : f);
  }

  json doc = document(manifest);
  qcrit_sweep_fit fit{};
  // the range was validated up front, so a short or flat sample set is a result, not a usage error
  const auto fst = fit_g.empty() ? QCRIT_E_INVALID_ARGUMENT
                                 : qcrit_exponent_fit(fit_g.data(), fit_xi.data(), fit_g.size(), hint, ref, &fit);
  if (fst == QCRIT_OK) {
    doc["fit"] = {{"g_c", fit.g_c},
                  {"lambda", fit.lambda},
                  {"Lambda", fit.Lambda},
                  {"residual", fit.residual},
                  {"window", {{"lo", fit.window_lo}, {"hi", fit.window_hi}}},
                  {"reference_lambda", fit.has_reference ? jnum(fit.reference_lambda) : json(nullptr)},
                  {"reference_discrepant", fit.reference_discrepant != 0}};
  } else if (fst == QCRIT_E_FIT_DEGENERATE) {
    doc["fit"] = {{"status", "FitDegenerate"}, {"message", qcrit_last_error()}};
  } else if (fst == QCRIT_E_INVALID_ARGUMENT) {
    doc["fit"] = {{"status", "InsufficientSamples"},
                  {"message", fit_g.empty() ? std::string("no point has a finite correlation length")
                                            : std::string(qcrit_last_error())},
                  {"finite_points", fit_g.size()}};
  } else {
    check(fst);
  }
  doc["xi_inv"] = {{"inf", jnum(inf_xi)}, {"sup", jnum(sup_xi)}};
  doc["slowing_down"] = {{"inf_ratio", jnum(inf_ratio)},
                         {"sup_ratio", jnum(sup_ratio)},
                         {"band", jnum(sup_ratio / inf_ratio)}};

  write_outputs(run, manifest, {{"sweep.csv", csv.text()}, {"sweep_fit.json", qcli::dump_document(doc)}});
  return physics_flag ? kPhysics : kOk;
}

json pole_json(const qcrit_pole& p) {
  return {{"phi", {p.phi_re, p.phi_im}},
          {"im_abs", p.im_abs},
          {"condition", p.condition == QCRIT_SAME_BRANCH ? "same-branch" : "cross-branch"},
          {"branch", p.branch},
          {"multiplicity", p.multiplicity},
          {"removable", p.removable != 0},
          {"on_real_axis", p.on_real_axis != 0},
          {"residual", p.residual},
          {"residue", p.residue}};
}

int run_poles(const json& manifest, const Run& run) {
  const double im_cap = manifest.at("settings").at("im_cap");
  auto model = load_model(manifest);
  std::vector<qcrit_pole> poles(64);
  size_t count = 0;
  int flags = 0;
  auto st = qcrit_find_poles(model.get(), im_cap, poles.data(), poles.size(), &count, &flags);
  if (st == QCRIT_OK && count > poles.size()) {
    poles.resize(count);
    st = qcrit_find_poles(model.get(), im_cap, poles.data(), poles.size(), &count, &flags);
  }
  const bool none = st == QCRIT_E_NO_POLES;
  if (none)
    std::cerr << "poles: " << qcrit_last_error() << "\n";
  else
    check(st);
  poles.resize(none ? 0 : count);

  Csv csv(manifest, {"phi_re[rad]", "phi_im[rad]", "im_abs[1/site]", "condition", "branch", "multiplicity",
                     "removable", "on_real_axis", "residual[1]", "residue[1]"});
  json list = json::array();
  json xi = nullptr;
  for (const auto& p : poles) {
    csv.row(p.phi_re, p.phi_im, p.im_abs, std::string(p.condition == QCRIT_SAME_BRANCH ? "same-branch" : "cross-branch"),
            p.branch, p.multiplicity, p.removable, p.on_real_axis, p.residual, p.residue);
    list.push_back(pole_json(p));
    if (xi.is_null() && !p.removable) xi = p.on_real_axis ? 0.0 : p.im_abs;
  }
  json doc = document(manifest);
  doc["im_cap"] = im_cap;
  doc["no_poles"] = none;
  doc["count"] = poles.size();
  doc["ambiguous"] = (flags & QCRIT_POLES_AMBIGUOUS) != 0;
  doc["critical"] = (flags & QCRIT_POLES_CRITICAL) != 0;
  doc["xi_inv"] = xi;
  doc["poles"] = list;
  write_outputs(run, manifest, {{"poles.csv", csv.text()}, {"poles.json", qcli::dump_document(doc)}});
  return kOk;
}

int run_negativity(const json& manifest, const Run& run) {
  const auto& s = manifest.at("settings");
  const int n = s.at("chain_length");
  const int lo = s.at("block_lo"), hi = s.at("block_hi");
  const double dark_tol = s.at("dark_tol");
  if (n < 2) throw UsageError("--chain-length must be at least 2");
  if (lo < 1 || hi < lo || hi >= n) throw UsageError("--block lo..hi needs 1 <= lo <= hi < chain length");
  auto model = load_model(manifest);
  if (statistics_of(model.get()) != QCRIT_BOSON) throw UsageError("negativity is defined for bosonic models only");

  std::vector<int> sizes;
  for (int b = lo; b <= hi; ++b) sizes.push_back(b);
  std::vector<qcrit_negativity> rows(sizes.size());
  check(qcrit_area_law_scan(model.get(), n, sizes.data(), sizes.size(), run.jobs, rows.data()));

  int grid = 1024;
  while (grid < 8 * (n - 1)) grid *= 2;
  qcrit_symbol* sraw = nullptr;
  check(qcrit_covariance_symbol(model.get(), grid, run.jobs, &sraw));
  Symbol sym(sraw);
  qcrit_field* fraw = nullptr;
  check(qcrit_correlations(sym.get(), n - 1, &fraw));
  Field field(fraw);
  int pure = 0;
  double deviation = 0.0;
  check(qcrit_is_dark_state(field.get(), n, dark_tol, &pure, &deviation));

  Csv csv(manifest, {"block_size[sites]", "E_N[1]", "spectral_sum[1]", "l1_bound[1]", "chain_holds"});
  json table = json::array();
  bool chain = true;
  double en_min = INFINITY, en_max = 0.0, l1_min = INFINITY, l1_max = 0.0;
  for (const auto& r : rows) {
    csv.row(r.block_size, r.log_negativity, r.spectral_sum, r.l1_bound, r.chain_holds);
    table.push_back({{"block_size", r.block_size},
                     {"log_negativity", r.log_negativity},
                     {"spectral_sum", r.spectral_sum},
                     {"l1_bound", r.l1_bound},
                     {"chain_holds", r.chain_holds != 0}});
    chain = chain && r.chain_holds;
    en_min = std::min(en_min, r.log_negativity);
    en_max = std::max(en_max, r.log_negativity);
    l1_min = std::min(l1_min, r.l1_bound);
    l1_max = std::max(l1_max, r.l1_bound);
  }
  json doc = document(manifest);
  doc["chain_length"] = n;
  doc["rows"] = table;
  doc["chain_holds"] = chain;
  doc["plateau"] = {{"l1_ratio", jnum(l1_max / l1_min)}, {"log_negativity_ratio", jnum(en_max / en_min)}};
  doc["dark_state"] = {{"pure", pure != 0}, {"deviation", deviation}, {"tolerance", dark_tol}};
  write_outputs(run, manifest, {{"negativity.csv", csv.text()}, {"negativity.json", qcli::dump_document(doc)}});
  if (!chain) std::cerr << "negativity: inequality chain violated\n";
  return chain ? kOk : kInvariant;
}

int run_oracle(const json& manifest, const Run& run) {
  const auto& s = manifest.at("settings");
  const int L = s.at("L");
  const bool do_compare = s.at("compare"), do_exact = s.at("exact");
  const double exact_tol = s.at("exact_tol");
  if (!do_compare && !do_exact) throw UsageError("oracle needs --compare and/or --exact");
  if (L < 1) throw UsageError("--L must be positive");
  auto model = load_model(manifest);
  const auto stats = statistics_of(model.get());

  json doc = document(manifest);
  doc["statistics"] = name_of(stats);
  bool pass = true;
  if (do_compare) {
    qcrit_compare c{};
    check(qcrit_oracle_compare(model.get(), L, run.jobs, &c));
    doc["compare"] = {{"max_deviation", c.max_deviation},
                      {"r_checked", c.r_checked},
                      {"tolerance", c.tolerance},
                      {"dense_residual", c.dense_residual},
                      {"dense_physical", c.dense_physical != 0},
                      {"pass", c.pass && c.dense_physical}};
    pass = pass && c.pass && c.dense_physical;
  }
  if (do_exact) {
    qcrit_exact e{};
    check(qcrit_oracle_exact(model.get(), L, s.at("fock_cutoff"), 1, &e, nullptr));
    const bool ok = e.exact_vs_dense <= exact_tol && e.kernel_dim == 1 && e.physical;
    doc["exact"] = {{"L", e.L},
                    {"hilbert_dim", e.hilbert_dim},
                    {"kernel_dim", e.kernel_dim},
                    {"residual", e.residual},
                    {"exact_vs_dense", e.exact_vs_dense},
                    {"tolerance", exact_tol},
                    {"physical", e.physical != 0},
                    {"pass", ok}};
    if (stats == QCRIT_BOSON) {
      doc["exact"]["fock_cutoff"] = e.fock_cutoff;
      doc["exact"]["cutoff_delta"] = e.cutoff_delta;
    }
    pass = pass && ok;
    if (stats == QCRIT_FERMION) {
      qcrit_sign_control sc{};
      check(qcrit_oracle_sign_control(model.get(), L, s.at("seed").get<unsigned long>(), &sc));
      const bool discriminates = sc.rate_adopted <= exact_tol && sc.steady_adopted <= exact_tol &&
                                 sc.rate_flipped > 1e3 * exact_tol && sc.steady_flipped > 1e3 * exact_tol;
      doc["sign_control"] = {{"rate_adopted", sc.rate_adopted},
                             {"rate_flipped", sc.rate_flipped},
                             {"steady_adopted", sc.steady_adopted},
                             {"steady_flipped", sc.steady_flipped},
                             {"discriminates", discriminates}};
      pass = pass && discriminates;
    }
  }
  doc["pass"] = pass;
  write_outputs(run, manifest, {{"oracle.json", qcli::dump_document(doc)}});
  if (!pass) std::cerr << "oracle: agreement check failed\n";
  return pass ? kOk : kInvariant;
}

int run_evolve(const json& manifest, const Run& run) {
  const auto& s = manifest.at("settings");
  const double T = s.at("time");
  const int steps = s.at("steps");
  const int grid = s.at("grid");
  if (!is_pow2(grid) || grid < 256) throw UsageError("--grid must be a power of two >= 256");
  if (steps < 1 || !(T >= 0)) throw UsageError("-T must be >= 0 and --steps >= 1");
  auto model = load_model(manifest);

  qcrit_symbol* raw = nullptr;
  check(qcrit_symbol_zero(model.get(), grid, &raw));
  Symbol zero(raw);
  check(qcrit_evolve_symbol(zero.get(), T, steps, run.jobs, &raw));
  Symbol evolved(raw);
  check(qcrit_covariance_symbol(model.get(), grid, run.jobs, &raw));
  Symbol steady(raw);

  double distance = 0.0;
  for (size_t i = 0; i < static_cast<size_t>(grid); ++i) {
    double a[8], b[8];
    int fa = 0, fb = 0;
    check(qcrit_symbol_get(evolved.get(), i, nullptr, a, &fa));
    check(qcrit_symbol_get(steady.get(), i, nullptr, b, &fb));
    if (fb) continue;
    for (int k = 0; k < 8; ++k) distance = std::max(distance, std::abs(a[k] - b[k]));
  }
  double rate = 0.0;
  check(qcrit_min_drift_rate(model.get(), &rate));

  json doc = document(manifest);
  doc["time"] = T;
  doc["steps"] = steps;
  doc["distance_to_steady"] = distance;
  doc["min_drift_rate"] = rate;
  write_outputs(run, manifest,
                {{"evolve_symbol.csv", symbol_csv(manifest, evolved.get())},
                 {"evolve.json", qcli::dump_document(doc)}});
  return kOk;
}

int dispatch(const json& manifest, const Run& run) {
  const std::string cmd = manifest.at("command");
  if (cmd == "steady") return run_steady(manifest, run);
  if (cmd == "sweep") return run_sweep(manifest, run);
  if (cmd == "poles") return run_poles(manifest, run);
  if (cmd == "negativity") return run_negativity(manifest, run);
  if (cmd == "oracle") return run_oracle(manifest, run);
  if (cmd == "evolve") return run_evolve(manifest, run);
  throw UsageError("manifest names unknown command '" + cmd + "'");
}

std::vector<std::string> outputs_for(const std::string& cmd) {
  if (cmd == "steady") return {"symbol.csv", "correlations.csv", "steady.json"};
  if (cmd == "sweep") return {"sweep.csv", "sweep_fit.json"};
  if (cmd == "poles") return {"poles.csv", "poles.json"};
  if (cmd == "negativity") return {"negativity.csv", "negativity.json"};
  if (cmd == "oracle") return {"oracle.json"};
  return {"evolve_symbol.csv", "evolve.json"};
}

void parse_range(const std::string& text, double& lo, double& hi, int& count) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ':')) parts.push_back(trim(p));
  if (parts.size() != 3) throw UsageError("--range expects lo:hi:n");
  lo = parse_double(parts[0], "range lo");
  hi = parse_double(parts[1], "range hi");
  count = parse_int(parts[2], "range n");
  if (count < 1) throw UsageError("--range is empty (n must be >= 1)");
  if (count > 1 && !(hi != lo)) throw UsageError("--range is empty (lo == hi)");
}

void parse_block(const std::string& text, int& lo, int& hi) {
  const auto dots = text.find("..");
  if (dots == std::string::npos) throw UsageError("--block expects lo..hi");
  lo = parse_int(trim(text.substr(0, dots)), "block lo");
  hi = parse_int(trim(text.substr(dots + 2)), "block hi");
}

int model_list() {
  json out = json::array();
  for (const auto& p : presets()) {
    json d;
    for (const auto& [k, v] : p.defaults) d[k] = v;
    out.push_back({{"name", p.name}, {"statistics", p.statistics}, {"defaults", d}, {"noise", p.noise},
                   {"noise_kinds", p.noise_kinds}});
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int model_validate(const SourceArgs& src) {
  const json resolved = resolve_source(src);
  qcrit_model* raw = nullptr;
  check(qcrit_model_from_json(resolved.at("model").dump().c_str(), &raw));
  Model m(raw);
  char* report = nullptr;
  const auto st = qcrit_model_validate(m.get(), &report);
  std::cout << take_string(report) << "\n";
  if (st == QCRIT_E_VALIDATION) return kInvariant;
  check(st);
  return kOk;
}

int model_show(const SourceArgs& src) {
  std::cout << resolve_source(src).at("model").dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qcrit: steady states, criticality and entanglement of quasi-free open lattice models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qcrit_version()));

  SourceArgs src;
  std::string out_dir = ".";
  int jobs = 0;
  int grid = 0, r_max = 0;
  double im_cap = 5.0;
  std::string param = "g", range, block = "2..10", manifest_path;
  std::optional<double> gc_hint, ref_lambda;
  bool no_tail = false, compare = false, exact = false;
  int chain_length = 40, L = 0, fock_cutoff = 8, steps = 1000;
  double T = 10.0;

  auto add_source = [&](CLI::App* c) {
    c->add_option("--preset", src.preset, "Built-in model: xy-fermion or boson-hopping");
    c->add_option("--config", src.config, "Model JSON file");
    c->add_option("--set", src.set, "Parameter overrides k=v,... (noise=<kind> for presets); beats --config")
        ->allow_extra_args(false);
  };
  auto add_run = [&](CLI::App* c) {
    c->add_option("--out", out_dir, "Output directory")->capture_default_str();
    c->add_option("--jobs", jobs, "Worker threads (0: hardware)")->envname("QCRIT_JOBS");
  };

  auto* steady = app.add_subcommand("steady", "Covariance symbol, correlations and invariant checks");
  add_source(steady);
  add_run(steady);
  steady->add_option("--grid", grid, "Momentum grid N (power of two >= 256; default 1024)");
  steady->add_option("--rmax", r_max, "Largest correlation offset (default 64)");

  auto* sweep = app.add_subcommand("sweep", "Correlation length sweep, exponent fit and slowing down");
  add_source(sweep);
  add_run(sweep);
  sweep->add_option("--param", param, "Swept parameter")->capture_default_str();
  sweep->add_option("--range", range, "lo:hi:n")->required();
  sweep->add_option("--gc-hint", gc_hint, "Critical point guess (default 0)");
  sweep->add_option("--im-cap", im_cap, "Pole search strip half-width")->capture_default_str();
  sweep->add_option("--ref-lambda", ref_lambda, "Reference exponent to compare against");
  sweep->add_option("--grid", grid, "Tail-fit grid (0: automatic)");
  sweep->add_option("--rmax", r_max, "Tail-fit r_max (0: automatic)");
  sweep->add_flag("--no-tail-fit", no_tail, "Pole route only");

  auto* poles = app.add_subcommand("poles", "Poles of the covariance symbol in a strip");
  add_source(poles);
  add_run(poles);
  poles->add_option("--im-cap", im_cap, "Strip half-width")->capture_default_str();

  auto* neg = app.add_subcommand("negativity", "Logarithmic negativity of centered blocks (bosons)");
  add_source(neg);
  add_run(neg);
  neg->add_option("--chain-length", chain_length, "Restriction size")->capture_default_str();
  neg->add_option("--block", block, "Block sizes lo..hi")->capture_default_str();

  auto* oracle = app.add_subcommand("oracle", "Cross-checks against dense and exact finite rings");
  add_source(oracle);
  add_run(oracle);
  oracle->add_option("--L", L, "Ring length")->required();
  oracle->add_flag("--compare", compare, "Symbol route vs dense Lyapunov route");
  oracle->add_flag("--exact", exact, "Exact master equation vs dense route");
  oracle->add_option("--fock-cutoff", fock_cutoff, "Bosonic Fock cutoff per site")->capture_default_str();

  auto* evolve = app.add_subcommand("evolve", "Relaxation of the covariance symbol from zero");
  add_source(evolve);
  add_run(evolve);
  evolve->add_option("-T,--time", T, "Final time")->capture_default_str();
  evolve->add_option("--steps", steps, "RK4 steps")->capture_default_str();
  evolve->add_option("--grid", grid, "Momentum grid N (default 256)");

  auto* model = app.add_subcommand("model", "Model presets and validation");
  model->require_subcommand(1);
  auto* mlist = model->add_subcommand("list", "List presets and defaults");
  auto* mval = model->add_subcommand("validate", "Validate a model source");
  add_source(mval);
  auto* mshow = model->add_subcommand("show", "Print the resolved model JSON");
  add_source(mshow);

  auto* rerun = app.add_subcommand("rerun", "Re-run a recorded manifest");
  rerun->add_option("--manifest", manifest_path, "manifest.json or any emitted JSON file")->required();
  add_run(rerun);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Run run{out_dir, jobs};
    if (*mlist) return model_list();
    if (*mval) return model_validate(src);
    if (*mshow) return model_show(src);

    if (*rerun) {
      std::ifstream in(manifest_path, std::ios::binary);
      if (!in) throw UsageError("cannot read manifest '" + manifest_path + "'");
      json doc;
      try {
        doc = json::parse(in);
      } catch (const json::exception& e) {
        throw UsageError(std::string("manifest is not valid JSON: ") + e.what());
      }
      const json m = doc.contains("manifest") ? doc.at("manifest") : doc;
      return dispatch(m, run);
    }

    std::string cmd;
    json settings;
    if (*steady) {
      cmd = "steady";
      settings = {{"grid", grid ? grid : 1024},
                  {"r_max", r_max ? r_max : 64},
                  {"residual_tol", 1e-8},
                  {"imag_tol", 1e-10},
                  {"positivity_tol", 1e-8}};
    } else if (*sweep) {
      cmd = "sweep";
      double lo, hi;
      int count;
      parse_range(range, lo, hi, count);
      settings = {{"param", param},         {"lo", lo},
                  {"hi", hi},               {"count", count},
                  {"gc_hint", gc_hint.value_or(0.0)},
                  {"reference_lambda", ref_lambda ? json(*ref_lambda) : json(nullptr)},
                  {"im_cap", im_cap},       {"grid", grid},
                  {"r_max", r_max},         {"tail_fit", !no_tail}};
    } else if (*poles) {
      cmd = "poles";
      settings = {{"im_cap", im_cap}};
    } else if (*neg) {
      cmd = "negativity";
      int lo, hi;
      parse_block(block, lo, hi);
      settings = {{"chain_length", chain_length}, {"block_lo", lo}, {"block_hi", hi}, {"dark_tol", 1e-8}};
    } else if (*oracle) {
      cmd = "oracle";
      settings = {{"L", L},
                  {"compare", compare},
                  {"exact", exact},
                  {"fock_cutoff", fock_cutoff},
                  {"exact_tol", 1e-9},
                  {"seed", 7}};
    } else if (*evolve) {
      cmd = "evolve";
      settings = {{"time", T}, {"steps", steps}, {"grid", grid ? grid : 256}};
    }
    const json manifest = make_manifest(cmd, resolve_source(src), settings, outputs_for(cmd));
    return dispatch(manifest, run);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ApiError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_for(e.status);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvariant;
  }
}
