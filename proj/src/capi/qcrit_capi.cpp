#include "qcrit/qcrit.h"

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/criticality.hpp"
#include "core/entanglement.hpp"
#include "core/error.hpp"
#include "core/model_io.hpp"
#include "core/oracle.hpp"

struct qcrit_model {
  qcrit::ModelSpec spec;
  std::vector<std::string> names;  // cache behind qcrit_model_param_name
};

struct qcrit_symbol {
  qcrit::CovarianceSymbol value;
};

struct qcrit_field {
  qcrit::CovarianceField value;
};

namespace {

thread_local std::string g_last_error;

template <class F>
qcrit_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return QCRIT_OK;
  } catch (const qcrit::Error& e) {
    g_last_error = e.what();
    return static_cast<qcrit_status>(static_cast<int>(e.code()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return QCRIT_E_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return QCRIT_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw qcrit::Error(qcrit::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(const qcrit::Mat2& m, double out[8]) {
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out[4 * i + 2 * j] = m(i, j).real();
      out[4 * i + 2 * j + 1] = m(i, j).imag();
    }
}

void put_rowmajor(const qcrit::MatX& m, double* out) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
}

qcrit::MatX get_rowmajor(const double* in, int rows) {
  qcrit::MatX m(rows, rows);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < rows; ++j) m(i, j) = in[i * rows + j];
  return m;
}

qcrit::DriftForcing system_of(const qcrit_model* m) {
  return qcrit::drift_and_forcing(qcrit::evaluate_validated(m->spec));
}

qcrit::LengthOptions length_options(const qcrit_length_options* o) {
  qcrit::LengthOptions out;
  if (!o) return out;
  if (o->im_cap > 0) out.im_cap = o->im_cap;
  out.grid = o->grid;
  out.r_max = o->r_max;
  out.jobs = o->jobs;
  out.tail_fit = o->tail_fit != 0;
  return out;
}

qcrit_pole to_c(const qcrit::PoleReport& p) {
  qcrit_pole c{};
  c.phi_re = p.phi_star.real();
  c.phi_im = p.phi_star.imag();
  c.im_abs = p.im_abs;
  c.condition = p.condition == qcrit::PoleCondition::SameBranch ? QCRIT_SAME_BRANCH : QCRIT_CROSS_BRANCH;
  c.branch = p.branch;
  c.residual = p.residual;
  c.multiplicity = p.multiplicity;
  c.removable = p.removable ? 1 : 0;
  c.on_real_axis = p.on_real_axis ? 1 : 0;
  c.residue = p.residue;
  return c;
}

qcrit_negativity to_c(int size, const qcrit::Negativity& n) {
  return {size, n.log_negativity, n.spectral_sum, n.l1_bound, n.chain_holds ? 1 : 0};
}

qcrit_statistics to_c(qcrit::Statistics s) {
  return s == qcrit::Statistics::Boson ? QCRIT_BOSON : QCRIT_FERMION;
}

}  // namespace

extern "C" {

const char* qcrit_version(void) { return QCRIT_VERSION_STRING; }

const char* qcrit_last_error(void) { return g_last_error.c_str(); }

const char* qcrit_status_name(qcrit_status status) {
  if (status == QCRIT_OK) return "OK";
  if (status == QCRIT_E_INTERNAL) return "Internal";
  if (status >= QCRIT_E_INVALID_ARGUMENT && status <= QCRIT_E_STATISTICS_MISMATCH)
    return qcrit::to_string(static_cast<qcrit::ErrorCode>(static_cast<int>(status)));
  return "Unknown";
}

void qcrit_string_free(char* s) { delete[] s; }

qcrit_status qcrit_model_preset(const char* name, qcrit_model** out) {
  return guarded([&] {
    require(name && out, "null argument");
    const std::string n = name;
    if (n == "xy-fermion")
      *out = new qcrit_model{qcrit::preset_xy_fermion(0.5, 0.5), {}};
    else if (n == "boson-hopping")
      *out = new qcrit_model{qcrit::preset_boson_hopping(1.0, 0.5), {}};
    else
      throw qcrit::Error(qcrit::ErrorCode::InvalidArgument,
                         "unknown preset '" + n + "' (expected xy-fermion or boson-hopping)");
  });
}

qcrit_status qcrit_model_add_noise(qcrit_model* model, const char* kind, double eps, double g) {
  return guarded([&] {
    require(model && kind, "null argument");
    const auto k = qcrit::parse_noise_kind(kind, model->spec.statistics);
    model->spec = qcrit::with_noise(model->spec, k, eps, g);
  });
}

qcrit_status qcrit_model_from_json(const char* text, qcrit_model** out) {
  return guarded([&] {
    require(text && out, "null argument");
    *out = new qcrit_model{qcrit::model_from_json(text), {}};
  });
}

qcrit_status qcrit_model_to_json(const qcrit_model* model, char** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = dup_string(qcrit::model_to_json(model->spec));
  });
}

qcrit_status qcrit_model_clone(const qcrit_model* model, qcrit_model** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = new qcrit_model{model->spec, {}};
  });
}

void qcrit_model_free(qcrit_model* model) { delete model; }

qcrit_status qcrit_model_statistics(const qcrit_model* model, qcrit_statistics* out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = to_c(model->spec.statistics);
  });
}

qcrit_status qcrit_model_set_param(qcrit_model* model, const char* name, double value) {
  return guarded([&] {
    require(model && name, "null argument");
    model->spec = qcrit::with_param(model->spec, name, value);
  });
}

qcrit_status qcrit_model_get_param(const qcrit_model* model, const char* name, double* value) {
  return guarded([&] {
    require(model && name && value, "null argument");
    auto it = model->spec.params.find(std::string_view(name));
    if (it == model->spec.params.end())
      throw qcrit::Error(qcrit::ErrorCode::InvalidArgument, std::string("model has no parameter '") + name + "'");
    *value = it->second;
  });
}

qcrit_status qcrit_model_param_count(const qcrit_model* model, size_t* count) {
  return guarded([&] {
    require(model && count, "null argument");
    *count = model->spec.params.size();
  });
}

qcrit_status qcrit_model_param_name(const qcrit_model* model, size_t index, const char** name) {
  return guarded([&] {
    require(model && name, "null argument");
    require(index < model->spec.params.size(), "parameter index out of range");
    auto* m = const_cast<qcrit_model*>(model);
    m->names.clear();
    for (const auto& [k, v] : model->spec.params) m->names.push_back(k);
    *name = m->names[index].c_str();
  });
}

qcrit_status qcrit_model_validate(const qcrit_model* model, char** report_json) {
  bool ok = true;
  const qcrit_status st = guarded([&] {
    require(model, "null argument");
    const auto rep = qcrit::validate(model->spec);
    nlohmann::json j;
    j["ok"] = rep.ok();
    j["checks"] = nlohmann::json::array();
    for (const auto& c : rep.checks)
      j["checks"].push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    if (report_json) *report_json = dup_string(j.dump(2));
    ok = rep.ok();
  });
  if (st != QCRIT_OK) return st;
  if (!ok) {
    g_last_error = "model validation failed";
    return QCRIT_E_VALIDATION;
  }
  return QCRIT_OK;
}

qcrit_status qcrit_symbol_eval(const qcrit_model* model, qcrit_symbol_kind kind, double phi_re, double phi_im,
                               double out[8]) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto num = qcrit::evaluate_validated(model->spec);
    const qcrit::cplx phi{phi_re, phi_im};
    switch (kind) {
      case QCRIT_SYMBOL_HAMILTONIAN: put(qcrit::hamiltonian_symbol(num)(phi), out); break;
      case QCRIT_SYMBOL_BATH: put(qcrit::bath_symbol(num)(phi), out); break;
      case QCRIT_SYMBOL_DRIFT: put(qcrit::drift_and_forcing(num).drift(phi), out); break;
      case QCRIT_SYMBOL_FORCING: put(qcrit::drift_and_forcing(num).forcing(phi), out); break;
      default: throw qcrit::Error(qcrit::ErrorCode::InvalidArgument, "unknown symbol kind");
    }
  });
}

qcrit_status qcrit_drift_eigenvalues(const qcrit_model* model, double phi_re, double phi_im, double out[4]) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto b = qcrit::drift_eigenvalues(system_of(model).drift, {phi_re, phi_im});
    out[0] = b[0].real();
    out[1] = b[0].imag();
    out[2] = b[1].real();
    out[3] = b[1].imag();
  });
}

qcrit_status qcrit_covariance_symbol(const qcrit_model* model, int grid, int jobs, qcrit_symbol** out) {
  return guarded([&] {
    require(model && out, "null argument");
    *out = new qcrit_symbol{qcrit::covariance_symbol(system_of(model), grid, jobs)};
  });
}

qcrit_status qcrit_symbol_zero(const qcrit_model* model, int grid, qcrit_symbol** out) {
  return guarded([&] {
    require(model && out, "null argument");
    require(grid >= 1, "grid must be positive");
    *out = new qcrit_symbol{qcrit::zero_symbol(system_of(model), grid)};
  });
}

qcrit_status qcrit_evolve_symbol(const qcrit_symbol* initial, double time, int steps, int jobs, qcrit_symbol** out) {
  return guarded([&] {
    require(initial && out, "null argument");
    *out = new qcrit_symbol{qcrit::evolve_symbol(initial->value, time, steps, jobs)};
  });
}

qcrit_status qcrit_symbol_size(const qcrit_symbol* symbol, size_t* size) {
  return guarded([&] {
    require(symbol && size, "null argument");
    *size = symbol->value.size();
  });
}

qcrit_status qcrit_symbol_get(const qcrit_symbol* symbol, size_t index, double* phi, double value[8], int* flagged) {
  return guarded([&] {
    require(symbol, "null argument");
    require(index < symbol->value.size(), "symbol index out of range");
    if (phi) *phi = symbol->value.phi[index];
    if (value) put(symbol->value.values[index], value);
    if (flagged) *flagged = symbol->value.flagged[index] ? 1 : 0;
  });
}

qcrit_status qcrit_symbol_max_residual(const qcrit_symbol* symbol, double* residual) {
  return guarded([&] {
    require(symbol && residual, "null argument");
    *residual = symbol->value.max_residual;
  });
}

void qcrit_symbol_free(qcrit_symbol* symbol) { delete symbol; }

qcrit_status qcrit_correlations(const qcrit_symbol* symbol, int r_max, qcrit_field** out) {
  return guarded([&] {
    require(symbol && out, "null argument");
    *out = new qcrit_field{qcrit::correlations(symbol->value, r_max)};
  });
}

qcrit_status qcrit_field_info_get(const qcrit_field* field, qcrit_field_info* info) {
  return guarded([&] {
    require(field && info, "null argument");
    const auto& f = field->value;
    *info = {to_c(f.statistics), f.grid_size, f.r_max, f.max_imag, f.refined_cells, f.aliasing_guard ? 1 : 0};
  });
}

qcrit_status qcrit_field_block(const qcrit_field* field, int r, double out[4]) {
  return guarded([&] {
    require(field && out, "null argument");
    require(std::abs(r) <= field->value.r_max, "offset beyond r_max");
    const auto& b = field->value.at(r);
    out[0] = b(0, 0);
    out[1] = b(0, 1);
    out[2] = b(1, 0);
    out[3] = b(1, 1);
  });
}

void qcrit_field_free(qcrit_field* field) { delete field; }

qcrit_status qcrit_find_poles(const qcrit_model* model, double im_cap, qcrit_pole* poles, size_t capacity,
                              size_t* count, int* flags) {
  if (count) *count = 0;
  if (flags) *flags = 0;
  return guarded([&] {
    require(model && count, "null argument");
    const auto search = qcrit::find_poles(system_of(model), im_cap);
    *count = search.poles.size();
    for (size_t i = 0; i < std::min(capacity, search.poles.size()); ++i) poles[i] = to_c(search.poles[i]);
    if (flags) *flags = (search.ambiguous ? QCRIT_POLES_AMBIGUOUS : 0) | (search.critical ? QCRIT_POLES_CRITICAL : 0);
  });
}

qcrit_status qcrit_correlation_length(const qcrit_model* model, const qcrit_length_options* options,
                                      qcrit_length* out) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto cl = qcrit::correlation_length(system_of(model), length_options(options));
    qcrit_length l{};
    l.xi_inv = cl.xi_inv;
    l.source = cl.source == qcrit::LengthSource::Pole ? QCRIT_LENGTH_POLE : QCRIT_LENGTH_TAIL_FIT;
    l.has_pole = cl.pole ? 1 : 0;
    if (cl.pole) l.pole = to_c(*cl.pole);
    l.tail_available = cl.tail.available ? 1 : 0;
    l.tail_xi_inv = cl.tail.xi_inv;
    l.tail_amplitude = cl.tail.amplitude;
    l.tail_r_lo = cl.tail.r_lo;
    l.tail_r_hi = cl.tail.r_hi;
    l.agreement = cl.agreement;
    l.grid = cl.grid;
    l.r_max = cl.r_max;
    *out = l;
  });
}

qcrit_status qcrit_sweep_xi(const qcrit_model* model, const char* param, const double* grid, size_t count,
                            const qcrit_length_options* options, double* xi_inv) {
  return guarded([&] {
    require(model && param && grid && xi_inv, "null argument");
    const auto s = qcrit::sweep_correlation_length(model->spec, param, std::vector<double>(grid, grid + count),
                                                   length_options(options));
    for (size_t i = 0; i < count; ++i) xi_inv[i] = s[i].xi_inv;
  });
}

qcrit_status qcrit_exponent_fit(const double* g, const double* xi_inv, size_t count, double g_c_hint,
                                double reference_lambda, qcrit_sweep_fit* out) {
  return guarded([&] {
    require(g && xi_inv && out, "null argument");
    std::vector<qcrit::SweepSample> samples;
    for (size_t i = 0; i < count; ++i) samples.push_back({g[i], xi_inv[i]});
    std::optional<double> ref;
    if (!std::isnan(reference_lambda)) ref = reference_lambda;
    const auto fit = qcrit::exponent_fit(samples, g_c_hint, ref);
    *out = {fit.g_c,      fit.lambda,    fit.Lambda, fit.residual, fit.window_lo, fit.window_hi,
            ref ? 1 : 0, ref.value_or(std::nan("")), fit.reference_discrepant ? 1 : 0};
  });
}

qcrit_status qcrit_min_drift_rate(const qcrit_model* model, double* rate) {
  return guarded([&] {
    require(model && rate, "null argument");
    *rate = qcrit::min_drift_rate(system_of(model));
  });
}

qcrit_status qcrit_slowing_down(const qcrit_model* model, const char* param, const double* grid, size_t count,
                                const qcrit_length_options* options, double* tau, double* xi, double* inf_ratio,
                                double* sup_ratio) {
  return guarded([&] {
    require(model && param && grid, "null argument");
    const auto rep = qcrit::slowing_down_check(model->spec, param, std::vector<double>(grid, grid + count),
                                               length_options(options));
    for (size_t i = 0; i < count; ++i) {
      if (tau) tau[i] = rep.points[i].tau;
      if (xi) xi[i] = rep.points[i].xi;
    }
    if (inf_ratio) *inf_ratio = rep.inf_ratio;
    if (sup_ratio) *sup_ratio = rep.sup_ratio;
  });
}

qcrit_status qcrit_symbol_at_real_pole(const qcrit_model* model, double phi, double out[8]) {
  return guarded([&] {
    require(model && out, "null argument");
    put(qcrit::symbol_at_real_pole(system_of(model), phi), out);
  });
}

qcrit_status qcrit_field_restriction(const qcrit_field* field, int n, double* out) {
  return guarded([&] {
    require(field && out, "null argument");
    put_rowmajor(qcrit::assemble_restriction(field->value, n), out);
  });
}

qcrit_status qcrit_field_positivity(const qcrit_field* field, int n, int* ok, double* margin) {
  return guarded([&] {
    require(field, "null argument");
    const auto c = qcrit::check_positivity(qcrit::assemble_restriction(field->value, n), field->value.statistics);
    if (ok) *ok = c.ok ? 1 : 0;
    if (margin) *margin = c.margin;
  });
}

qcrit_status qcrit_symplectic_spectrum(const double* gamma, int n, double* out) {
  return guarded([&] {
    require(gamma && out && n > 0, "invalid argument");
    const auto s = qcrit::symplectic_spectrum(get_rowmajor(gamma, 2 * n));
    for (size_t i = 0; i < s.size(); ++i) out[i] = s[i];
  });
}

qcrit_status qcrit_is_dark_state(const qcrit_field* field, int n, double tol, int* pure, double* deviation) {
  return guarded([&] {
    require(field, "null argument");
    const auto d = qcrit::is_dark_state(field->value, n, tol > 0 ? tol : 1e-6);
    if (pure) *pure = d.pure ? 1 : 0;
    if (deviation) *deviation = d.deviation;
  });
}

qcrit_status qcrit_log_negativity(const double* gamma, int n, int begin, int end, qcrit_negativity* out) {
  return guarded([&] {
    require(gamma && out && n > 0, "invalid argument");
    const qcrit::BlockPartition part{n, begin, end};
    *out = to_c(part.size(), qcrit::log_negativity(get_rowmajor(gamma, 2 * n), part));
  });
}

qcrit_status qcrit_area_law_scan(const qcrit_model* model, int n, const int* sizes, size_t count, int jobs,
                                 qcrit_negativity* out) {
  return guarded([&] {
    require(model && sizes && out, "null argument");
    const auto scan = qcrit::area_law_scan(qcrit::evaluate_validated(model->spec), n,
                                           std::vector<int>(sizes, sizes + count), jobs);
    for (size_t i = 0; i < count; ++i) out[i] = to_c(scan.rows[i].block_size, scan.rows[i].value);
  });
}

qcrit_status qcrit_oracle_compare(const qcrit_model* model, int L, int jobs, qcrit_compare* out) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto num = qcrit::evaluate_validated(model->spec);
    const auto ring = qcrit::build_ring(num, L);
    const auto dense = qcrit::dense_lyapunov(ring);
    const auto field = qcrit::correlations(qcrit::covariance_symbol(num, L, jobs), L / 4);
    const auto rep = qcrit::compare(field, dense.gamma, ring.statistics);
    *out = {rep.max_deviation, rep.r_checked, rep.tolerance, rep.pass ? 1 : 0, dense.residual, dense.physical ? 1 : 0};
  });
}

qcrit_status qcrit_oracle_dense(const qcrit_model* model, int L, double* gamma_out, double* residual, int* physical) {
  return guarded([&] {
    require(model, "null argument");
    const auto sol = qcrit::dense_lyapunov(qcrit::build_ring(qcrit::evaluate_validated(model->spec), L));
    if (gamma_out) put_rowmajor(sol.gamma, gamma_out);
    if (residual) *residual = sol.residual;
    if (physical) *physical = sol.physical ? 1 : 0;
  });
}

qcrit_status qcrit_oracle_exact(const qcrit_model* model, int L, int fock_cutoff, int convergence_check,
                                qcrit_exact* out, double* gamma_out) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto num = qcrit::evaluate_validated(model->spec);
    qcrit::ExactOptions opt;
    if (fock_cutoff > 0) opt.fock_cutoff = fock_cutoff;
    opt.convergence_check = convergence_check != 0;
    const auto ex = qcrit::exact_master_equation(num, L, opt);
    const auto dense = qcrit::dense_lyapunov(qcrit::build_ring(num, L));
    qcrit_exact e{};
    e.L = ex.L;
    e.hilbert_dim = ex.hilbert_dim;
    e.kernel_dim = ex.kernel_dim;
    e.residual = ex.residual;
    e.exact_vs_dense = (ex.covariance - dense.gamma).cwiseAbs().maxCoeff();
    e.fock_cutoff = ex.fock_cutoff;
    e.cutoff_delta = ex.cutoff_delta;
    e.physical = qcrit::check_positivity(ex.covariance, ex.statistics).ok ? 1 : 0;
    *out = e;
    if (gamma_out) put_rowmajor(ex.covariance, gamma_out);
  });
}

qcrit_status qcrit_oracle_sign_control(const qcrit_model* model, int L, unsigned long seed, qcrit_sign_control* out) {
  return guarded([&] {
    require(model && out, "null argument");
    const auto num = qcrit::evaluate_validated(model->spec);
    const auto ring = qcrit::build_ring(num, L);
    const auto probe = qcrit::exact_covariance_rate(num, L, seed);
    const qcrit::MatX adopted = qcrit::covariance_rate(ring, probe.covariance);
    const auto ex = qcrit::exact_master_equation(num, L);
    out->rate_adopted = (probe.exact_rate - adopted).cwiseAbs().maxCoeff();
    out->rate_flipped = (probe.exact_rate + adopted).cwiseAbs().maxCoeff();
    out->steady_adopted = (ex.covariance - qcrit::dense_lyapunov(ring, 1.0).gamma).cwiseAbs().maxCoeff();
    out->steady_flipped = (ex.covariance - qcrit::dense_lyapunov(ring, -1.0).gamma).cwiseAbs().maxCoeff();
  });
}

}  // extern "C"
