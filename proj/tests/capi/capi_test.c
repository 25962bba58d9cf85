/* Exercises the C interface end to end: handles, status codes, error messages. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include <qcrit/qcrit.h>

static int failures = 0;
static int checks = 0;

#define CHECK(cond)                                                   \
  do {                                                                \
    ++checks;                                                         \
    if (!(cond)) {                                                    \
      ++failures;                                                     \
      fprintf(stderr, "%s:%d: CHECK(%s) failed\n", __FILE__, __LINE__, #cond); \
    }                                                                 \
  } while (0)

#define CHECK_OK(call)                                                                    \
  do {                                                                                    \
    qcrit_status s_ = (call);                                                             \
    ++checks;                                                                             \
    if (s_ != QCRIT_OK) {                                                                 \
      ++failures;                                                                         \
      fprintf(stderr, "%s:%d: %s -> %s: %s\n", __FILE__, __LINE__, #call, qcrit_status_name(s_), \
              qcrit_last_error());                                                        \
    }                                                                                     \
  } while (0)

static const double kPi = 3.14159265358979323846;

static qcrit_model* two_site(double g) {
  qcrit_model* m = NULL;
  CHECK_OK(qcrit_model_preset("xy-fermion", &m));
  CHECK_OK(qcrit_model_add_noise(m, "two-site", 1.0, g));
  return m;
}

static qcrit_model* boson(double g, double v) {
  qcrit_model* m = NULL;
  CHECK_OK(qcrit_model_preset("boson-hopping", &m));
  CHECK_OK(qcrit_model_set_param(m, "v", v));
  CHECK_OK(qcrit_model_add_noise(m, "on-site", 1.0, g));
  return m;
}

static void test_models(void) {
  qcrit_model* m = NULL;
  CHECK(strlen(qcrit_version()) > 0);
  CHECK(qcrit_model_preset("ising", &m) == QCRIT_E_INVALID_ARGUMENT);
  CHECK(m == NULL);
  CHECK(strlen(qcrit_last_error()) > 0);
  CHECK(strcmp(qcrit_status_name(QCRIT_E_UNSTABLE), "Unstable") == 0);

  m = two_site(0.4);
  qcrit_statistics st;
  CHECK_OK(qcrit_model_statistics(m, &st));
  CHECK(st == QCRIT_FERMION);
  CHECK(strlen(qcrit_last_error()) == 0);

  size_t count = 0;
  CHECK_OK(qcrit_model_param_count(m, &count));
  CHECK(count == 4);
  int seen_g = 0;
  for (size_t i = 0; i < count; ++i) {
    const char* name = NULL;
    CHECK_OK(qcrit_model_param_name(m, i, &name));
    if (name && strcmp(name, "g") == 0) seen_g = 1;
  }
  CHECK(seen_g);
  CHECK(qcrit_model_param_name(m, count, &(const char*){NULL}) == QCRIT_E_INVALID_ARGUMENT);

  double value = 0.0;
  CHECK_OK(qcrit_model_set_param(m, "g", 0.9));
  CHECK_OK(qcrit_model_get_param(m, "g", &value));
  CHECK(value == 0.9);
  CHECK(qcrit_model_set_param(m, "kappa", 1.0) == QCRIT_E_INVALID_ARGUMENT);
  CHECK(strstr(qcrit_last_error(), "kappa") != NULL);

  char* report = NULL;
  CHECK_OK(qcrit_model_validate(m, &report));
  CHECK(report && strstr(report, "\"ok\": true") != NULL);
  qcrit_string_free(report);

  char* text = NULL;
  CHECK_OK(qcrit_model_to_json(m, &text));
  qcrit_model* back = NULL;
  CHECK_OK(qcrit_model_from_json(text, &back));
  char* again = NULL;
  CHECK_OK(qcrit_model_to_json(back, &again));
  CHECK(text && again && strcmp(text, again) == 0);
  qcrit_string_free(text);
  qcrit_string_free(again);

  qcrit_model* copy = NULL;
  CHECK_OK(qcrit_model_clone(back, &copy));
  CHECK_OK(qcrit_model_set_param(copy, "g", 0.1));
  CHECK_OK(qcrit_model_get_param(back, "g", &value));
  CHECK(value == 0.9);

  qcrit_model* bad = NULL;
  CHECK(qcrit_model_from_json("{\"statistics\": \"anyon\"}", &bad) == QCRIT_E_PARSE);
  CHECK(qcrit_model_from_json("{not json", &bad) == QCRIT_E_PARSE);
  CHECK(bad == NULL);
  CHECK(qcrit_model_add_noise(m, "two-site-boson", 1.0, 0.0) == QCRIT_E_INVALID_ARGUMENT);

  qcrit_model* unbound = NULL;
  CHECK_OK(qcrit_model_from_json(
      "{\"statistics\": \"boson\", \"hamiltonian\": {\"0\": {\"re\": [[\"kappa\", 0], [0, \"kappa\"]]}}}", &unbound));
  report = NULL;
  CHECK(qcrit_model_validate(unbound, &report) == QCRIT_E_VALIDATION);
  CHECK(report && strstr(report, "parameter-binding") != NULL);
  qcrit_string_free(report);
  qcrit_symbol* sym = NULL;
  CHECK(qcrit_covariance_symbol(unbound, 64, 1, &sym) == QCRIT_E_VALIDATION);

  CHECK(qcrit_model_statistics(NULL, &st) == QCRIT_E_INVALID_ARGUMENT);
  CHECK(qcrit_model_preset("xy-fermion", NULL) == QCRIT_E_INVALID_ARGUMENT);

  qcrit_model_free(unbound);
  qcrit_model_free(copy);
  qcrit_model_free(back);
  qcrit_model_free(m);
  qcrit_model_free(NULL);
  qcrit_string_free(NULL);
}

static void test_symbols(void) {
  qcrit_model* m = NULL;
  CHECK_OK(qcrit_model_preset("xy-fermion", &m));
  CHECK_OK(qcrit_model_set_param(m, "B", 2.0));
  CHECK_OK(qcrit_model_set_param(m, "Gamma", 1.0));
  double h[8];
  CHECK_OK(qcrit_symbol_eval(m, QCRIT_SYMBOL_HAMILTONIAN, kPi, 0.0, h));
  /* 1.5 sigma_y */
  const double want[8] = {0, 0, 0, -1.5, 0, 1.5, 0, 0};
  double err = 0.0;
  for (int i = 0; i < 8; ++i) err = fmax(err, fabs(h[i] - want[i]));
  CHECK(err < 1e-14);
  qcrit_model_free(m);

  qcrit_model* b = boson(0.7, 0.3);
  double beta[4];
  CHECK_OK(qcrit_drift_eigenvalues(b, 1.0, 0.0, beta));
  CHECK(fabs(beta[0] - 2.0 * sin(0.7)) < 1e-12);
  CHECK(fabs(beta[1] + 4.0 * fabs(0.3 - cos(1.0))) < 1e-12);
  CHECK(fabs(beta[3] - 4.0 * fabs(0.3 - cos(1.0))) < 1e-12);
  CHECK(qcrit_symbol_eval(b, (qcrit_symbol_kind)9, 0.0, 0.0, h) == QCRIT_E_INVALID_ARGUMENT);
  qcrit_model_free(b);
}

static void test_steady(void) {
  qcrit_model* m = two_site(kPi / 2);
  qcrit_symbol* sym = NULL;
  CHECK_OK(qcrit_covariance_symbol(m, 256, 2, &sym));
  size_t size = 0;
  CHECK_OK(qcrit_symbol_size(sym, &size));
  CHECK(size == 256);
  double phi, v[8];
  int flagged;
  CHECK_OK(qcrit_symbol_get(sym, 192, &phi, v, &flagged));
  CHECK(fabs(phi - kPi / 2) < 1e-14);
  CHECK(!flagged);
  CHECK(fabs(v[1] + 1.0) < 1e-12); /* -i on the diagonal */
  CHECK(fabs(v[7] + 1.0) < 1e-12);
  CHECK(qcrit_symbol_get(sym, 256, &phi, v, &flagged) == QCRIT_E_INVALID_ARGUMENT);
  double res = 1.0;
  CHECK_OK(qcrit_symbol_max_residual(sym, &res));
  CHECK(res < 1e-10);

  qcrit_field* field = NULL;
  CHECK_OK(qcrit_correlations(sym, 16, &field));
  qcrit_field_info info;
  CHECK_OK(qcrit_field_info_get(field, &info));
  CHECK(info.statistics == QCRIT_FERMION);
  CHECK(info.r_max == 16);
  CHECK(info.aliasing_guard);
  double blk[4];
  CHECK_OK(qcrit_field_block(field, 1, blk));
  CHECK(fabs(blk[1]) < 1e-13);
  CHECK(qcrit_field_block(field, 17, blk) == QCRIT_E_INVALID_ARGUMENT);

  double* g = malloc(sizeof(double) * 24 * 24);
  CHECK_OK(qcrit_field_restriction(field, 12, g));
  double asym = 0.0;
  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 24; ++j) asym = fmax(asym, fabs(g[i * 24 + j] + g[j * 24 + i]));
  CHECK(asym < 1e-13);
  free(g);
  int ok = 0;
  double margin = -1.0;
  CHECK_OK(qcrit_field_positivity(field, 12, &ok, &margin));
  CHECK(ok);

  int pure = 1;
  double dev = 0.0;
  CHECK_OK(qcrit_is_dark_state(field, 12, 1e-6, &pure, &dev));
  CHECK(!pure);

  qcrit_symbol* zero = NULL;
  qcrit_symbol* late = NULL;
  CHECK_OK(qcrit_symbol_zero(m, 256, &zero));
  CHECK_OK(qcrit_evolve_symbol(zero, 60.0, 6000, 2, &late));
  CHECK_OK(qcrit_symbol_get(late, 192, &phi, v, &flagged));
  CHECK(fabs(v[1] + 1.0) < 1e-6);

  qcrit_symbol_free(late);
  qcrit_symbol_free(zero);
  qcrit_field_free(field);
  qcrit_symbol_free(sym);
  qcrit_field_free(NULL);
  qcrit_symbol_free(NULL);

  qcrit_model* u = boson(-kPi / 2, 0.0);
  CHECK(qcrit_covariance_symbol(u, 128, 1, &sym) == QCRIT_E_UNSTABLE);
  CHECK(strstr(qcrit_last_error(), "Unstable") != NULL);
  qcrit_model_free(u);
  qcrit_model_free(m);

  qcrit_model* bare = NULL;
  CHECK_OK(qcrit_model_preset("xy-fermion", &bare));
  CHECK_OK(qcrit_covariance_symbol(bare, 64, 1, &sym));
  CHECK(qcrit_correlations(sym, 4, &field) == QCRIT_E_SINGULAR);
  qcrit_symbol_free(sym);
  qcrit_model_free(bare);
}

static void test_criticality(void) {
  qcrit_model* m = two_site(kPi / 3);
  qcrit_pole poles[16];
  size_t count = 0;
  int flags = -1;
  CHECK_OK(qcrit_find_poles(m, 5.0, poles, 16, &count, &flags));
  CHECK(count == 6);
  CHECK(flags == 0);
  size_t small = 0;
  CHECK_OK(qcrit_find_poles(m, 5.0, poles, 1, &small, &flags));
  CHECK(small == 6);

  qcrit_length len;
  CHECK_OK(qcrit_correlation_length(m, NULL, &len));
  CHECK(fabs(len.xi_inv - acosh(2.0)) < 1e-9);
  CHECK(len.has_pole);
  CHECK(len.pole.condition == QCRIT_CROSS_BRANCH);
  CHECK(len.pole.multiplicity == 2);

  double grid[30], xi[30];
  for (int k = 0; k < 30; ++k) grid[k] = 0.01 + 0.01 * k;
  CHECK_OK(qcrit_sweep_xi(m, "g", grid, 30, NULL, xi));
  qcrit_sweep_fit fit;
  CHECK_OK(qcrit_exponent_fit(grid, xi, 30, 0.0, 0.5, &fit));
  CHECK(fabs(fit.lambda - 1.0) < 0.03);
  CHECK(fit.has_reference);
  CHECK(fit.reference_discrepant);
  CHECK_OK(qcrit_exponent_fit(grid, xi, 30, 0.0, NAN, &fit));
  CHECK(!fit.has_reference);
  double flat[30];
  for (int k = 0; k < 30; ++k) flat[k] = 1.0;
  CHECK(qcrit_exponent_fit(grid, flat, 30, 0.0, NAN, &fit) == QCRIT_E_FIT_DEGENERATE);
  CHECK(qcrit_sweep_xi(m, "nope", grid, 30, NULL, xi) == QCRIT_E_INVALID_ARGUMENT);

  double tau[8], xs[8], lo = 0.0, hi = 0.0;
  double sd[8];
  for (int k = 0; k < 8; ++k) sd[k] = 0.05 + 0.05 * k;
  CHECK_OK(qcrit_slowing_down(m, "g", sd, 8, NULL, tau, xs, &lo, &hi));
  CHECK(lo > 0.0);
  CHECK(hi >= lo);

  double rate = 0.0;
  qcrit_model* b = boson(0.7, 0.3);
  CHECK_OK(qcrit_min_drift_rate(b, &rate));
  CHECK(fabs(rate - 2.0 * sin(0.7)) < 1e-10);

  qcrit_model* flat_boson = boson(0.7, 1.5);
  CHECK_OK(qcrit_model_set_param(flat_boson, "t", 0.0));
  CHECK(qcrit_find_poles(flat_boson, 5.0, poles, 16, &count, &flags) == QCRIT_E_NO_POLES);
  CHECK(count == 0);

  qcrit_model* crit = two_site(0.0);
  double v[8];
  CHECK_OK(qcrit_symbol_at_real_pole(crit, kPi, v));
  double peak = 0.0;
  for (int i = 0; i < 8; ++i) peak = fmax(peak, fabs(v[i]));
  CHECK(peak <= 1e-10);

  qcrit_model_free(crit);
  qcrit_model_free(flat_boson);
  qcrit_model_free(b);
  qcrit_model_free(m);
}

static void test_entanglement(void) {
  double id[36] = {0};
  for (int i = 0; i < 6; ++i) id[i * 6 + i] = 2.0;
  double s[3];
  CHECK_OK(qcrit_symplectic_spectrum(id, 3, s));
  CHECK(fabs(s[0] - 2.0) < 1e-12 && fabs(s[2] - 2.0) < 1e-12);
  id[0] = -1.0;
  CHECK(qcrit_symplectic_spectrum(id, 3, s) == QCRIT_E_NOT_POSITIVE);
  id[0] = 1.0;
  id[7] = 1.0;
  id[14] = 1.0;
  id[21] = 1.0;
  id[28] = 1.0;
  id[35] = 1.0;
  qcrit_negativity neg;
  CHECK_OK(qcrit_log_negativity(id, 3, 0, 1, &neg));
  CHECK(fabs(neg.log_negativity) < 1e-12);
  CHECK(neg.chain_holds);
  CHECK(qcrit_log_negativity(id, 3, 0, 3, &neg) == QCRIT_E_INVALID_ARGUMENT);

  qcrit_model* b = NULL;
  CHECK_OK(qcrit_model_preset("boson-hopping", &b));
  CHECK_OK(qcrit_model_set_param(b, "v", 1.5));
  CHECK_OK(qcrit_model_add_noise(b, "on-site", 2.0, 1.2));
  int sizes[9];
  qcrit_negativity rows[9];
  for (int k = 0; k < 9; ++k) sizes[k] = 2 + k;
  CHECK_OK(qcrit_area_law_scan(b, 40, sizes, 9, 2, rows));
  double lo = 1e300, hi = 0.0;
  for (int k = 0; k < 9; ++k) {
    CHECK(rows[k].block_size == sizes[k]);
    CHECK(rows[k].chain_holds);
    lo = fmin(lo, rows[k].l1_bound);
    hi = fmax(hi, rows[k].l1_bound);
  }
  CHECK(hi / lo <= 1.2);

  qcrit_model* f = two_site(0.5);
  CHECK(qcrit_area_law_scan(f, 20, sizes, 2, 1, rows) == QCRIT_E_STATISTICS_MISMATCH);
  qcrit_model_free(f);
  qcrit_model_free(b);
}

static void test_oracle(void) {
  qcrit_model* m = two_site(kPi / 3);
  qcrit_compare cmp;
  CHECK_OK(qcrit_oracle_compare(m, 32, 1, &cmp));
  CHECK(cmp.max_deviation <= 1e-10);
  CHECK(cmp.r_checked == 8);
  CHECK(cmp.pass);
  CHECK(cmp.dense_physical);

  double gamma[36];
  double res = 1.0;
  int phys = 0;
  CHECK_OK(qcrit_oracle_dense(m, 3, gamma, &res, &phys));
  CHECK(res < 1e-12);
  CHECK(phys);

  qcrit_exact ex;
  double eg[36];
  CHECK_OK(qcrit_model_set_param(m, "eps", 0.5));
  CHECK_OK(qcrit_model_set_param(m, "g", 0.9));
  CHECK_OK(qcrit_oracle_exact(m, 3, 0, 0, &ex, eg));
  CHECK(ex.hilbert_dim == 8);
  CHECK(ex.kernel_dim == 1);
  CHECK(ex.exact_vs_dense <= 1e-9);
  CHECK(ex.physical);

  qcrit_sign_control sc;
  CHECK_OK(qcrit_oracle_sign_control(m, 3, 7, &sc));
  CHECK(sc.rate_adopted <= 1e-12);
  CHECK(sc.steady_adopted <= 1e-9);
  CHECK(sc.rate_flipped > 1e-3);
  CHECK(sc.steady_flipped > 1e-3);

  CHECK(qcrit_oracle_exact(m, 6, 0, 0, &ex, NULL) == QCRIT_E_INVALID_ARGUMENT);
  CHECK_OK(qcrit_model_set_param(m, "eps", 0.0));
  CHECK(qcrit_oracle_exact(m, 2, 0, 0, &ex, NULL) == QCRIT_E_DEGENERATE_KERNEL);

  qcrit_model* b = boson(0.9, 0.3);
  CHECK_OK(qcrit_oracle_exact(b, 1, 30, 1, &ex, NULL));
  CHECK(ex.fock_cutoff == 30);
  CHECK(ex.exact_vs_dense <= 1e-12);
  CHECK(qcrit_oracle_sign_control(b, 1, 7, &sc) == QCRIT_E_INVALID_ARGUMENT);
  qcrit_model_free(b);
  qcrit_model_free(m);
}

int main(void) {
  test_models();
  test_symbols();
  test_steady();
  test_criticality();
  test_entanglement();
  test_oracle();
  printf("capi: %d checks, %d failures\n", checks, failures);
  return failures == 0 ? 0 : 1;
}
