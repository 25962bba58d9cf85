/* qcrit: steady states, correlation lengths and entanglement of quasi-free
 * open lattice models. C interface over opaque handles; every call returns a
 * qcrit_status and, on failure, leaves a message in qcrit_last_error(). */
#ifndef QCRIT_QCRIT_H
#define QCRIT_QCRIT_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(QCRIT_BUILDING_LIBRARY)
#define QCRIT_API __attribute__((visibility("default")))
#else
#define QCRIT_API
#endif

typedef enum qcrit_status {
  QCRIT_OK = 0,
  QCRIT_E_INVALID_ARGUMENT = 1,
  QCRIT_E_PARSE = 2,
  QCRIT_E_VALIDATION = 3,
  QCRIT_E_SINGULAR = 4,
  QCRIT_E_UNSTABLE = 5,
  QCRIT_E_NO_POLES = 6,
  QCRIT_E_FIT_DEGENERATE = 7,
  QCRIT_E_NOT_POSITIVE = 8,
  QCRIT_E_TAIL_TOO_FAT = 9,
  QCRIT_E_DEGENERATE_KERNEL = 10,
  QCRIT_E_STATISTICS_MISMATCH = 11,
  QCRIT_E_INTERNAL = 100
} qcrit_status;

typedef enum qcrit_statistics { QCRIT_BOSON = 0, QCRIT_FERMION = 1 } qcrit_statistics;

typedef struct qcrit_model qcrit_model;
typedef struct qcrit_symbol qcrit_symbol;
typedef struct qcrit_field qcrit_field;

/* 2x2 complex matrices are exchanged as double[8]:
 * {re00, im00, re01, im01, re10, im10, re11, im11}. Real 2n x 2n matrices are
 * row-major with index nu*n + site. */

QCRIT_API const char* qcrit_version(void);
/* Message of the last failed call on this thread ("" if none). */
QCRIT_API const char* qcrit_last_error(void);
QCRIT_API const char* qcrit_status_name(qcrit_status status);
QCRIT_API void qcrit_string_free(char* s);

/* ---- models ---- */

/* "xy-fermion" (params B, Gamma) or "boson-hopping" (params t, v); no noise. */
QCRIT_API qcrit_status qcrit_model_preset(const char* name, qcrit_model** out);
/* Appends one noise channel: "on-site" or "two-site" (fermions), "on-site" (bosons).
 * Binds parameters eps and g. */
QCRIT_API qcrit_status qcrit_model_add_noise(qcrit_model* model, const char* kind, double eps, double g);
QCRIT_API qcrit_status qcrit_model_from_json(const char* text, qcrit_model** out);
QCRIT_API qcrit_status qcrit_model_to_json(const qcrit_model* model, char** out);
QCRIT_API qcrit_status qcrit_model_clone(const qcrit_model* model, qcrit_model** out);
QCRIT_API void qcrit_model_free(qcrit_model* model);

QCRIT_API qcrit_status qcrit_model_statistics(const qcrit_model* model, qcrit_statistics* out);
/* Fails with QCRIT_E_INVALID_ARGUMENT for unknown names. */
QCRIT_API qcrit_status qcrit_model_set_param(qcrit_model* model, const char* name, double value);
QCRIT_API qcrit_status qcrit_model_get_param(const qcrit_model* model, const char* name, double* value);
QCRIT_API qcrit_status qcrit_model_param_count(const qcrit_model* model, size_t* count);
/* Pointer valid until the model is modified or freed. */
QCRIT_API qcrit_status qcrit_model_param_name(const qcrit_model* model, size_t index, const char** name);
/* JSON report {"ok": bool, "checks": [{name, passed, detail}]}; QCRIT_E_VALIDATION if any check fails. */
QCRIT_API qcrit_status qcrit_model_validate(const qcrit_model* model, char** report_json);

/* ---- symbols ---- */

typedef enum qcrit_symbol_kind {
  QCRIT_SYMBOL_HAMILTONIAN = 0,
  QCRIT_SYMBOL_BATH = 1,
  QCRIT_SYMBOL_DRIFT = 2,
  QCRIT_SYMBOL_FORCING = 3
} qcrit_symbol_kind;

QCRIT_API qcrit_status qcrit_symbol_eval(const qcrit_model* model, qcrit_symbol_kind kind, double phi_re,
                                         double phi_im, double out[8]);
/* beta_1, beta_2 ordered by (Re, Im): {re1, im1, re2, im2}. */
QCRIT_API qcrit_status qcrit_drift_eigenvalues(const qcrit_model* model, double phi_re, double phi_im,
                                               double out[4]);

/* ---- steady state ---- */

QCRIT_API qcrit_status qcrit_covariance_symbol(const qcrit_model* model, int grid, int jobs, qcrit_symbol** out);
/* Zero symbol on the grid; starting point for qcrit_evolve_symbol. */
QCRIT_API qcrit_status qcrit_symbol_zero(const qcrit_model* model, int grid, qcrit_symbol** out);
QCRIT_API qcrit_status qcrit_evolve_symbol(const qcrit_symbol* initial, double time, int steps, int jobs,
                                           qcrit_symbol** out);
QCRIT_API qcrit_status qcrit_symbol_size(const qcrit_symbol* symbol, size_t* size);
QCRIT_API qcrit_status qcrit_symbol_get(const qcrit_symbol* symbol, size_t index, double* phi, double value[8],
                                        int* flagged);
QCRIT_API qcrit_status qcrit_symbol_max_residual(const qcrit_symbol* symbol, double* residual);
QCRIT_API void qcrit_symbol_free(qcrit_symbol* symbol);

typedef struct qcrit_field_info {
  qcrit_statistics statistics;
  int grid_size;
  int r_max;
  double max_imag;
  size_t refined_cells;
  int aliasing_guard; /* grid_size >= 8 r_max */
} qcrit_field_info;

QCRIT_API qcrit_status qcrit_correlations(const qcrit_symbol* symbol, int r_max, qcrit_field** out);
QCRIT_API qcrit_status qcrit_field_info_get(const qcrit_field* field, qcrit_field_info* info);
QCRIT_API qcrit_status qcrit_field_block(const qcrit_field* field, int r, double out[4]);
QCRIT_API void qcrit_field_free(qcrit_field* field);

/* ---- criticality ---- */

typedef enum qcrit_pole_condition { QCRIT_SAME_BRANCH = 0, QCRIT_CROSS_BRANCH = 1 } qcrit_pole_condition;

typedef struct qcrit_pole {
  double phi_re;
  double phi_im;
  double im_abs;
  qcrit_pole_condition condition;
  int branch; /* 1 or 2 for same-branch, 0 otherwise */
  double residual;
  int multiplicity;
  int removable;
  int on_real_axis;
  double residue;
} qcrit_pole;

enum { QCRIT_POLES_AMBIGUOUS = 1, QCRIT_POLES_CRITICAL = 2 };

/* Writes up to `capacity` poles sorted by im_abs; `count` receives the total.
 * QCRIT_E_NO_POLES (count 0) when the strip |Im phi| <= im_cap is empty. */
QCRIT_API qcrit_status qcrit_find_poles(const qcrit_model* model, double im_cap, qcrit_pole* poles,
                                        size_t capacity, size_t* count, int* flags);

typedef struct qcrit_length_options {
  double im_cap; /* <= 0: 5 */
  int grid;      /* 0: automatic */
  int r_max;     /* 0: automatic */
  int jobs;      /* 0: QCRIT_JOBS or hardware */
  int tail_fit;
} qcrit_length_options;

typedef enum qcrit_length_source { QCRIT_LENGTH_POLE = 0, QCRIT_LENGTH_TAIL_FIT = 1 } qcrit_length_source;

typedef struct qcrit_length {
  double xi_inv;
  qcrit_length_source source;
  int has_pole;
  qcrit_pole pole;
  int tail_available;
  double tail_xi_inv;
  double tail_amplitude;
  int tail_r_lo;
  int tail_r_hi;
  double agreement;
  int grid;
  int r_max;
} qcrit_length;

QCRIT_API qcrit_status qcrit_correlation_length(const qcrit_model* model, const qcrit_length_options* options,
                                                qcrit_length* out);
/* xi_inv for each value of `param`; pole route only. */
QCRIT_API qcrit_status qcrit_sweep_xi(const qcrit_model* model, const char* param, const double* grid, size_t count,
                                      const qcrit_length_options* options, double* xi_inv);

typedef struct qcrit_sweep_fit {
  double g_c;
  double lambda;
  double Lambda;
  double residual;
  double window_lo;
  double window_hi;
  int has_reference;
  double reference_lambda;
  int reference_discrepant;
} qcrit_sweep_fit;

/* reference_lambda may be NaN for none. */
QCRIT_API qcrit_status qcrit_exponent_fit(const double* g, const double* xi_inv, size_t count, double g_c_hint,
                                          double reference_lambda, qcrit_sweep_fit* out);
QCRIT_API qcrit_status qcrit_min_drift_rate(const qcrit_model* model, double* rate);
/* tau = 1/min Re eig x(phi), xi from the pole route, per grid value. */
QCRIT_API qcrit_status qcrit_slowing_down(const qcrit_model* model, const char* param, const double* grid,
                                          size_t count, const qcrit_length_options* options, double* tau,
                                          double* xi, double* inf_ratio, double* sup_ratio);
/* Minimum-norm covariance symbol at a real momentum (defined at real poles). */
QCRIT_API qcrit_status qcrit_symbol_at_real_pole(const qcrit_model* model, double phi, double out[8]);

/* ---- entanglement ---- */

typedef struct qcrit_negativity {
  int block_size;
  double log_negativity;
  double spectral_sum;
  double l1_bound;
  int chain_holds;
} qcrit_negativity;

/* out: (2n)^2 doubles. */
QCRIT_API qcrit_status qcrit_field_restriction(const qcrit_field* field, int n, double* out);
/* uncertainty relation on the n-site restriction */
QCRIT_API qcrit_status qcrit_field_positivity(const qcrit_field* field, int n, int* ok, double* margin);
/* gamma: (2n)^2 row-major; out: n values ascending. */
QCRIT_API qcrit_status qcrit_symplectic_spectrum(const double* gamma, int n, double* out);
QCRIT_API qcrit_status qcrit_is_dark_state(const qcrit_field* field, int n, double tol, int* pure,
                                           double* deviation);
/* Region A = sites [begin, end). */
QCRIT_API qcrit_status qcrit_log_negativity(const double* gamma, int n, int begin, int end, qcrit_negativity* out);
/* Centered blocks of each size in an n-site restriction; out has `count` entries. */
QCRIT_API qcrit_status qcrit_area_law_scan(const qcrit_model* model, int n, const int* sizes, size_t count,
                                           int jobs, qcrit_negativity* out);

/* ---- oracle ---- */

typedef struct qcrit_compare {
  double max_deviation;
  int r_checked;
  double tolerance;
  int pass;
  double dense_residual;
  int dense_physical;
} qcrit_compare;

/* Symbol route on an L-point grid against the dense L-site ring. */
QCRIT_API qcrit_status qcrit_oracle_compare(const qcrit_model* model, int L, int jobs, qcrit_compare* out);
/* gamma_out: (2L)^2 doubles or NULL. */
QCRIT_API qcrit_status qcrit_oracle_dense(const qcrit_model* model, int L, double* gamma_out, double* residual,
                                          int* physical);

typedef struct qcrit_exact {
  int L;
  long hilbert_dim;
  int kernel_dim;
  double residual;
  double exact_vs_dense;
  int fock_cutoff;
  double cutoff_delta;
  int physical;
} qcrit_exact;

/* Fermions L <= 5, bosons L <= 2 (fock_cutoff <= 0: 8). gamma_out: (2L)^2 doubles or NULL. */
QCRIT_API qcrit_status qcrit_oracle_exact(const qcrit_model* model, int L, int fock_cutoff, int convergence_check,
                                          qcrit_exact* out, double* gamma_out);

typedef struct qcrit_sign_control {
  double rate_adopted;    /* |exact d(gamma)/dt - (-X^T g - g X + Y)| */
  double rate_flipped;    /* same with the opposite overall sign */
  double steady_adopted;  /* |exact steady gamma - solution of X^T g + g X = Y| */
  double steady_flipped;  /* same with Y -> -Y */
} qcrit_sign_control;

/* Fermions: discriminates the sign of the covariance equation of motion. */
QCRIT_API qcrit_status qcrit_oracle_sign_control(const qcrit_model* model, int L, unsigned long seed,
                                                 qcrit_sign_control* out);

#ifdef __cplusplus
}
#endif

#endif /* QCRIT_QCRIT_H */
