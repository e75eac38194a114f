/* C interface to the ratiosparse library.
 *
 * Every handle is opaque and owned by the caller once returned; release it
 * with the matching *_free function. Functions returning rs_status set a
 * thread-local message readable through rs_last_error() on failure. Strings
 * returned through char** must be released with rs_string_free().
 */
#ifndef RATIOSPARSE_RATIOSPARSE_H
#define RATIOSPARSE_RATIOSPARSE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(RATIOSPARSE_BUILDING_LIBRARY)
#    define RS_API __declspec(dllexport)
#  else
#    define RS_API __declspec(dllimport)
#  endif
#else
#  define RS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rs_status {
  RS_OK = 0,
  RS_ERR_INVALID_ARGUMENT = 1,
  RS_ERR_DOMAIN = 2,
  RS_ERR_INFEASIBLE = 3,
  RS_ERR_IO = 4,
  RS_ERR_PARSE = 5,
  RS_ERR_NOT_APPLICABLE = 6,
  RS_ERR_NOT_CONVERGED = 7,
  RS_ERR_INTERNAL = 8
} rs_status;

typedef struct rs_instance rs_instance;
typedef struct rs_result rs_result;

typedef struct rs_solver_config {
  double beta_prox;
  double rho0;
  double rho_growth;
  double rho_max;
  int outer_max;
  double outer_tol;
  int inner_max;
  double inner_tol;
  int adaptive_beta;
  double time_limit_s;
} rs_solver_config;

RS_API const char* rs_version(void);
RS_API const char* rs_status_string(rs_status status);

/* Message of the last failed call on this thread ("" if none). */
RS_API const char* rs_last_error(void);

RS_API void rs_solver_config_default(rs_solver_config* config);

/* Parses a JSON solver configuration on top of *config. */
RS_API rs_status rs_solver_config_from_json(const char* json, rs_solver_config* config);

/* ---- instances -------------------------------------------------------- */

/* A is m x n in row-major order. x_star may be NULL. */
RS_API rs_status rs_instance_create(size_t m, size_t n, const double* A, const double* b,
                                   const double* x_star, rs_instance** out);
RS_API rs_status rs_instance_load(const char* dir, rs_instance** out);
RS_API rs_status rs_instance_save(const rs_instance* instance, const char* dir);
RS_API void rs_instance_free(rs_instance* instance);
RS_API rs_status rs_instance_dims(const rs_instance* instance, size_t* m, size_t* n);
RS_API int rs_instance_has_ground_truth(const rs_instance* instance);
RS_API rs_status rs_instance_ground_truth(const rs_instance* instance, double* out, size_t len);

/* ---- solver ----------------------------------------------------------- */

/* Minimizes ||x||_p^p / ||x||_q^p subject to A x = b. config and x0 may be
 * NULL (defaults; l1 start). */
RS_API rs_status rs_solve(const rs_instance* instance, double p, double q, const rs_solver_config* config,
                          const double* x0, rs_result** out);
RS_API rs_status rs_l1_baseline(const rs_instance* instance, const rs_solver_config* config, double* out,
                                size_t len);
RS_API rs_status rs_min_norm_feasible(const rs_instance* instance, double* out, size_t len);

RS_API void rs_result_free(rs_result* result);
RS_API size_t rs_result_size(const rs_result* result);
RS_API rs_status rs_result_x(const rs_result* result, double* out, size_t len);
RS_API double rs_result_alpha(const rs_result* result);
RS_API int rs_result_iterations(const rs_result* result);
RS_API int rs_result_converged(const rs_result* result);
/* "gap_tol", "step_tol" or "max_iter"; owned by the result. */
RS_API const char* rs_result_stop_reason(const rs_result* result);
RS_API double rs_result_stationarity(const rs_result* result);
RS_API size_t rs_result_trace_length(const rs_result* result);
/* Ratio values alpha_0 (start), alpha_1, ... */
RS_API rs_status rs_result_alpha_trace(const rs_result* result, double* out, size_t len);

/* Full result as JSON. With an instance carrying ground truth, the JSON also
 * holds rel_error and snr_db. */
RS_API rs_status rs_result_to_json(const rs_result* result, const rs_instance* instance, char** out);

RS_API void rs_string_free(char* s);

/* ---- scalar utilities ------------------------------------------------- */

RS_API rs_status rs_ratio_objective(const double* x, size_t n, double p, double q, double* out);
RS_API rs_status rs_gst_apply(double t, double p, double rho, double* out);
RS_API rs_status rs_gst_threshold(double p, double rho, double* out);

/* ---- theory ----------------------------------------------------------- */

typedef struct rs_bound_input {
  double p;
  double q;
  int k;
  int t;
  double beta; /* <= 0 selects the worst case k^(1/p - 1/q) */
  double delta_2k;
  double delta_k;
  double delta_kt;
  double theta_kt;
  double epsilon;
  size_t n; /* 0 skips the k, t range checks */
} rs_bound_input;

typedef struct rs_bound_output {
  double z0;
  double psi;
  double t1;
  double t2;
  double delta_new;
  double delta_zhu;
  int has_b_o;
  double b_o;
  int has_b_z;
  double b_z;
  int t6_applicable;
  double t6_eta, t6_tau, t6_psi, t6_c1, t6_c2;
  int t6rip_applicable;
  double t6rip_rho, t6rip_alpha, t6rip_eta, t6rip_tau, t6rip_psi, t6rip_cp, t6rip_c1, t6rip_c2;
} rs_bound_output;

RS_API rs_status rs_bound_report(const rs_bound_input* input, rs_bound_output* out);

/* Evaluates a JSON grid and writes the bounds CSV to out_path. */
RS_API rs_status rs_theory_run_grid(const char* grid_json, const char* out_path, size_t* rows);

RS_API rs_status rs_exact_ric(const double* A, size_t m, size_t n, int s, double* out);

/* ---- experiments and data --------------------------------------------- */

typedef struct rs_bench_options {
  int workers;                 /* >= 1 */
  int record_timing;           /* -1 keeps the plan value, 0 off, 1 on */
  int override_seed;           /* nonzero replaces the plan base seed */
  uint64_t base_seed;
} rs_bench_options;

/* Runs a JSON plan and writes trials.csv, aggregate.json and heatmap.csv into
 * out_dir. summary (may be NULL) receives a per-cell text table. */
RS_API rs_status rs_bench_run(const char* plan_json, const char* out_dir, const rs_bench_options* options,
                              char** summary);

/* Generates one instance from JSON matrix and signal specs and saves it. With
 * use_seed set, the matrix and signal seeds are derived from seed. */
RS_API rs_status rs_datagen(const char* matrix_json, const char* signal_json, int use_seed, uint64_t seed,
                            const char* out_dir);

#ifdef __cplusplus
}
#endif

#endif
