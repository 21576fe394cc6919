/* Universal compressed-sensing signal estimation via annealed Gibbs sampling.
 *
 * C API over the core library: opaque handles, integer status codes, and a
 * thread-local error message for the last failing call on the thread.
 */
#ifndef UCS_UCS_H
#define UCS_UCS_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#ifndef UCS_API
#define UCS_API __attribute__((visibility("default")))
#endif

typedef enum ucs_status {
  UCS_OK = 0,
  UCS_ERR_INVALID_ARGUMENT = 1,
  UCS_ERR_IO = 2,
  UCS_ERR_NUMERICAL = 3,
  UCS_ERR_RUNTIME = 4
} ucs_status;

UCS_API const char* ucs_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
UCS_API const char* ucs_last_error(void);

/* ---- experiment runner ---- */

typedef struct ucs_experiment ucs_experiment;

/* New experiment with the default protocol (see README for the config keys
 * and their defaults). */
UCS_API ucs_status ucs_experiment_create(ucs_experiment** out);

/* Defaults overlaid with a config file. */
UCS_API ucs_status ucs_experiment_load(ucs_experiment** out, const char* path);

/* "desk" or "paper". */
UCS_API ucs_status ucs_experiment_apply_preset(ucs_experiment* exp,
                                               const char* name);

/* One "section.key" = value assignment, same keys as the config file. */
UCS_API ucs_status ucs_experiment_set(ucs_experiment* exp, const char* key,
                                      const char* value);

/* Runs the sweep and writes results.csv, timing.csv and plotdata.csv under
 * out_dir (which must exist). threads <= 0 picks UCS_THREADS or the hardware
 * count. trace != 0 additionally writes per-run round and energy traces under
 * out_dir/trace. */
UCS_API ucs_status ucs_experiment_run(const ucs_experiment* exp,
                                      const char* out_dir, int threads,
                                      int trace);

UCS_API void ucs_experiment_free(ucs_experiment* exp);

/* ---- direct estimation ---- */

typedef struct ucs_sla_params {
  int q;             /* context depth */
  double c;          /* temperature constant, > 1 */
  int z_init;        /* initial alphabet size */
  int r1, r2, r3, r4a, r4b; /* per-stage super-iteration budgets */
  int max_total;     /* total super-iteration cap */
  double k1, k2;     /* merge / population threshold parameters */
  double sharpness;  /* end-of-schedule inverse-temperature target */
} ucs_sla_params;

UCS_API void ucs_sla_params_defaults(ucs_sla_params* params);

/* Size- and level-adaptive estimation of the length-n signal behind
 * y = Phi x + z. phi is row-major m-by-n, sigma_z_sq the noise variance.
 * Writes the estimate to x_hat (length n); final_alphabet_size may be NULL. */
UCS_API ucs_status ucs_sla_estimate(const double* phi, const double* y,
                                    size_t m, size_t n, double sigma_z_sq,
                                    const ucs_sla_params* params,
                                    uint64_t seed, double* x_hat,
                                    int* final_alphabet_size);

/* Fixed-alphabet annealed Gibbs estimation over the given levels (ascending,
 * n_levels >= 1). Writes the quantized estimate to x_hat (length n). */
UCS_API ucs_status ucs_bmcmc_estimate(const double* phi, const double* y,
                                      size_t m, size_t n, double sigma_z_sq,
                                      const double* levels, size_t n_levels,
                                      int super_iterations, double c, int q,
                                      uint64_t seed, double* x_hat);

/* Minimum-norm least-squares baseline. */
UCS_API ucs_status ucs_baseline_least_squares(const double* phi,
                                              const double* y, size_t m,
                                              size_t n, double* x_hat);

/* ---- tools ---- */

/* Aggregates a results.csv into plot-ready rows (m, mean MSDR, std per SNR). */
UCS_API ucs_status ucs_plotdata(const char* results_csv, const char* out_csv);

/* Runs the enumeration/recompute oracle suites; prints one line per suite to
 * stdout when verbose, and returns UCS_OK only if every suite passes. */
UCS_API ucs_status ucs_run_oracles(int verbose);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* UCS_UCS_H */
