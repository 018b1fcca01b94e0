/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#ifndef SYNLAB_H
#define SYNLAB_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum SynlabStatus {
  SYNLAB_STATUS_OK = 0,
  SYNLAB_STATUS_INVALID_ARGUMENT = 1,
  SYNLAB_STATUS_CONFIG = 2,
  SYNLAB_STATUS_FIT_NOT_CONVERGED = 3,
  SYNLAB_STATUS_IO = 4,
  SYNLAB_STATUS_PANIC = 5,
} SynlabStatus;

typedef enum SynlabSide {
  SYNLAB_SIDE_SET = 0,
  SYNLAB_SIDE_RESET = 1,
} SynlabSide;

/**
 * Configuration plus the compound synapse built from it.
 */
typedef struct SynlabLab SynlabLab;

/**
 * Result of a Monte Carlo window run.
 */
typedef struct SynlabWindow SynlabWindow;

typedef struct SynlabWindowPoint {
  double delta_t;
  double mean;
  double std;
  int32_t mode;
  double analytic_mean;
  double analytic_variance;
  int32_t analytic_mode;
  double tvd;
} SynlabWindowPoint;

typedef struct SynlabFit {
  /**
   * Intercept (linear) or amplitude (exponential).
   */
  double a;
  /**
   * Slope (linear) or rate (exponential).
   */
  double b;
  double r_squared;
  size_t n_points;
  size_t excluded;
  bool converged;
  size_t iterations;
} SynlabFit;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t synlab_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *synlab_version(void);

/**
 * Standard normal CDF.
 */
double synlab_normal_cdf(double x);

/**
 * Lab with the default configuration.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum SynlabStatus synlab_lab_default(struct SynlabLab **out);

/**
 * Lab from a JSON configuration (unknown keys are rejected).
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` valid for a pointer write.
 */
enum SynlabStatus synlab_lab_from_json(const char *json, struct SynlabLab **out);

/**
 * Same lab with flat attenuation (every α = 1).
 *
 * # Safety
 * `lab` must be a live handle; `out` valid for a pointer write.
 */
enum SynlabStatus synlab_lab_flat(const struct SynlabLab *lab, struct SynlabLab **out);

/**
 * # Safety
 * `lab` must be null or a handle not yet freed.
 */
void synlab_lab_free(struct SynlabLab *lab);

/**
 * Number of devices; 0 for a null handle.
 *
 * # Safety
 * `lab` must be null or a live handle.
 */
size_t synlab_lab_device_count(const struct SynlabLab *lab);

/**
 * Overrides seed and epoch count of the lab's protocol.
 *
 * # Safety
 * `lab` must be a live handle.
 */
enum SynlabStatus synlab_lab_set_protocol(struct SynlabLab *lab, uint64_t seed, size_t epochs);

/**
 * Per-device switching probabilities at `dt`. Both buffers need at least
 * `synlab_lab_device_count` entries.
 *
 * # Safety
 * `lab` must be a live handle; buffers valid for `len` doubles.
 */
enum SynlabStatus synlab_lab_branch_probabilities(const struct SynlabLab *lab,
                                                  double dt,
                                                  double *p_set,
                                                  double *p_reset,
                                                  size_t len);

/**
 * Analytic law of the number of switching devices at `dt`: `pmf[k]` is the
 * probability that `k` devices switch. `sign` receives +1 when they SET and
 * -1 when they RESET. `pmf` needs `device_count + 1` entries.
 *
 * # Safety
 * `lab` must be a live handle; `pmf` valid for `len` doubles; `sign` null or
 * valid for one write.
 */
enum SynlabStatus synlab_lab_state_distribution(const struct SynlabLab *lab,
                                                double dt,
                                                double *pmf,
                                                size_t len,
                                                int32_t *sign);

/**
 * Runs the Monte Carlo window over the lab's Δt grid. `threads` = 0 uses
 * one worker per core; results do not depend on it.
 *
 * # Safety
 * `lab` must be a live handle; `out` valid for a pointer write.
 */
enum SynlabStatus synlab_lab_run_window(const struct SynlabLab *lab,
                                        size_t threads,
                                        struct SynlabWindow **out);

/**
 * # Safety
 * `window` must be null or a handle not yet freed.
 */
void synlab_window_free(struct SynlabWindow *window);

/**
 * Number of grid points; 0 for a null handle.
 *
 * # Safety
 * `window` must be null or a live handle.
 */
size_t synlab_window_len(const struct SynlabWindow *window);

/**
 * # Safety
 * `window` must be a live handle; `out` valid for one write.
 */
enum SynlabStatus synlab_window_point(const struct SynlabWindow *window,
                                      size_t index,
                                      struct SynlabWindowPoint *out);

/**
 * Sample counts of one grid point, indexed by `level + device_count`.
 *
 * # Safety
 * `window` must be a live handle; `counts` valid for `len` values.
 */
enum SynlabStatus synlab_window_histogram(const struct SynlabWindow *window,
                                          size_t index,
                                          uint64_t *counts,
                                          size_t len);

/**
 * Poisson-binomial law of the number of successes among `n` independent
 * trials with probabilities `p`. `pmf` needs `n + 1` entries.
 *
 * # Safety
 * `p` valid for `n` doubles, `pmf` for `len`.
 */
enum SynlabStatus synlab_state_distribution(const double *p, size_t n, double *pmf, size_t len);

/**
 * Least-squares line `y = a + b x`.
 *
 * # Safety
 * `x` and `y` valid for `n` doubles; `out` for one write.
 */
enum SynlabStatus synlab_fit_linear(const double *x,
                                    const double *y,
                                    size_t n,
                                    enum SynlabSide fit_side,
                                    struct SynlabFit *out);

/**
 * Least-squares `y = a exp(b x)` over the points with `y > 0` (at least
 * three). Returns `FitNotConverged`, with `out` still filled, when the
 * iteration stalls.
 *
 * # Safety
 * `x` and `y` valid for `n` doubles; `out` for one write.
 */
enum SynlabStatus synlab_fit_exponential(const double *x,
                                         const double *y,
                                         size_t n,
                                         enum SynlabSide fit_side,
                                         struct SynlabFit *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYNLAB_H */
