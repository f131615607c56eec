#ifndef MAASS_UNIVERSALITY_H
#define MAASS_UNIVERSALITY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum MuStatus {
  MU_STATUS_OK = 0,
  MU_STATUS_NULL_POINTER = 1,
  MU_STATUS_INVALID_ARGUMENT = 2,
  MU_STATUS_VALIDATION = 3,
  MU_STATUS_NUMERICAL = 4,
  MU_STATUS_IO = 5,
  MU_STATUS_PANIC = 6,
} MuStatus;

/**
 * Forms loaded from a dataset file.
 */
typedef struct MuDataset MuDataset;

/**
 * One validated form.
 */
typedef struct MuForm MuForm;

/**
 * Tabulated mu_p with CDF and quantile.
 */
typedef struct MuMeasure MuMeasure;

typedef struct MuComplex {
  double re;
  double im;
} MuComplex;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failed call on this thread, or NULL if none failed yet.
 * Valid until the next failure on this thread.
 */
const char *mu_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mu_version(void);

/**
 * Principal branch of log Gamma(z).
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MuStatus mu_log_gamma(struct MuComplex z, struct MuComplex *out);

/**
 * Density of mu_p at x.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MuStatus mu_sarnak_density(uint64_t p, double x, double *out);

/**
 * mu_p([a, b]) by adaptive quadrature.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum MuStatus mu_interval_mass(uint64_t p, double a, double b, double *out);

/**
 * # Safety
 * `out` must be valid for writes. The handle is released with [`mu_measure_free`].
 */
enum MuStatus mu_measure_new(uint64_t p, struct MuMeasure **out);

/**
 * # Safety
 * `m` must come from [`mu_measure_new`] and not be used afterwards. NULL is ignored.
 */
void mu_measure_free(struct MuMeasure *m);

/**
 * # Safety
 * `m` must be a live handle and `out` valid for writes.
 */
enum MuStatus mu_measure_cdf(const struct MuMeasure *m, double x, double *out);

/**
 * # Safety
 * `m` must be a live handle and `out` valid for writes.
 */
enum MuStatus mu_measure_quantile(const struct MuMeasure *m, double u, double *out);

/**
 * Build a form from parallel arrays of primes and lambda(p).
 *
 * # Safety
 * `label` must be a NUL-terminated string, `primes` and `eigs` must point to `len` elements
 * (they may be NULL when `len` is 0) and `out` must be valid for writes.
 */
enum MuStatus mu_form_new(const char *label,
                          double r,
                          uint8_t parity,
                          const uint64_t *primes,
                          const double *eigs,
                          size_t len,
                          struct MuForm **out);

/**
 * # Safety
 * `f` must come from this library and not be used afterwards. NULL is ignored.
 */
void mu_form_free(struct MuForm *f);

/**
 * Spectral parameter r, or NaN for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
double mu_form_r(const struct MuForm *f);

/**
 * Parity epsilon in {0, 1}, or 255 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
uint8_t mu_form_parity(const struct MuForm *f);

/**
 * Largest prime with a stored eigenvalue, or 0 for NULL.
 *
 * # Safety
 * `f` must be NULL or a live handle.
 */
uint64_t mu_form_p_cap(const struct MuForm *f);

/**
 * Load and validate a JSON-lines dataset.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` valid for writes.
 */
enum MuStatus mu_dataset_load(const char *path, struct MuDataset **out);

/**
 * Number of forms, or 0 for NULL.
 *
 * # Safety
 * `d` must be NULL or a live handle.
 */
size_t mu_dataset_len(const struct MuDataset *d);

/**
 * Copy of form `index` as an independent handle.
 *
 * # Safety
 * `d` must be a live handle and `out` valid for writes.
 */
enum MuStatus mu_dataset_form(const struct MuDataset *d, size_t index, struct MuForm **out);

/**
 * # Safety
 * `d` must come from [`mu_dataset_load`] and not be used afterwards. NULL is ignored.
 */
void mu_dataset_free(struct MuDataset *d);

/**
 * L(s) by the approximate functional equation with main-sum length `n_cutoff`.
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum MuStatus mu_evaluate_l(const struct MuForm *f,
                            struct MuComplex s,
                            uint64_t n_cutoff,
                            struct MuComplex *out);

/**
 * prod_{p <= x} (1 - lambda(p) p^{-s} + p^{-2s}).
 *
 * # Safety
 * `f` must be a live handle and `out` valid for writes.
 */
enum MuStatus mu_partial_euler_inverse(const struct MuForm *f,
                                       uint64_t x,
                                       struct MuComplex s,
                                       struct MuComplex *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MAASS_UNIVERSALITY_H */
