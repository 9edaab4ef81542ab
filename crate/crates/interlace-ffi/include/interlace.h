#ifndef INTERLACE_H
#define INTERLACE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum InterlaceStatus {
  INTERLACE_STATUS_OK = 0,
  INTERLACE_STATUS_NULL_POINTER = 1,
  INTERLACE_STATUS_INVALID_ARGUMENT = 2,
  INTERLACE_STATUS_NOT_HERMITIAN = 3,
  INTERLACE_STATUS_NOT_PSD = 4,
  INTERLACE_STATUS_SIZE_GUARD = 5,
  INTERLACE_STATUS_NOT_REAL_ROOTED = 6,
  INTERLACE_STATUS_NUMERICAL_FAILURE = 7,
  INTERLACE_STATUS_PARSE = 8,
  /**
   * Hypothesis of a bound not met (sum above identity, bad proportions, ...).
   */
  INTERLACE_STATUS_HYPOTHESIS = 9,
  INTERLACE_STATUS_BUFFER_TOO_SMALL = 10,
  INTERLACE_STATUS_PANIC = 99,
} InterlaceStatus;

/**
 * Opaque matrix ensemble.
 */
typedef struct InterlaceEnsemble InterlaceEnsemble;

/**
 * Opaque real polynomial (ascending coefficients).
 */
typedef struct InterlacePolynomial InterlacePolynomial;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *interlace_last_error_message(void);

/**
 * Builds an ensemble of `m` hermitian `dim x dim` matrices from row-major
 * real and imaginary parts (`m * dim * dim` values each; `im` may be null).
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `m * dim * dim` doubles; `out`
 * must be a valid pointer.
 */
enum InterlaceStatus interlace_ensemble_new(size_t dim,
                                            size_t m,
                                            const double *re,
                                            const double *im,
                                            struct InterlaceEnsemble **out);

/**
 * Parses an ensemble file (JSON text, NUL-terminated).
 *
 * # Safety
 * `json` must be a valid C string; `out` must be a valid pointer.
 */
enum InterlaceStatus interlace_ensemble_from_json(const char *json, struct InterlaceEnsemble **out);

/**
 * # Safety
 * `e` must be null or a handle from this library not yet freed.
 */
void interlace_ensemble_free(struct InterlaceEnsemble *e);

/**
 * # Safety
 * `e` must be a live handle; `dim` and `len` must be valid pointers.
 */
enum InterlaceStatus interlace_ensemble_shape(const struct InterlaceEnsemble *e,
                                              size_t *dim,
                                              size_t *len);

/**
 * `mu[s_1 A_1, ..., s_m A_m]`; `scalars` has one entry per matrix.
 *
 * # Safety
 * `e` must be a live handle, `scalars` must point to `m` doubles and `out`
 * must be a valid pointer.
 */
enum InterlaceStatus interlace_mixed_char_poly(const struct InterlaceEnsemble *e,
                                               const double *scalars,
                                               size_t m,
                                               struct InterlacePolynomial **out);

/**
 * `mu_2[A_1, ..., A_m]`.
 *
 * # Safety
 * `e` must be a live handle and `out` a valid pointer.
 */
enum InterlaceStatus interlace_quadratic_mixed_char_poly(const struct InterlaceEnsemble *e,
                                                         struct InterlacePolynomial **out);

/**
 * # Safety
 * `p` must be null or a handle from this library not yet freed.
 */
void interlace_polynomial_free(struct InterlacePolynomial *p);

/**
 * Copies the ascending coefficients into `buf`. `len` receives the number of
 * coefficients; `BufferTooSmall` is returned (with `len` set) when `cap` is short.
 *
 * # Safety
 * `p` must be a live handle, `buf` must have room for `cap` doubles, `len`
 * must be a valid pointer.
 */
enum InterlaceStatus interlace_polynomial_coeffs(const struct InterlacePolynomial *p,
                                                 double *buf,
                                                 size_t cap,
                                                 size_t *len);

/**
 * Certified largest root (bracket width `tol`); fails when not real-rooted.
 *
 * # Safety
 * `p` must be a live handle and `out` a valid pointer.
 */
enum InterlaceStatus interlace_polynomial_maxroot(const struct InterlacePolynomial *p,
                                                  double tol,
                                                  double *out);

/**
 * Derandomized outcome for `||sum (s_i - E xi_i) A_i|| <= 4 sigma`.
 *
 * Distributions are flattened: variable `i` has `support_sizes[i]` values and
 * probabilities, stored consecutively in `values` and `probs`.
 * `outcome` receives `m` chosen values.
 *
 * # Safety
 * `e` must be a live handle; `support_sizes`, `outcome` hold `m` entries,
 * `values` and `probs` hold `sum support_sizes` entries; `achieved`, `bound`
 * are valid pointers.
 */
enum InterlaceStatus interlace_solve_kls(const struct InterlaceEnsemble *e,
                                         const double *values,
                                         const double *probs,
                                         const size_t *support_sizes,
                                         bool reduce,
                                         double *outcome,
                                         double *achieved,
                                         double *bound);

/**
 * Subset selection: `selected[i]` is set to 1 for `i` in `I_0`, else 0.
 *
 * # Safety
 * `e` must be a live handle; `weights` and `selected` hold `m` entries;
 * `achieved`, `bound` are valid pointers.
 */
enum InterlaceStatus interlace_lyapunov_select(const struct InterlaceEnsemble *e,
                                               const double *weights,
                                               uint8_t *selected,
                                               double *achieved,
                                               double *bound);

/**
 * KS_r partition: `block_of[i]` receives the block of matrix `i`;
 * `block_norms[k]` and `bounds[k]` the norm of block `k` and its bound
 * `t_k (1 + sqrt(r eps))^2`.
 *
 * # Safety
 * `e` must be a live handle; `proportions`, `block_norms`, `bounds` hold `r`
 * entries and `block_of` holds `m`.
 */
enum InterlaceStatus interlace_ks_r_partition(const struct InterlaceEnsemble *e,
                                              const double *proportions,
                                              size_t r,
                                              size_t *block_of,
                                              double *block_norms,
                                              double *bounds);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* INTERLACE_H */
