#ifndef DIOLAB_H
#define DIOLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; the nonzero library codes match the CLI exit statuses.
 */
typedef enum DiolabStatus {
  DIOLAB_STATUS_OK = 0,
  DIOLAB_STATUS_PRECONDITION = 2,
  DIOLAB_STATUS_PRECISION = 3,
  DIOLAB_STATUS_BUDGET = 4,
  DIOLAB_STATUS_INVARIANT = 5,
  DIOLAB_STATUS_NULL_ARGUMENT = 10,
  DIOLAB_STATUS_INVALID_UTF8 = 11,
  DIOLAB_STATUS_PANIC = 12,
} DiolabStatus;

/**
 * Opaque real number with its expanded continued fraction.
 */
typedef struct DiolabAlpha DiolabAlpha;

/**
 * Opaque `n×m` matrix.
 */
typedef struct DiolabMatrix DiolabMatrix;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *diolab_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *diolab_last_error(void);

/**
 * Releases a string returned through an out-parameter. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void diolab_string_free(char *s);

/**
 * Builds a number from a fixture name (`"golden"`, `"sqrt2m1"`, …) or a
 * RealNumberSpec JSON object.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a writable pointer.
 */
enum DiolabStatus diolab_alpha_new(const char *spec, struct DiolabAlpha **out);

/**
 * # Safety
 * `a` must come from [`diolab_alpha_new`] and not have been freed. NULL is ignored.
 */
void diolab_alpha_free(struct DiolabAlpha *a);

/**
 * Depth of the expanded continued fraction.
 *
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
enum DiolabStatus diolab_alpha_depth(const struct DiolabAlpha *a, size_t *out);

/**
 * Decimal string of `a_k`, `p_k` or `q_k` (`which` = 'a', 'p' or 'q').
 *
 * # Safety
 * `a` must be a live handle and `out` writable.
 */
enum DiolabStatus diolab_alpha_term(const struct DiolabAlpha *a, char which, size_t k, char **out);

/**
 * Enclosure `[lo, hi]` of `‖qα‖` with width at most `budget_bits` binary digits.
 *
 * # Safety
 * `a` must be a live handle; `lo` and `hi` writable.
 */
enum DiolabStatus diolab_qdist(const struct DiolabAlpha *a,
                               uint64_t q,
                               uint32_t budget_bits,
                               char **lo,
                               char **hi);

/**
 * Number of `ℓ ∈ 1..=n` at which `‖qα‖ ≤ c 2^-ℓ` has a solution `0 < q ≤ 2^ℓ`,
 * with `c = c_num/c_den`.
 *
 * # Safety
 * `a` must be a live handle and `solvable` writable.
 */
enum DiolabStatus diolab_singular_count(const struct DiolabAlpha *a,
                                        int64_t c_num,
                                        int64_t c_den,
                                        uint32_t n,
                                        uint32_t *solvable);

/**
 * Scan of `|q|·‖qα − x‖` for `q_lo ≤ |q| ≤ q_hi`, `x = x_num/x_den`, as a JSON report
 * `{mode, q_lo, q_hi, min_lo, min_hi, argmin, below_threshold}`.
 *
 * # Safety
 * `a` must be a live handle and `out_json` writable.
 */
enum DiolabStatus diolab_scan(const struct DiolabAlpha *a,
                              int64_t x_num,
                              int64_t x_den,
                              uint64_t q_lo,
                              uint64_t q_hi,
                              bool positive_only,
                              char **out_json);

/**
 * Builds a matrix from MatrixSpec JSON.
 *
 * # Safety
 * `json` must be NUL-terminated and `out` writable.
 */
enum DiolabStatus diolab_matrix_new(const char *json, struct DiolabMatrix **out);

/**
 * # Safety
 * `m` must come from [`diolab_matrix_new`] and not have been freed. NULL is ignored.
 */
void diolab_matrix_free(struct DiolabMatrix *m);

/**
 * Best approximation vectors with `Y ≤ ymax`, as JSON.
 *
 * # Safety
 * `m` must be a live handle and `out_json` writable.
 */
enum DiolabStatus diolab_best_approx(const struct DiolabMatrix *m, int64_t ymax, char **out_json);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* DIOLAB_H */
