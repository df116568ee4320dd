#ifndef WERNER_GAP_H
#define WERNER_GAP_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WgStatus {
  WG_STATUS_OK = 0,
  WG_STATUS_NULL_POINTER = 1,
  WG_STATUS_DIMENSION_MISMATCH = 2,
  WG_STATUS_NOT_HERMITIAN = 3,
  WG_STATUS_INVALID_STATE = 4,
  WG_STATUS_NOT_UNIT = 5,
  WG_STATUS_OUT_OF_RANGE = 6,
  WG_STATUS_UNSUPPORTED = 7,
  WG_STATUS_PRECONDITION = 8,
  WG_STATUS_NUMERICAL = 9,
  WG_STATUS_PANIC = 10,
} WgStatus;

/**
 * Opaque density matrix.
 */
typedef struct WgDensityMatrix WgDensityMatrix;

/**
 * Classification of one `(ξ, p)` point. `p_star` is NaN when no admixture
 * violates.
 */
typedef struct WgRegionPoint {
  double xi;
  double p;
  bool entangled;
  bool lhv_modelled;
  bool bell_violating;
  double p_star;
  double lhv_bound;
  double pt_min_eig;
} WgRegionPoint;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread; valid until the next failing
 * call on the same thread. Empty if nothing has failed.
 */
const char *wg_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *wg_version(void);

/**
 * `p|ψ_ξ><ψ_ξ| + (1-p)|00><00|`.
 *
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum WgStatus wg_family_state(double p, double xi, struct WgDensityMatrix **out);

/**
 * # Safety
 * `out` must be valid for a pointer write.
 */
enum WgStatus wg_werner_state(size_t d, double p, struct WgDensityMatrix **out);

/**
 * Releases a handle; null is ignored.
 *
 * # Safety
 * `h` must come from this library and not have been freed.
 */
void wg_density_free(struct WgDensityMatrix *h);

/**
 * # Safety
 * `h` must be a live handle and `out` valid for writing.
 */
enum WgStatus wg_density_dim(const struct WgDensityMatrix *h, size_t *out);

/**
 * Matrix entry `(row, col)` as real and imaginary parts.
 *
 * # Safety
 * `h` must be a live handle; `re` and `im` valid for writing.
 */
enum WgStatus wg_density_element(const struct WgDensityMatrix *h,
                                 size_t row,
                                 size_t col,
                                 double *re,
                                 double *im);

/**
 * `E(a, b)` for unit vectors `a[3]`, `b[3]` on a two-qubit state.
 *
 * # Safety
 * `h` live; `a`, `b` point to three doubles each; `out` writable.
 */
enum WgStatus wg_correlation(const struct WgDensityMatrix *h,
                             const double *a,
                             const double *b,
                             double *out);

/**
 * Smallest eigenvalue of the partial transpose over a `d_a x d_b` split.
 *
 * # Safety
 * `h` live; `out` writable.
 */
enum WgStatus wg_ppt_witness(const struct WgDensityMatrix *h, size_t d_a, size_t d_b, double *out);

/**
 * # Safety
 * `out` writable.
 */
enum WgStatus wg_lhv_validity_bound(double xi, double *out);

/**
 * Writes the violation threshold, or NaN with `attainable = false`.
 *
 * # Safety
 * `p_star` and `attainable` writable.
 */
enum WgStatus wg_violation_threshold(double xi, double *p_star, bool *attainable);

/**
 * # Safety
 * `out` writable.
 */
enum WgStatus wg_werner_ppt_boundary(size_t d, double *out);

/**
 * Critical visibility at given settings; directions are packed as
 * `x, y, z` triples.
 *
 * # Safety
 * `h` live; `a` holds `3 m_a` doubles, `b` holds `3 m_b`; `out` writable.
 */
enum WgStatus wg_critical_visibility(const struct WgDensityMatrix *h,
                                     const double *a,
                                     size_t m_a,
                                     const double *b,
                                     size_t m_b,
                                     double *out);

/**
 * Smallest critical visibility found over `m` settings per side.
 *
 * # Safety
 * `h` live; `out` writable.
 */
enum WgStatus wg_optimize_settings(const struct WgDensityMatrix *h,
                                   size_t m,
                                   size_t restarts,
                                   uint64_t seed,
                                   double *out);

/**
 * # Safety
 * `out` writable.
 */
enum WgStatus wg_check_point(double p, double xi, struct WgRegionPoint *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WERNER_GAP_H */
