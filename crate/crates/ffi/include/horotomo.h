#ifndef HOROTOMO_H
#define HOROTOMO_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HtStatus {
  HT_STATUS_OK = 0,
  HT_STATUS_NULL_POINTER = 1,
  HT_STATUS_CONTRACT = 2,
  HT_STATUS_GEOMETRY = 3,
  HT_STATUS_PARAMETER = 4,
  HT_STATUS_ACCURACY = 5,
  HT_STATUS_DIVERGENCE = 6,
  HT_STATUS_SMOOTHNESS = 7,
  HT_STATUS_UNSTABLE = 8,
  HT_STATUS_DECOMPOSITION = 9,
  HT_STATUS_CONFIG = 10,
  HT_STATUS_IO = 11,
  HT_STATUS_PANIC = 12,
} HtStatus;

/**
 * A scalar field on hyperbolic space.
 */
typedef struct HtField HtField;

/**
 * The horospherical transform of a field.
 */
typedef struct HtImage HtImage;

/**
 * Quadrature controls; see [`ht_quad_default`].
 */
typedef struct HtQuadSpec {
  double rel_tolerance;
  double abs_tolerance;
  double truncation_radius;
  uintptr_t max_evals;
} HtQuadSpec;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. Valid until the next failing call.
 */
const char *ht_last_error(void);

struct HtQuadSpec ht_quad_default(void);

/**
 * `f(x) = exp(-lambda (cosh r - 1))`, `r` the distance to the origin of `H^n`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HtStatus ht_field_zonal_exp(uintptr_t n, double lambda, struct HtField **out);

/**
 * Smooth compactly supported bump in `s = cosh r`, centered at the point at distance `dist` along the last axis.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HtStatus ht_field_bump(uintptr_t n,
                            double dist,
                            double width,
                            double height,
                            struct HtField **out);

/**
 * Evaluates a field at the hyperboloid point `x` of length `n + 1`.
 *
 * # Safety
 * `field` must come from a constructor, `x` must hold `len` doubles.
 */
enum HtStatus ht_field_eval(const struct HtField *field,
                            const double *x,
                            uintptr_t len,
                            double *out);

/**
 * # Safety
 * `field` must come from a constructor and not be used afterwards.
 */
void ht_field_free(struct HtField *field);

/**
 * `Q^alpha f` at the point of distance `acosh s` from the origin.
 *
 * # Safety
 * `field` must come from a constructor, `out` must be valid.
 */
enum HtStatus ht_potential(const struct HtField *field,
                           double alpha,
                           double s,
                           struct HtQuadSpec quad,
                           double *out);

/**
 * The `d`-horospherical transform of `field`; the field handle may be freed afterwards.
 *
 * # Safety
 * `field` must come from a constructor, `out` must be valid.
 */
enum HtStatus ht_image_new(const struct HtField *field,
                           uintptr_t d,
                           struct HtQuadSpec quad,
                           struct HtImage **out);

/**
 * Transform value on the horosphere `k a_t n_u xi0`.
 *
 * `k` is a row-major `n x n` rotation or null for the identity; `u` holds `n - 1 - d` doubles.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
enum HtStatus ht_image_eval(const struct HtImage *image,
                            const double *k,
                            double t,
                            const double *u,
                            uintptr_t u_len,
                            double *out);

/**
 * # Safety
 * `image` must come from [`ht_image_new`] and not be used afterwards.
 */
void ht_image_free(struct HtImage *image);

/**
 * Mean-value reconstruction of the field at the radial probe `s >= 1`.
 *
 * # Safety
 * `image` must come from [`ht_image_new`], `out` must be valid.
 */
enum HtStatus ht_invert_mean_value(const struct HtImage *image, double s, double *out);

/**
 * Polynomial reconstruction at `len` radial probes, written to `out`.
 *
 * `ell = 0` selects the even-`d` formula; otherwise the general one with `P_ell`.
 *
 * # Safety
 * `probes` and `out` must hold `len` doubles.
 */
enum HtStatus ht_invert_poly(const struct HtImage *image,
                             uintptr_t ell,
                             const double *probes,
                             uintptr_t len,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HOROTOMO_H */
