#ifndef AMVP_H
#define AMVP_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum AmvpStatus {
  AMVP_STATUS_OK = 0,
  AMVP_STATUS_NULL_POINTER = 1,
  AMVP_STATUS_INVALID_ARGUMENT = 2,
  AMVP_STATUS_OUTSIDE_REGION = 3,
  AMVP_STATUS_NO_CONVERGENCE = 4,
  AMVP_STATUS_NUMERICAL = 5,
  AMVP_STATUS_PANIC = 6,
} AmvpStatus;

/**
 * Opaque handle to a hodographic model.
 */
typedef struct AmvpModel AmvpModel;

/**
 * `(λ_k, ε_k, μ_k)` for one index `k`.
 */
typedef struct AmvpSpectralTriple {
  uint32_t k;
  double lambda;
  double epsilon;
  double mu;
} AmvpSpectralTriple;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null if there was none.
 * The pointer stays valid until the next failing call on the same thread.
 */
const char *amvp_last_error(void);

/**
 * Builds a model from `len` coefficients `A_{ks[i]} = re[i] + i im[i]`.
 *
 * # Safety
 * `ks`, `re` and `im` must each point to `len` readable values and `out` to
 * a writable handle slot.
 */
enum AmvpStatus amvp_model_new(double p,
                               uint32_t n,
                               const uint32_t *ks,
                               const double *re,
                               const double *im,
                               size_t len,
                               struct AmvpModel **out);

/**
 * Releases a handle from [`amvp_model_new`]; null is ignored.
 *
 * # Safety
 * `model` must be null or a live handle not freed before.
 */
void amvp_model_free(struct AmvpModel *model);

/**
 * Certified hodographic radius and the radius of the physical disc around 0
 * contained in its image.
 *
 * # Safety
 * `model` must be a live handle; the out-pointers writable.
 */
enum AmvpStatus amvp_model_radii(const struct AmvpModel *model, double *validity, double *plane);

/**
 * `H(r e^{iθ})`.
 *
 * # Safety
 * `model` must be a live handle; the out-pointers writable.
 */
enum AmvpStatus amvp_eval_h(const struct AmvpModel *model,
                            double r,
                            double theta,
                            double *out_re,
                            double *out_im);

/**
 * Polar coordinates of `H⁻¹(x + iy)`.
 *
 * # Safety
 * `model` must be a live handle; the out-pointers writable.
 */
enum AmvpStatus amvp_invert_h(const struct AmvpModel *model,
                              double x,
                              double y,
                              double *out_r,
                              double *out_theta);

/**
 * The p-harmonic function `u(x + iy)`.
 *
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
enum AmvpStatus amvp_eval_u(const struct AmvpModel *model, double x, double y, double *out);

/**
 * `α (sup + inf)/2 + (1 - α) mean - u(x0)` of `u` on the disc of the given
 * radius about `x + iy`, sampled at angular `resolution`.
 *
 * # Safety
 * `model` must be a live handle; `out` writable.
 */
enum AmvpStatus amvp_residual(const struct AmvpModel *model,
                              double x,
                              double y,
                              double radius,
                              double alpha,
                              size_t resolution,
                              double *out);

/**
 * `(λ_k, ε_k, μ_k)` for exponent `p` and multiplicity `n`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AmvpStatus amvp_spectral_triple(double p,
                                     uint32_t n,
                                     uint32_t k,
                                     struct AmvpSpectralTriple *out);

/**
 * `(n + λ_{n+2}) / λ_{n+1}`.
 *
 * # Safety
 * `out` must be writable.
 */
enum AmvpStatus amvp_exponent_ratio(double p, uint32_t n, double *out);

/**
 * Weights `((p-2)/(p+2), 4/(p+2))` on the midrange and the mean.
 *
 * # Safety
 * The out-pointers must be writable.
 */
enum AmvpStatus amvp_weights(double p, double *midrange, double *mean);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AMVP_H */
