#ifndef LMNPT_H
#define LMNPT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result code of every fallible call.
 */
typedef enum LmnptStatus {
  LMNPT_STATUS_OK = 0,
  LMNPT_STATUS_NULL_POINTER = 1,
  LMNPT_STATUS_INVALID_ARGUMENT = 2,
  LMNPT_STATUS_INSUFFICIENT_SAMPLE = 3,
  LMNPT_STATUS_DEGENERATE = 4,
  LMNPT_STATUS_DOMAIN = 5,
  LMNPT_STATUS_PANIC = 6,
  LMNPT_STATUS_INTERNAL = 7,
} LmnptStatus;

typedef enum LmnptValidityKind {
  LMNPT_VALIDITY_KIND_VALID = 0,
  LMNPT_VALIDITY_KIND_INVALID_TAU4_LOW = 1,
  LMNPT_VALIDITY_KIND_INVALID_TAU4_HIGH = 2,
  LMNPT_VALIDITY_KIND_INVALID_DISCRIMINANT = 3,
  LMNPT_VALIDITY_KIND_INVALID_CURVATURE = 4,
  LMNPT_VALIDITY_KIND_UNDEFINED_RATIOS = 5,
} LmnptValidityKind;

typedef enum LmnptMethod {
  LMNPT_METHOD_LMNPT = 0,
  LMNPT_METHOD_CORNISH_FISHER = 1,
} LmnptMethod;

/**
 * Opaque fitted percentile function.
 */
typedef struct LmnptModel LmnptModel;

/**
 * Opaque validated sample.
 */
typedef struct LmnptSample LmnptSample;

/**
 * Sample L-moments. `tau3`/`tau4` are NaN when `ratios_defined` is false.
 */
typedef struct LmnptLMoments {
  double l1;
  double l2;
  double l3;
  double l4;
  double tau3;
  double tau4;
  bool ratios_defined;
} LmnptLMoments;

/**
 * Validity verdict. For LMNPT the shape fields are τ3, τ4 and h(τ3); for
 * Cornish-Fisher they are skewness, excess kurtosis and the discriminant.
 */
typedef struct LmnptValidity {
  enum LmnptValidityKind kind;
  double shape1;
  double shape2;
  double discriminant;
} LmnptValidity;

/**
 * Q(p) = a + b·z + c·z² + d·z³ with z = Φ⁻¹(p).
 */
typedef struct LmnptCoefficients {
  double a;
  double b;
  double c;
  double d;
} LmnptCoefficients;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. Valid until
 * the next failing call on the same thread.
 */
const char *lmnpt_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *lmnpt_version(void);

/**
 * Copies `len` travel times into a new sample handle.
 *
 * # Safety
 * `values` must point to `len` readable doubles; `out` must be writable.
 */
enum LmnptStatus lmnpt_sample_new(const double *values, uintptr_t len, struct LmnptSample **out);

/**
 * # Safety
 * `sample` must be null or a handle from `lmnpt_sample_new` not yet freed.
 */
void lmnpt_sample_free(struct LmnptSample *sample);

/**
 * # Safety
 * `sample` must be a live handle; `out` must be writable.
 */
enum LmnptStatus lmnpt_sample_len(const struct LmnptSample *sample, uintptr_t *out);

/**
 * # Safety
 * `sample` must be a live handle; `out` must be writable.
 */
enum LmnptStatus lmnpt_sample_lmoments(const struct LmnptSample *sample, struct LmnptLMoments *out);

/**
 * LMNPT validity-domain check for an L-skewness / L-kurtosis pair.
 *
 * # Safety
 * `out` must be writable.
 */
enum LmnptStatus lmnpt_validity(double tau3, double tau4, struct LmnptValidity *out);

/**
 * Fits a percentile function to the sample with the chosen method.
 *
 * # Safety
 * `sample` must be a live handle; `out` must be writable.
 */
enum LmnptStatus lmnpt_model_fit(const struct LmnptSample *sample,
                                 enum LmnptMethod method,
                                 struct LmnptModel **out);

/**
 * # Safety
 * `model` must be null or a handle from `lmnpt_model_fit` not yet freed.
 */
void lmnpt_model_free(struct LmnptModel *model);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum LmnptStatus lmnpt_model_coefficients(const struct LmnptModel *model,
                                          struct LmnptCoefficients *out);

/**
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum LmnptStatus lmnpt_model_validity(const struct LmnptModel *model, struct LmnptValidity *out);

/**
 * Percentile at probability 0 < p < 1.
 *
 * # Safety
 * `model` must be a live handle; `out` must be writable.
 */
enum LmnptStatus lmnpt_model_quantile(const struct LmnptModel *model, double p, double *out);

/**
 * Evaluates the model on a strictly increasing grid in (0, 1).
 * `monotone` may be null.
 *
 * # Safety
 * `grid` must hold `len` readable doubles and `values` `len` writable ones.
 */
enum LmnptStatus lmnpt_model_curve(const struct LmnptModel *model,
                                   const double *grid,
                                   uintptr_t len,
                                   double *values,
                                   bool *monotone);

/**
 * Standard normal quantile.
 *
 * # Safety
 * `out` must be writable.
 */
enum LmnptStatus lmnpt_inverse_normal_cdf(double p, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LMNPT_H */
