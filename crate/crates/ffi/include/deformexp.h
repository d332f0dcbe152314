#ifndef DEFORMEXP_H
#define DEFORMEXP_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every call.
 */
typedef enum DxStatus {
  DX_STATUS_OK = 0,
  DX_STATUS_NULL_POINTER = 1,
  DX_STATUS_DOMAIN = 2,
  DX_STATUS_MALFORMED = 3,
  DX_STATUS_NOT_HERMITIAN = 4,
  DX_STATUS_DIMENSION_MISMATCH = 5,
  DX_STATUS_INVALID_TRACE = 6,
  DX_STATUS_NOT_FAITHFUL = 7,
  DX_STATUS_NOT_CENTERED = 8,
  DX_STATUS_NO_CONVERGENCE = 9,
  DX_STATUS_SEARCH_EXHAUSTED = 10,
  DX_STATUS_INVALID_CONFIG = 11,
  DX_STATUS_IO = 12,
  DX_STATUS_PANIC = 13,
} DxStatus;

/*
 Functions accepted by [`dx_counterexample_json`].
 */
typedef enum DxLabFunction {
  DX_LAB_FUNCTION_U_MINUS_EXP_PHI = 0,
  DX_LAB_FUNCTION_LOG_EXP_PHI = 1,
  DX_LAB_FUNCTION_LOG_PHI = 2,
  DX_LAB_FUNCTION_IDENTITY = 3,
} DxLabFunction;

/*
 A faithful density matrix.
 */
typedef struct DxDensity DxDensity;

/*
 A Hermitian matrix.
 */
typedef struct DxMatrix DxMatrix;

/*
 A point `ω_X` of the family together with its density and settings.
 */
typedef struct DxModel DxModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or null after a success.
 The pointer stays valid until the next call on the same thread.
 */
const char *dx_last_error(void);

/*
 `φ(u) = u/(λ+u)`.

 # Safety
 `result` must be null or valid for writes.
 */
enum DxStatus dx_phi(double u, double lambda, double *result);

/*
 `log_φ(v) = v − 1 + λ ln v`.

 # Safety
 `result` must be null or valid for writes.
 */
enum DxStatus dx_log_phi(double v, double lambda, double *result);

/*
 `exp_φ(u)` at the default solver settings.

 # Safety
 `result` must be null or valid for writes.
 */
enum DxStatus dx_exp_phi(double u, double lambda, double *result);

/*
 `λ(3 − e)/(e² − 3e + 1)`.

 # Safety
 `result` must be null or valid for writes.
 */
enum DxStatus dx_violation_threshold(double lambda, double *result);

/*
 Builds a Hermitian matrix from row-major parts; `im` may be null for a
 real matrix.

 # Safety
 `re` (and `im` if non-null) must point to `dim * dim` doubles; `matrix`
 must be null or valid for writes.
 */
enum DxStatus dx_matrix_new(size_t dim,
                            const double *re,
                            const double *im,
                            struct DxMatrix **matrix);

/*
 Parses the JSON matrix format.

 # Safety
 `json` must be a NUL-terminated string; `matrix` must be null or valid
 for writes.
 */
enum DxStatus dx_matrix_from_json(const char *json, struct DxMatrix **matrix);

/*
 # Safety
 `matrix` must be null or a handle from this library not yet freed.
 */
void dx_matrix_free(struct DxMatrix *matrix);

/*
 Dimension of a matrix, 0 for null.

 # Safety
 `matrix` must be null or a live handle.
 */
size_t dx_matrix_dim(const struct DxMatrix *matrix);

/*
 Copies the row-major parts into `re` and `im` (each `dim * dim`); either
 may be null to skip it.

 # Safety
 `matrix` must be a live handle; non-null buffers must hold `dim * dim`
 doubles.
 */
enum DxStatus dx_matrix_copy(const struct DxMatrix *matrix, double *re, double *im);

/*
 Validates `matrix` as a faithful density (unit trace, positive).

 # Safety
 `matrix` must be a live handle; `density` null or valid for writes.
 */
enum DxStatus dx_density_new(const struct DxMatrix *matrix, struct DxDensity **density);

/*
 # Safety
 `density` must be null or a handle from this library not yet freed.
 */
void dx_density_free(struct DxDensity *density);

/*
 `α(K)` with `tr(ρ exp_φ(K − α)) = 1`. With `center` nonzero an
 uncentered `K` is accepted and `α(K)` includes the shift `tr(ρK)`;
 otherwise it is rejected with [`DxStatus::NotCentered`].

 # Safety
 Handles must be live; `alpha` null or valid for writes.
 */
enum DxStatus dx_solve_alpha(const struct DxDensity *density,
                             const struct DxMatrix *k,
                             double lambda,
                             bool center,
                             double *alpha);

/*
 Builds the state for a centered direction `K`.

 # Safety
 Handles must be live; `model` null or valid for writes.
 */
enum DxStatus dx_model_new(const struct DxDensity *density,
                           const struct DxMatrix *k,
                           double lambda,
                           struct DxModel **model);

/*
 # Safety
 `model` must be null or a handle from this library not yet freed.
 */
void dx_model_free(struct DxModel *model);

/*
 # Safety
 `model` must be a live handle; `alpha` null or valid for writes.
 */
enum DxStatus dx_model_alpha(const struct DxModel *model, double *alpha);

/*
 Copies the density `σ` of the state.

 # Safety
 `model` must be a live handle; non-null buffers must hold `dim * dim`
 doubles.
 */
enum DxStatus dx_model_sigma(const struct DxModel *model, double *re, double *im);

/*
 `z = tr(ρ φ(Y))`.

 # Safety
 `model` must be a live handle; `z` null or valid for writes.
 */
enum DxStatus dx_model_escort_z(const struct DxModel *model, double *z);

/*
 `d/dt α(tK)` at `t` for the direction the model was built from.

 # Safety
 `model` must be a live handle; `result` null or valid for writes.
 */
enum DxStatus dx_model_alpha_derivative(const struct DxModel *model, double t, double *result);

/*
 Searches for a certificate that `function` (a `DxLabFunction` value) is
 not operator monotone and returns it as JSON in `json`, to be released
 with [`dx_string_free`].

 # Safety
 `json` must be null or valid for writes.
 */
enum DxStatus dx_counterexample_json(uint32_t function, double lambda, uint64_t seed, char **json);

/*
 # Safety
 `s` must be null or a string returned by this library not yet freed.
 */
void dx_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DEFORMEXP_H */
