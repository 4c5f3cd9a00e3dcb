/* C interface for the fpt first-passage-time engine. */

#ifndef FPT_H
#define FPT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Bridge sampling scheme selector for `fpt_density_girsanov`.
typedef enum FptScheme {
  FptScheme_SdeEuler = 0,
  FptScheme_ThreeBridge = 1,
} FptScheme;

// Status codes returned by every fallible call.
typedef enum FptStatus {
  FptStatus_Ok = 0,
  FptStatus_NullArgument = 1,
  FptStatus_InvalidArgument = 2,
  FptStatus_NonConvexBoundary = 3,
  FptStatus_OutOfRange = 4,
  FptStatus_NumericalFailure = 5,
  FptStatus_Utf8Error = 6,
} FptStatus;

// Opaque validated moving boundary.
typedef struct FptBoundary FptBoundary;

// Opaque density curve on a time grid.
typedef struct FptCurve FptCurve;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Stable name for a status code (static storage, do not free).
const char *fpt_status_name(enum FptStatus status);

// Parse a boundary from its JSON wire form, validating convexity on
// `[0, t_max]`. On success writes a heap handle to `out`.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum FptStatus fpt_boundary_from_json(const char *json, double t_max, struct FptBoundary **out);

// Release a boundary handle. NULL is ignored.
//
// # Safety
// `b` must have come from `fpt_boundary_from_json` and not be freed twice.
void fpt_boundary_free(struct FptBoundary *b);

// Evaluate `f`, `f'` or `f''` (order 0, 1, 2) at `t`.
//
// # Safety
// `b` and `out` must be valid pointers.
enum FptStatus fpt_boundary_eval(const struct FptBoundary *b,
                                 double t,
                                 uint32_t order,
                                 double *out);

// `int_0^t (f'(u))^2 du`.
//
// # Safety
// `b` and `out` must be valid pointers.
enum FptStatus fpt_boundary_energy(const struct FptBoundary *b, double t, double *out);

// First-passage density at `s` via the Bessel-bridge representation.
// Writes the estimate and its standard error.
//
// # Safety
// `b`, `out_phi` and `out_std_error` must be valid pointers.
enum FptStatus fpt_density_girsanov(const struct FptBoundary *b,
                                    double s,
                                    size_t n_steps,
                                    size_t n_paths,
                                    uint64_t seed,
                                    enum FptScheme scheme,
                                    double *out_phi,
                                    double *out_std_error);

// Closed-form density for linear boundaries (`f'' == 0`).
//
// # Safety
// `b` and `out` must be valid pointers.
enum FptStatus fpt_density_closed_form(const struct FptBoundary *b, double s, double *out);

// Density at `s` from the Feynman-Kac finite-difference solve on an
// `n_t x n_x` grid truncated at `x_max`.
//
// # Safety
// `b` and `out` must be valid pointers.
enum FptStatus fpt_density_fk_pde(const struct FptBoundary *b,
                                  double s,
                                  size_t n_t,
                                  size_t n_x,
                                  double x_max,
                                  double *out);

// Full density curve from the killed-heat-equation solve; writes an opaque
// curve handle to `out`.
//
// # Safety
// `b` and `out` must be valid pointers.
enum FptStatus fpt_curve_heat_pde(const struct FptBoundary *b,
                                  double t_max,
                                  size_t n_t,
                                  size_t n_y,
                                  double y_max,
                                  struct FptCurve **out);

// Number of points in a curve.
//
// # Safety
// `c` must be a valid curve handle.
size_t fpt_curve_len(const struct FptCurve *c);

// Read point `i` of a curve into `(out_s, out_phi)`.
//
// # Safety
// Pointers must be valid; `i` is bounds-checked.
enum FptStatus fpt_curve_point(const struct FptCurve *c, size_t i, double *out_s, double *out_phi);

// Release a curve handle. NULL is ignored.
//
// # Safety
// `c` must have come from `fpt_curve_heat_pde` and not be freed twice.
void fpt_curve_free(struct FptCurve *c);

// Jensen envelope on a caller-supplied strictly increasing grid of `len`
// times; writes `len` lower and upper bounds into caller-owned arrays.
//
// # Safety
// `s_grid`, `lower` and `upper` must point to `len` readable/writable
// doubles.
enum FptStatus fpt_envelope(const struct FptBoundary *b,
                            const double *s_grid,
                            size_t len,
                            double *lower,
                            double *upper);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FPT_H */
