#ifndef KAWAHARA_H
#define KAWAHARA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum KwStatus {
  KW_STATUS_OK = 0,
  KW_STATUS_NULL_POINTER = 1,
  KW_STATUS_DOMAIN = 2,
  KW_STATUS_DIMENSION = 3,
  KW_STATUS_PRECONDITION = 4,
  KW_STATUS_NON_OBSERVABLE = 5,
  KW_STATUS_NUMERICAL = 6,
  KW_STATUS_PANIC = 7,
  KW_STATUS_OTHER = 8,
} KwStatus;

/**
 * A synthesized control: blended trajectory and its interior source.
 */
typedef struct KwControl KwControl;

/**
 * A truncated periodic field: Fourier coefficients for modes `-N..=N`.
 */
typedef struct KwField KwField;

typedef struct KwObservability {
  double eig_min;
  double c_obs;
  double c_full;
} KwObservability;

typedef struct KwControlSummary {
  double residual_0;
  double residual_t;
  double support_lo;
  double support_hi;
  double c_num;
  double control_norm;
  bool accepted;
} KwControlSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Length in bytes (without the terminating nul) of the last error message
 * on this thread, or 0 when the last call succeeded.
 */
size_t kw_last_error_length(void);

/**
 * Copies the last error message, nul-terminated and truncated to `len`
 * bytes. Returns the number of bytes written excluding the nul.
 *
 * # Safety
 * `buf` must be valid for `len` bytes.
 */
size_t kw_last_error_message(char *buf, size_t len);

/**
 * Static nul-terminated version string.
 */
const char *kw_version(void);

/**
 * `λ_n = k⁵ + k³ − k` with `k = nπ/L`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum KwStatus kw_eigenvalue(int64_t n, double half_length, double *out);

/**
 * Builds a field from `2N+1` real and imaginary parts, ordered `-N..=N`.
 *
 * # Safety
 * `re` and `im` must be valid for `2 * order + 1` reads; `out` must be valid.
 */
enum KwStatus kw_field_new(double half_length,
                           size_t order,
                           const double *re,
                           const double *im,
                           struct KwField **out);

/**
 * A unit-norm random field drawn from `seed`.
 *
 * # Safety
 * `out` must be valid.
 */
enum KwStatus kw_field_random(uint64_t seed,
                              double half_length,
                              size_t order,
                              struct KwField **out);

/**
 * # Safety
 * `field` must come from this library and not be used afterwards.
 */
void kw_field_free(struct KwField *field);

/**
 * Truncation order `N`, or 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t kw_field_order(const struct KwField *field);

/**
 * `L²(-L, L)` norm, or NaN for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
double kw_field_norm(const struct KwField *field);

/**
 * Copies the `2N+1` coefficients into `re` and `im`.
 *
 * # Safety
 * `re` and `im` must be valid for `len` writes.
 */
enum KwStatus kw_field_coeffs(const struct KwField *field, double *re, double *im, size_t len);

/**
 * Point values at `n` abscissae.
 *
 * # Safety
 * `xs` must be valid for `n` reads, `re` and `im` for `n` writes.
 */
enum KwStatus kw_field_sample(const struct KwField *field,
                              const double *xs,
                              size_t n,
                              double *re,
                              double *im);

/**
 * `S(t)u` as a new handle.
 *
 * # Safety
 * `field` must be a live handle and `out` valid.
 */
enum KwStatus kw_evolve(const struct KwField *field, double t, struct KwField **out);

/**
 * Sharp observability constants on `(0, T) × (-l, l)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum KwStatus kw_observability_constant(size_t order,
                                        double half_length,
                                        double l,
                                        double horizon,
                                        struct KwObservability *out);

/**
 * Steers `u0` to `ut` on `[0, T]` with a source supported in `(ε, T − ε)`.
 *
 * # Safety
 * `u0` and `ut` must be live handles and `out` valid.
 */
enum KwStatus kw_control_synthesize(const struct KwField *u0,
                                    const struct KwField *ut,
                                    double horizon,
                                    double eps,
                                    struct KwControl **out);

/**
 * # Safety
 * `control` must come from this library and not be used afterwards.
 */
void kw_control_free(struct KwControl *control);

/**
 * # Safety
 * `control` must be a live handle and `out` valid.
 */
enum KwStatus kw_control_summary(const struct KwControl *control, struct KwControlSummary *out);

/**
 * Controlled state `u(t)`.
 *
 * # Safety
 * `control` must be a live handle and `out` valid.
 */
enum KwStatus kw_control_state(const struct KwControl *control, double t, struct KwField **out);

/**
 * Interior source `w(t)` with `Pu = w`.
 *
 * # Safety
 * `control` must be a live handle and `out` valid.
 */
enum KwStatus kw_control_source(const struct KwControl *control, double t, struct KwField **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KAWAHARA_H */
