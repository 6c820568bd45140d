/* C interface to the liecat library. Generated by cbindgen; do not edit. */

#ifndef LIECAT_H
#define LIECAT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Section buffer holds coefficients in the target-fibre frame (length =
 * delta of the realization).
 */
#define LIECAT_SECTION_FRAME 0

/**
 * Section buffer holds a monoid tangent vector at the unit (length =
 * morphism dimension; monoid families only).
 */
#define LIECAT_SECTION_MONOID 1

/**
 * Status code returned by every fallible call.
 *
 * `Ok` is zero; everything else is a failure and leaves a message for
 * `liecat_last_error_message`. The nonzero codes mirror the library's
 * error taxonomy, plus the FFI-specific `NullPointer`, `Utf8`, and
 * `Panic`.
 */
typedef enum LiecatStatus {
  LiecatStatus_Ok = 0,
  LiecatStatus_NullPointer = 1,
  LiecatStatus_Utf8 = 2,
  LiecatStatus_Panic = 3,
  LiecatStatus_NonFinite = 4,
  LiecatStatus_DomainExit = 5,
  LiecatStatus_BadDimension = 6,
  LiecatStatus_DimensionMismatch = 7,
  LiecatStatus_Parse = 8,
  LiecatStatus_InvalidSpec = 9,
  LiecatStatus_InvalidMorphism = 10,
  LiecatStatus_InvalidObject = 11,
  LiecatStatus_NotComposable = 12,
  LiecatStatus_InvalidResult = 13,
  LiecatStatus_UnsupportedFamily = 14,
  LiecatStatus_SamplerUnavailable = 15,
  LiecatStatus_NotInvertible = 16,
  LiecatStatus_OutwardVector = 17,
  LiecatStatus_NotHomomorphism = 18,
  LiecatStatus_InvalidConfiguration = 19,
  LiecatStatus_BoundaryConfiguration = 20,
} LiecatStatus;

/**
 * Opaque handle to a parsed realization together with the tolerance
 * settings used by every operation on it.
 */
typedef struct LiecatRealization LiecatRealization;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parse a NUL-terminated realization description (the same `key = value`
 * format the CLI reads from spec files) into a new handle.
 *
 * On success writes the handle to `out` and returns `Ok`; the handle must
 * be released with `liecat_realization_free`.
 *
 * # Safety
 *
 * `spec_text` must point to a NUL-terminated string and `out` to a valid
 * pointer slot.
 */
enum LiecatStatus liecat_realization_parse(const char *spec_text, struct LiecatRealization **out);

/**
 * Release a handle created by `liecat_realization_parse`. Passing NULL is
 * a no-op.
 *
 * # Safety
 *
 * `handle` must be NULL or a pointer obtained from
 * `liecat_realization_parse` that has not been freed yet.
 */
void liecat_realization_free(struct LiecatRealization *handle);

/**
 * Copy the realization's family name into `buf` as a NUL-terminated
 * string. `buf_len` must cover the name plus the terminator.
 *
 * # Safety
 *
 * `buf` must point to at least `buf_len` writable bytes.
 */
enum LiecatStatus liecat_realization_family(const struct LiecatRealization *handle,
                                            char *buf,
                                            size_t buf_len);

/**
 * Report the chart dimensions of the realization: morphism coordinates,
 * object coordinates, and their difference delta (the fibre dimension).
 *
 * # Safety
 *
 * The three output pointers must be valid.
 */
enum LiecatStatus liecat_realization_dims(const struct LiecatRealization *handle,
                                          size_t *out_morphisms,
                                          size_t *out_objects,
                                          size_t *out_delta);

/**
 * Replace the relative singular-value cutoff used for rank decisions on
 * this handle (default 1e-8). Must be positive and finite.
 *
 * # Safety
 *
 * `handle` must be a live handle from `liecat_realization_parse`.
 */
enum LiecatStatus liecat_realization_set_rank_tolerance(struct LiecatRealization *handle,
                                                        double tol);

/**
 * Decide whether `coords` (length = morphism dimension) describes a valid
 * morphism of the realization.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; `out` must be
 * valid.
 */
enum LiecatStatus liecat_morphism_valid(const struct LiecatRealization *handle,
                                        const double *coords,
                                        size_t coords_len,
                                        bool *out);

/**
 * Compose two morphisms: `out = g . h` (apply `h` first). `out` must hold
 * one morphism (length = morphism dimension).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe.
 */
enum LiecatStatus liecat_compose(const struct LiecatRealization *handle,
                                 const double *g,
                                 size_t g_len,
                                 const double *h,
                                 size_t h_len,
                                 double *out,
                                 size_t out_len);

/**
 * Write the source object chart of `g` (length = object dimension).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe.
 */
enum LiecatStatus liecat_source(const struct LiecatRealization *handle,
                                const double *g,
                                size_t g_len,
                                double *out,
                                size_t out_len);

/**
 * Write the target object chart of `g` (length = object dimension).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe.
 */
enum LiecatStatus liecat_target(const struct LiecatRealization *handle,
                                const double *g,
                                size_t g_len,
                                double *out,
                                size_t out_len);

/**
 * Write the unit morphism over the object chart `x` (out length =
 * morphism dimension). Monoids have the empty object chart, so pass
 * `x = NULL, x_len = 0`.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe.
 */
enum LiecatStatus liecat_unit(const struct LiecatRealization *handle,
                              const double *x,
                              size_t x_len,
                              double *out,
                              size_t out_len);

/**
 * Compute both translation ranks of `g` and whether it is regular (both
 * ranks equal to delta).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; output pointers
 * must be valid.
 */
enum LiecatStatus liecat_rank_report(const struct LiecatRealization *handle,
                                     const double *g,
                                     size_t g_len,
                                     size_t *out_left,
                                     size_t *out_right,
                                     bool *out_regular);

/**
 * Decide invertibility of `g` (membership in the core groupoid).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; `out` must be
 * valid.
 */
enum LiecatStatus liecat_is_invertible(const struct LiecatRealization *handle,
                                       const double *g,
                                       size_t g_len,
                                       bool *out);

/**
 * Exponential of a monoid tangent vector `v` at the unit: the time-1
 * point of the left-invariant flow (out length = morphism dimension).
 * Monoid families only.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe.
 */
enum LiecatStatus liecat_exp(const struct LiecatRealization *handle,
                             const double *v,
                             size_t v_len,
                             double *out,
                             size_t out_len);

/**
 * Flow the left-invariant extension of a section from the morphism `g`
 * for the given time.
 *
 * `section_mode` is `LIECAT_SECTION_FRAME` (coefficients in the
 * target-fibre frame, length = delta) or `LIECAT_SECTION_MONOID`
 * (tangent vector at the unit, length = morphism dimension; monoids
 * only). The endpoint buffer receives the last valid point; `out_t_reached`
 * the time actually integrated; `out_exited` whether the trajectory left
 * the morphism set early.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; output pointers
 * must be valid.
 */
enum LiecatStatus liecat_flow(const struct LiecatRealization *handle,
                              uint32_t section_mode,
                              const double *section,
                              size_t section_len,
                              const double *g,
                              size_t g_len,
                              double time,
                              double *out_endpoint,
                              size_t out_endpoint_len,
                              double *out_t_reached,
                              bool *out_exited);

/**
 * Bracket of the left-invariant extensions of two sections at the unit
 * over the object chart `x` (pass `x = NULL, x_len = 0` for monoids).
 * Both sections use `LIECAT_SECTION_FRAME`/`LIECAT_SECTION_MONOID`
 * semantics via their own mode arguments. The ambient buffer (length =
 * morphism dimension) receives the bracket vector; `out_residual` the
 * distance from the ambient vector to its fibre-frame reconstruction.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; output pointers
 * must be valid.
 */
enum LiecatStatus liecat_bracket(const struct LiecatRealization *handle,
                                 uint32_t alpha_mode,
                                 const double *alpha,
                                 size_t alpha_len,
                                 uint32_t beta_mode,
                                 const double *beta,
                                 size_t beta_len,
                                 const double *x,
                                 size_t x_len,
                                 double *out_ambient,
                                 size_t out_ambient_len,
                                 double *out_residual);

/**
 * Anchor matrix at the object chart `x`: the differential of the source
 * map restricted to the target-fibre frame at the unit, written row-major
 * into `out` (object dimension x delta entries).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe.
 */
enum LiecatStatus liecat_anchor(const struct LiecatRealization *handle,
                                const double *x,
                                size_t x_len,
                                double *out,
                                size_t out_len);

/**
 * Shannon entropy (natural log) of a probability vector.
 *
 * # Safety
 *
 * `probs` must hold `probs_len` doubles; `out` must be valid.
 */
enum LiecatStatus liecat_entropy(const double *probs, size_t probs_len, double *out);

/**
 * Entropy change `S(to) - S(from)` of the process `to <- from`.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; `out` must be
 * valid.
 */
enum LiecatStatus liecat_delta_entropy(const double *to,
                                       size_t to_len,
                                       const double *from,
                                       size_t from_len,
                                       double *out);

/**
 * Second-law feasibility of the process `to <- from`: entropy must not
 * drop by more than `slack` (use 0 for the exact law).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; `out` must be
 * valid.
 */
enum LiecatStatus liecat_is_feasible(const double *to,
                                     size_t to_len,
                                     const double *from,
                                     size_t from_len,
                                     double slack,
                                     bool *out);

/**
 * Reachability inside the process category: true iff some admissible
 * process leads from `from` to `to`. Both configurations must be
 * admissible states (strictly interior, not microcanonical), otherwise
 * the call fails with `InvalidConfiguration`.
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; `out` must be
 * valid.
 */
enum LiecatStatus liecat_can_reach(const double *to,
                                   size_t to_len,
                                   const double *from,
                                   size_t from_len,
                                   bool *out);

/**
 * Gibbs equilibrium of the energy model with levels `energies` at the
 * given temperature and Boltzmann constant (`kT = boltzmann *
 * temperature`). Writes the equilibrium probabilities (length =
 * `energies_len`), the partition function, and the multiplier conjugate
 * to the energy constraint (`-1/kT`).
 *
 * # Safety
 *
 * Buffer lengths must match the pointers they describe; output pointers
 * must be valid.
 */
enum LiecatStatus liecat_gibbs(const double *energies,
                               size_t energies_len,
                               double temperature,
                               double boltzmann,
                               double *out_probs,
                               size_t out_probs_len,
                               double *out_partition,
                               double *out_multiplier);

/**
 * Message describing the most recent failing call on this thread, or the
 * empty string if that call succeeded. The pointer stays valid until the
 * next library call on the same thread.
 */
const char *liecat_last_error_message(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LIECAT_H */
