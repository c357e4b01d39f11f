#ifndef HENON_LAB_H
#define HENON_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Outcome of a call. Values 1 to 5 coincide with the command line exit codes.
 */
typedef enum HlStatus {
  HL_STATUS_OK = 0,
  HL_STATUS_IO = 1,
  HL_STATUS_CONFIG = 2,
  HL_STATUS_NUMERICAL = 3,
  HL_STATUS_GEOMETRY = 4,
  HL_STATUS_INCOMPLETE_ENUMERATION = 5,
  HL_STATUS_NULL_POINTER = 6,
  HL_STATUS_INVALID_STRING = 7,
  HL_STATUS_PANIC = 8,
} HlStatus;

/**
 * Regions, saddles and `a*` for one `(b, s, eps)`.
 */
typedef struct HlRegions HlRegions;

/**
 * Periodic-orbit data of one period, ready for pressure evaluations.
 */
typedef struct HlSpectrum HlSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * NUL-terminated version string with static lifetime.
 */
const char *hl_version(void);

/**
 * Length in bytes of the last error message on this thread, excluding the terminator.
 */
uintptr_t hl_last_error_length(void);

/**
 * Copies the last error message into `buf`, truncated to `cap - 1` bytes and
 * NUL-terminated. Returns the number of bytes written before the terminator.
 *
 * # Safety
 * `buf` must be null or point to `cap` writable bytes.
 */
uintptr_t hl_last_error_message(char *buf, uintptr_t cap);

/**
 * One step of the map `(x, y) -> (1 - a x^2 + sqrt(b) y, s sqrt(b) x)`.
 *
 * # Safety
 * `out_x` and `out_y` must be valid for writes.
 */
enum HlStatus hl_map_apply(double a,
                           double b,
                           int8_t s,
                           double x,
                           double y,
                           double *out_x,
                           double *out_y);

/**
 * Locates `a*` for `(b, s)` and builds the regions there. `eps` sets the loss in
 * `4 - eps`. On success `*out` owns a handle for [`hl_regions_free`].
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum HlStatus hl_regions_new(double b, int8_t s, double eps, struct HlRegions **out);

/**
 * # Safety
 * `regions` must be null or a handle from [`hl_regions_new`] not yet freed.
 */
void hl_regions_free(struct HlRegions *regions);

/**
 * # Safety
 * `regions` must be a live handle and `out` valid for writes.
 */
enum HlStatus hl_regions_a_star(const struct HlRegions *regions, double *out);

/**
 * The tangency point `zeta0`.
 *
 * # Safety
 * `regions` must be a live handle; `out_x` and `out_y` valid for writes.
 */
enum HlStatus hl_regions_zeta0(const struct HlRegions *regions, double *out_x, double *out_y);

/**
 * Point coded by `word`, written as in `10.0110` or `0110*` for a periodic word.
 * `*out_ambiguous` is set to 1 when the point sits on the two-to-one locus.
 *
 * # Safety
 * `regions` must be a live handle, `word` a NUL-terminated string and the
 * output pointers valid for writes.
 */
enum HlStatus hl_decode(const struct HlRegions *regions,
                        const char *word,
                        uintptr_t depth,
                        double *out_x,
                        double *out_y,
                        int32_t *out_ambiguous);

/**
 * Enumerates every orbit whose period divides `n`. Fails with
 * `HL_STATUS_INCOMPLETE_ENUMERATION` unless exactly `2^n` points are found.
 *
 * # Safety
 * `regions` must be a live handle and `out` valid for writes.
 */
enum HlStatus hl_spectrum_new(const struct HlRegions *regions,
                              uintptr_t n,
                              struct HlSpectrum **out);

/**
 * # Safety
 * `spectrum` must be null or a handle from [`hl_spectrum_new`] not yet freed.
 */
void hl_spectrum_free(struct HlSpectrum *spectrum);

/**
 * Number of orbits held by the spectrum.
 *
 * # Safety
 * `spectrum` must be a live handle and `out` valid for writes.
 */
enum HlStatus hl_spectrum_orbit_count(const struct HlSpectrum *spectrum, uintptr_t *out);

/**
 * `P_n(t)` together with the Lyapunov exponent of its Gibbs weights.
 *
 * # Safety
 * `spectrum` must be a live handle; `out_pressure` and `out_lyapunov` valid for writes.
 */
enum HlStatus hl_spectrum_pressure(const struct HlSpectrum *spectrum,
                                   double t,
                                   double *out_pressure,
                                   double *out_lyapunov);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HENON_LAB_H */
