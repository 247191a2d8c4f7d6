#ifndef TEICH_LAB_H
#define TEICH_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every exported function.
 */
typedef enum TlStatus {
  TL_STATUS_OK = 0,
  TL_STATUS_NULL_POINTER = 1,
  TL_STATUS_INVALID_ARGUMENT = 2,
  TL_STATUS_INVALID_PERMUTATION = 3,
  TL_STATUS_INVALID_IET = 4,
  TL_STATUS_INVALID_SURFACE = 5,
  TL_STATUS_BUDGET_EXCEEDED = 6,
  TL_STATUS_QUADRATURE_UNSTABLE = 7,
  TL_STATUS_BUFFER_TOO_SMALL = 8,
  TL_STATUS_NUMERICAL = 9,
  TL_STATUS_PANIC = 10,
  TL_STATUS_OTHER = 11,
} TlStatus;

/**
 * Opaque interval exchange handle.
 */
typedef struct TlIet TlIet;

/**
 * Opaque permutation handle.
 */
typedef struct TlPermutation TlPermutation;

/**
 * Opaque translation surface handle.
 */
typedef struct TlSurface TlSurface;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static nul-terminated string.
 */
const char *tl_version(void);

/**
 * Copies the last error message of the calling thread into `buf`.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes or null; `needed` must be valid or null.
 */
enum TlStatus tl_last_error_message(char *buf, size_t cap, size_t *needed);

/**
 * Permutation from one-based images `images[0..d]`.
 *
 * # Safety
 * `images` must point to `d` values; `out` must be valid.
 */
enum TlStatus tl_permutation_new(const size_t *images, size_t d, struct TlPermutation **out);

/**
 * The reversal `(d, d-1, …, 1)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum TlStatus tl_permutation_reversal(size_t d, struct TlPermutation **out);

/**
 * # Safety
 * `p` must come from a permutation constructor and not be freed twice.
 */
void tl_permutation_free(struct TlPermutation *p);

/**
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_permutation_degree(const struct TlPermutation *p, size_t *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_permutation_is_irreducible(const struct TlPermutation *p, bool *out);

/**
 * Type-W classification; fails for reducible permutations.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_permutation_is_type_w(const struct TlPermutation *p, bool *out);

/**
 * IET with lengths given as strings (`"p/q"`, integers or finite decimals) and
 * one-based permutation images.
 *
 * # Safety
 * `lengths` and `images` must point to `d` entries; each length must be a
 * nul-terminated string; `out` must be valid.
 */
enum TlStatus tl_iet_new(const char *const *lengths,
                         const size_t *images,
                         size_t d,
                         struct TlIet **out);

/**
 * # Safety
 * `t` must come from [`tl_iet_new`] and not be freed twice.
 */
void tl_iet_free(struct TlIet *t);

/**
 * `T(x)` as an exact rational string.
 *
 * # Safety
 * `x` must be a nul-terminated string; `buf` valid for `cap` bytes or null.
 */
enum TlStatus tl_iet_evaluate(const struct TlIet *t,
                              const char *x,
                              char *buf,
                              size_t cap,
                              size_t *needed);

/**
 * Shortest interval `ε_n` of the depth-`n` partition as an exact rational string.
 *
 * # Safety
 * `buf` must be valid for `cap` bytes or null.
 */
enum TlStatus tl_iet_epsilon_n(const struct TlIet *t,
                               size_t n,
                               char *buf,
                               size_t cap,
                               size_t *needed);

/**
 * `n · ε_n` rounded to a double.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_iet_n_epsilon_n(const struct TlIet *t, size_t n, double *out);

/**
 * Built-in surface by name: `square_torus`, `regular_octagon`, `double_pentagon`.
 *
 * # Safety
 * `name` must be a nul-terminated string; `out` must be valid.
 */
enum TlStatus tl_surface_builtin(const char *name, struct TlSurface **out);

/**
 * Surface from its JSON polygon-and-gluing description.
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be valid.
 */
enum TlStatus tl_surface_from_json(const char *json, struct TlSurface **out);

/**
 * # Safety
 * `buf` must be valid for `cap` bytes or null.
 */
enum TlStatus tl_surface_to_json(const struct TlSurface *s, char *buf, size_t cap, size_t *needed);

/**
 * # Safety
 * `s` must come from a surface constructor and not be freed twice.
 */
void tl_surface_free(struct TlSurface *s);

/**
 * New surface `[[a, b], [c, d]] · s`; the matrix must have determinant 1.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_surface_act(const struct TlSurface *s,
                             double a,
                             double b,
                             double c,
                             double d,
                             struct TlSurface **out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_surface_area(const struct TlSurface *s, double *out);

/**
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_surface_genus(const struct TlSurface *s, size_t *out);

/**
 * Max-norm systole.
 *
 * # Safety
 * Pointers must be valid.
 */
enum TlStatus tl_surface_systole(const struct TlSurface *s, double *out);

/**
 * Holonomies of the saddle connections with max-norm at most `bound`, one per
 * `±` pair, as interleaved `(re, im)` pairs. `count` receives the number of
 * connections; `holonomies` must hold `2 · cap` doubles.
 *
 * # Safety
 * `holonomies` must be valid for `2 · cap` doubles or null; `count` must be valid.
 */
enum TlStatus tl_surface_saddle_connections(const struct TlSurface *s,
                                            double bound,
                                            double *holonomies,
                                            size_t cap,
                                            size_t *count);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TEICH_LAB_H */
