#ifndef FROBTHRESH_H
#define FROBTHRESH_H

#pragma once

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum FtStatus {
  FT_OK = 0,
  FT_NULL_POINTER = 1,
  FT_INVALID_UTF8 = 2,
  FT_INVALID_RING = 3,
  FT_PARSE = 4,
  FT_DOMAIN = 5,
  FT_UNSUPPORTED = 6,
  FT_OVERFLOW = 7,
  FT_UNRESOLVED = 8,
  FT_BUFFER_TOO_SMALL = 9,
  FT_PANIC = 10,
} FtStatus;

/**
 * Opaque ideal handle.
 */
typedef struct FtIdeal FtIdeal;

/**
 * Opaque polynomial ring handle.
 */
typedef struct FtRing FtRing;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *ft_last_error_message(void);

/**
 * Creates F_p[vars], `vars` comma-separated.
 *
 * # Safety
 * `vars` must be a NUL-terminated string and `out` a valid pointer.
 */
enum FtStatus ft_ring_new(uint32_t p, const char *vars, struct FtRing **out);

/**
 * # Safety
 * `ring` must come from [`ft_ring_new`] and not be freed twice.
 */
void ft_ring_free(struct FtRing *ring);

/**
 * Parses a comma-separated generator list, e.g. `"x^2, x*y"`.
 *
 * # Safety
 * `ring` must be a live handle, `text` NUL-terminated, `out` valid.
 */
enum FtStatus ft_ideal_parse(const struct FtRing *ring, const char *text, struct FtIdeal **out);

/**
 * # Safety
 * `ideal` must come from this library and not be freed twice.
 */
void ft_ideal_free(struct FtIdeal *ideal);

/**
 * Writes the canonical text `(g1, g2, ...)` of the reduced basis.
 *
 * # Safety
 * `ideal` must be live; `buf` must hold `cap` bytes or be NULL.
 */
enum FtStatus ft_ideal_to_string(const struct FtIdeal *ideal,
                                 char *buf,
                                 size_t cap,
                                 size_t *needed);

/**
 * Whether `a ⊆ b`; writes 1 or 0 to `out`.
 *
 * # Safety
 * Handles must be live and `out` valid.
 */
enum FtStatus ft_ideal_is_subset(const struct FtIdeal *a, const struct FtIdeal *b, int32_t *out);

/**
 * Certified test ideal τ(R, Δ, a^t) with Δ = a/(p^e−1)·div(f), or the
 * trivial divisor when `f` is NULL. `t` is a rational like `"5/6"`.
 *
 * # Safety
 * `ring`, `a` live; `f` NULL or NUL-terminated; `t` NUL-terminated; `out` valid.
 */
enum FtStatus ft_test_ideal(const struct FtRing *ring,
                            const char *f,
                            uint64_t coeff,
                            uint32_t e,
                            const struct FtIdeal *a,
                            const char *t,
                            struct FtIdeal **out);

/**
 * F-jumping number fjn^I(R, Δ; a) written as `"num/den"`; `target` NULL
 * means the maximal ideal. Returns `FT_UNRESOLVED` with the bracket
 * `"lo..hi"` in `buf` when the value could not be pinned down.
 *
 * # Safety
 * Pointers as in [`ft_test_ideal`]; `buf` holds `cap` bytes or is NULL.
 */
enum FtStatus ft_fpt(const struct FtRing *ring,
                     const char *f,
                     uint64_t coeff,
                     uint32_t e,
                     const struct FtIdeal *a,
                     const struct FtIdeal *target,
                     char *buf,
                     size_t cap,
                     size_t *needed);

/**
 * Runs a CLI command on a `key = value` job text and writes the JSON
 * report. `exit_code` receives the CLI exit status (0, 1 or 2).
 *
 * # Safety
 * Strings NUL-terminated; `buf` holds `cap` bytes or is NULL.
 */
enum FtStatus ft_run_job(const char *command,
                         const char *job,
                         char *buf,
                         size_t cap,
                         size_t *needed,
                         int32_t *exit_code);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FROBTHRESH_H */
