#ifndef LOCINFO_H
#define LOCINFO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes; the nonzero values follow the command-line exit codes.
 */
typedef enum LocinfoStatus {
  LOCINFO_STATUS_OK = 0,
  /**
   * Null pointer or invalid UTF-8 argument.
   */
  LOCINFO_STATUS_INVALID_ARGUMENT = 1,
  LOCINFO_STATUS_VALIDATION = 2,
  LOCINFO_STATUS_PARSE = 3,
  LOCINFO_STATUS_CAP_EXCEEDED = 4,
  /**
   * A Rust panic was caught at the boundary.
   */
  LOCINFO_STATUS_INTERNAL = 5,
} LocinfoStatus;

/**
 * Validated density operator with its party split.
 */
typedef struct LocinfoState LocinfoState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Builds a catalog state. `params_json` is a JSON object such as
 * `{"p": 0.5}` and may be null.
 *
 * # Safety
 * `name` and `params_json` must be null or NUL-terminated strings; `out`
 * must be writable.
 */
enum LocinfoStatus locinfo_state_from_catalog(const char *name,
                                              const char *params_json,
                                              struct LocinfoState **out);

/**
 * Builds a state from the JSON state-file format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
enum LocinfoStatus locinfo_state_from_json(const char *json, struct LocinfoState **out);

/**
 * # Safety
 * `state` must be null or a handle from this library not yet freed.
 */
void locinfo_state_free(struct LocinfoState *state);

/**
 * Total Hilbert-space dimension.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum LocinfoStatus locinfo_state_dim(const struct LocinfoState *state, size_t *out);

/**
 * von Neumann entropy in bits.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum LocinfoStatus locinfo_state_entropy(const struct LocinfoState *state, double *out);

/**
 * Information content `N - S` in bits.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum LocinfoStatus locinfo_state_information(const struct LocinfoState *state, double *out);

/**
 * Min-entropy upper bound on the localizable information.
 *
 * # Safety
 * `state` must be a live handle; `out` must be writable.
 */
enum LocinfoStatus locinfo_upper_bound(const struct LocinfoState *state, double *out);

/**
 * Full bounds report as JSON. `config_json` uses the `bounds` part of the
 * config-file format (`{"optimizer": {...}, "max_copies": k}`) and may be
 * null for defaults.
 *
 * # Safety
 * `state` must be a live handle, `config_json` null or a NUL-terminated
 * string, and `out` writable. Free the result with `locinfo_string_free`.
 */
enum LocinfoStatus locinfo_bounds_json(const struct LocinfoState *state,
                                       const char *config_json,
                                       char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void locinfo_string_free(char *s);

/**
 * Fidelity of keeping the `floor(2^noise_bits)` most likely eigenvalue
 * strings of `n` copies of a state with the given spectrum.
 *
 * # Safety
 * `spectrum` must point to `len` readable doubles; `out` must be writable.
 */
enum LocinfoStatus locinfo_typical_fidelity(const double *spectrum,
                                            size_t len,
                                            size_t n,
                                            double noise_bits,
                                            double *out);

/**
 * Message for the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *locinfo_last_error(void);

/**
 * Library version, a static string.
 */
const char *locinfo_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOCINFO_H */
