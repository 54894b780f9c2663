#ifndef ERASURE_H
#define ERASURE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible function.
typedef enum ErasureStatus {
  ERASURE_STATUS_OK = 0,
  ERASURE_STATUS_NULL_POINTER = 1,
  ERASURE_STATUS_INVALID_UTF8 = 2,
  ERASURE_STATUS_PARSE = 3,
  ERASURE_STATUS_LAYOUT = 4,
  ERASURE_STATUS_INVALID_STATE = 5,
  ERASURE_STATUS_DOMAIN = 6,
  ERASURE_STATUS_SUPPORT = 7,
  ERASURE_STATUS_UNSUPPORTED = 8,
  ERASURE_STATUS_NON_CONVERGENCE = 9,
  ERASURE_STATUS_NUMERICAL = 10,
  ERASURE_STATUS_CONFIG = 11,
  ERASURE_STATUS_IO = 12,
  ERASURE_STATUS_PANIC = 13,
  ERASURE_STATUS_OTHER = 14,
} ErasureStatus;

// Opaque free-state family.
typedef struct ErasureFreeSet ErasureFreeSet;

// Opaque density matrix on labeled registers.
typedef struct ErasureState ErasureState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *erasure_version(void);

// Message of the last failed call on this thread, or NULL. Valid until the
// next call into the library from the same thread.
const char *erasure_last_error(void);

// Releases a string returned by the library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been released.
void erasure_string_free(char *s);

// Parses a state from its text form (`layout` header line, then matrix rows).
//
// # Safety
// `src` must be a NUL-terminated string and `out_state` a valid pointer.
enum ErasureStatus erasure_state_parse(const char *src, struct ErasureState **out_state);

// Releases a state. NULL is ignored.
//
// # Safety
// `state` must come from this library and not have been released.
void erasure_state_free(struct ErasureState *state);

// Text form of a state; release with [`erasure_string_free`].
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_state_to_text(const struct ErasureState *state, char **out_text);

// Total dimension of a state.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_state_dim(const struct ErasureState *state, size_t *out_dim);

// Tensor product; the two layouts must have disjoint labels.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_state_tensor(const struct ErasureState *a,
                                        const struct ErasureState *b,
                                        struct ErasureState **out_state);

// Traces out the registers named in `labels`, a comma-separated list.
//
// # Safety
// Pointers must be valid and `labels` NUL-terminated.
enum ErasureStatus erasure_state_partial_trace(const struct ErasureState *state,
                                               const char *labels,
                                               struct ErasureState **out_state);

// Root fidelity `‖√a √b‖₁`.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_fidelity(const struct ErasureState *a,
                                    const struct ErasureState *b,
                                    double *out_value);

// Purified distance `√(1 − F²)`.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_purified_distance(const struct ErasureState *a,
                                             const struct ErasureState *b,
                                             double *out_value);

// Trace norm `‖a − b‖₁`.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_trace_distance(const struct ErasureState *a,
                                          const struct ErasureState *b,
                                          double *out_value);

// Relative entropy in bits; `+inf` when the support condition fails.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_relative_entropy(const struct ErasureState *rho,
                                            const struct ErasureState *sigma,
                                            double *out_value);

// Max-relative entropy in bits.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_dmax(const struct ErasureState *rho,
                                const struct ErasureState *sigma,
                                double *out_value);

// Smooth max-relative entropy over the purified-distance ball of radius `eps`.
// `out_lower` may be NULL; otherwise it receives the certified lower end.
//
// # Safety
// `rho`, `sigma` and `out_value` must be valid.
enum ErasureStatus erasure_smooth_dmax(const struct ErasureState *rho,
                                       const struct ErasureState *sigma,
                                       double eps,
                                       double *out_value,
                                       double *out_lower);

// Builds a free-state family from the TOML body of a `[free_set]` table,
// e.g. `family = "coherence"`. Relative file paths resolve against the
// working directory.
//
// # Safety
// `toml_text` must be NUL-terminated and `out_set` valid.
enum ErasureStatus erasure_free_set_from_toml(const char *toml_text,
                                              struct ErasureFreeSet **out_set);

// Releases a free-state family. NULL is ignored.
//
// # Safety
// `set` must come from this library and not have been released.
void erasure_free_set_free(struct ErasureFreeSet *set);

// Writes 1 to `out_member` when `state` lies in the family, else 0.
//
// # Safety
// Pointers must be valid.
enum ErasureStatus erasure_free_set_contains(const struct ErasureFreeSet *set,
                                             const struct ErasureState *state,
                                             int *out_member);

// Relative entropy to the closest free state, in bits. `out_lower` may be NULL.
//
// # Safety
// `set`, `state` and `out_value` must be valid.
enum ErasureStatus erasure_free_set_relent(const struct ErasureFreeSet *set,
                                           const struct ErasureState *state,
                                           double *out_value,
                                           double *out_lower);

// Smooth max-relative entropy to the family, minimized over free states.
// `out_lower` may be NULL.
//
// # Safety
// `set`, `state` and `out_value` must be valid.
enum ErasureStatus erasure_free_set_smooth_dmax(const struct ErasureFreeSet *set,
                                                const struct ErasureState *state,
                                                double eps,
                                                double *out_value,
                                                double *out_lower);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ERASURE_H */
