#ifndef QSCADA_H
#define QSCADA_H

/* Generated by cbindgen from qscada-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code for every fallible call. `Ok` is zero so C callers can treat
 * the status as a boolean failure flag.
 */
typedef enum QscadaStatus {
  QSCADA_STATUS_OK = 0,
  QSCADA_STATUS_NULL_POINTER = 1,
  QSCADA_STATUS_INVALID_ARGUMENT = 2,
  QSCADA_STATUS_INDEX_OUT_OF_RANGE = 3,
  QSCADA_STATUS_BUFFER_TOO_SMALL = 4,
  QSCADA_STATUS_IO = 5,
  QSCADA_STATUS_INTERNAL = 6,
} QscadaStatus;

/**
 * A completed series of key exchange sessions. Opaque to C.
 */
typedef struct QscadaSessions QscadaSessions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Crate version as a static NUL-terminated string. Never null.
 */
const char *qscada_version(void);

/**
 * Static NUL-terminated description of a status code. Never null.
 */
const char *qscada_status_message(enum QscadaStatus status);

/**
 * Runs `sessions` key exchange sessions deterministically from `seed`.
 * `eve_prob` is the per-qubit intercept probability; zero disables the
 * eavesdropper entirely. On success `*out` receives a new handle.
 *
 * # Safety
 * `out` must be valid for writing one pointer. The handle stored there owns
 * heap memory and must be passed to [`qscada_sessions_free`] exactly once.
 */
enum QscadaStatus qscada_sessions_run(uint64_t seed,
                                      size_t sessions,
                                      size_t raw_bits,
                                      double eve_prob,
                                      double threshold,
                                      double sample_fraction,
                                      struct QscadaSessions **out);

/**
 * Releases a handle from [`qscada_sessions_run`]. Null is a no-op.
 *
 * # Safety
 * `handle` must be null or a not-yet-freed pointer obtained from
 * [`qscada_sessions_run`].
 */
void qscada_sessions_free(struct QscadaSessions *handle);

/**
 * Number of sessions held by the handle.
 *
 * # Safety
 * `handle` must be a live handle or null; `out` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_count(const struct QscadaSessions *handle, size_t *out);

/**
 * Estimated error rate of one session's disclosed sample.
 *
 * # Safety
 * `handle` must be a live handle or null; `out` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_qber(const struct QscadaSessions *handle,
                                       size_t index,
                                       double *out);

/**
 * Whether the session's error rate crossed the detection threshold.
 *
 * # Safety
 * `handle` must be a live handle or null; `out` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_flagged(const struct QscadaSessions *handle,
                                          size_t index,
                                          bool *out);

/**
 * Whether reconciliation converged to matching keys.
 *
 * # Safety
 * `handle` must be a live handle or null; `out` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_converged(const struct QscadaSessions *handle,
                                            size_t index,
                                            bool *out);

/**
 * Parity bits disclosed during reconciliation.
 *
 * # Safety
 * `handle` must be a live handle or null; `out` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_leaked_bits(const struct QscadaSessions *handle,
                                              size_t index,
                                              size_t *out);

/**
 * Length in bits of the session's final key.
 *
 * # Safety
 * `handle` must be a live handle or null; `out` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_key_len(const struct QscadaSessions *handle,
                                          size_t index,
                                          size_t *out);

/**
 * Copies the session's final key as 0/1 bytes into `buf`, writing the bit
 * count to `written`. Size `buf` with [`qscada_sessions_key_len`].
 *
 * # Safety
 * `handle` must be a live handle or null; `buf` must be valid for writing
 * `capacity` bytes; `written` must be valid for writing.
 */
enum QscadaStatus qscada_sessions_key_bits(const struct QscadaSessions *handle,
                                           size_t index,
                                           uint8_t *buf,
                                           size_t capacity,
                                           size_t *written);

/**
 * In-place key-controlled complement over `n_values` doubles: positions
 * whose (cyclically expanded) key bit is 1 become `1 - v`. The transform is
 * its own inverse. Key bytes must be 0 or 1.
 *
 * # Safety
 * `values` must be valid for reading and writing `n_values` doubles;
 * `key_bits` must be valid for reading `n_key_bits` bytes.
 */
enum QscadaStatus qscada_transform(double *values,
                                   size_t n_values,
                                   const uint8_t *key_bits,
                                   size_t n_key_bits);

/**
 * Encodes `n_features` values in [0, 1] and writes the statevector as
 * interleaved (re, im) pairs in basis order, `2 * 2^n_features` doubles
 * total. `capacity` below that is rejected; excess capacity is left as is.
 *
 * # Safety
 * `features` must be valid for reading `n_features` doubles; `amplitudes`
 * must be valid for writing `capacity` doubles.
 */
enum QscadaStatus qscada_encode_amplitudes(const double *features,
                                           size_t n_features,
                                           double theta_max,
                                           double *amplitudes,
                                           size_t capacity);

/**
 * Runs `steps` walk steps over the graph and writes one marginal probability
 * per node. `edges` holds `n_edges` (u, v) pairs flattened; it may be null
 * only when `n_edges` is 0. `capacity` must be at least `n_nodes`.
 *
 * # Safety
 * `edges` must be valid for reading `2 * n_edges` u32 values (or null with
 * `n_edges` 0); `out` must be valid for writing `capacity` doubles.
 */
enum QscadaStatus qscada_walk_marginals(size_t n_nodes,
                                        size_t marked,
                                        const uint32_t *edges,
                                        size_t n_edges,
                                        size_t steps,
                                        double *out,
                                        size_t capacity);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QSCADA_H */
