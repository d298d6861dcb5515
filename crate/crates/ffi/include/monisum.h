#ifndef MONISUM_H
#define MONISUM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum MonisumStatus {
  MONISUM_STATUS_OK = 0,
  MONISUM_STATUS_NULL_POINTER = 1,
  MONISUM_STATUS_INVALID_ARGUMENT = 2,
  MONISUM_STATUS_IO = 3,
  MONISUM_STATUS_PARSE = 4,
  MONISUM_STATUS_CONFIG = 5,
  MONISUM_STATUS_INSUFFICIENT_DATA = 6,
  MONISUM_STATUS_DIMENSION_MISMATCH = 7,
  MONISUM_STATUS_UTF8 = 8,
  MONISUM_STATUS_PANIC = 9,
} MonisumStatus;

/**
 * Input normalization for [`monisum_trace_load_csv`].
 */
typedef enum MonisumNormalization {
  MONISUM_NORMALIZATION_STRICT = 0,
  MONISUM_NORMALIZATION_CLAMP = 1,
  MONISUM_NORMALIZATION_MAX_DIVIDE = 2,
} MonisumNormalization;

typedef struct MonisumConfig MonisumConfig;

typedef struct MonisumRun MonisumRun;

typedef struct MonisumTrace MonisumTrace;

typedef struct MonisumTransmitter MonisumTransmitter;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *monisum_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *monisum_version(void);

/**
 * # Safety
 * `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum MonisumStatus monisum_trace_load_csv(const char *path,
                                          enum MonisumNormalization normalization,
                                          struct MonisumTrace **out);

/**
 * Synthetic grouped trace with the default signal shape.
 *
 * # Safety
 * `out` must be a writable pointer.
 */
enum MonisumStatus monisum_trace_generate(size_t n_nodes,
                                          size_t n_steps,
                                          size_t n_resources,
                                          size_t n_groups,
                                          double switch_probability,
                                          double noise_std,
                                          uint64_t seed,
                                          struct MonisumTrace **out);

/**
 * # Safety
 * `trace` must be a live handle; the out pointers must be writable.
 */
enum MonisumStatus monisum_trace_shape(const struct MonisumTrace *trace,
                                       size_t *n_steps,
                                       size_t *n_nodes,
                                       size_t *n_resources);

/**
 * Value at 0-based step `t`.
 *
 * # Safety
 * `trace` must be a live handle and `out` writable.
 */
enum MonisumStatus monisum_trace_value(const struct MonisumTrace *trace,
                                       size_t t,
                                       size_t node,
                                       size_t resource,
                                       double *out);

/**
 * # Safety
 * `trace` must be a live handle and `path` a NUL-terminated string.
 */
enum MonisumStatus monisum_trace_write_csv(const struct MonisumTrace *trace, const char *path);

/**
 * # Safety
 * `trace` must be null or a handle not yet freed.
 */
void monisum_trace_free(struct MonisumTrace *trace);

/**
 * Default configuration.
 *
 * # Safety
 * `out` must be writable.
 */
enum MonisumStatus monisum_config_new(struct MonisumConfig **out);

/**
 * Reads a `key = value` config file.
 *
 * # Safety
 * `path` must be NUL-terminated and `out` writable.
 */
enum MonisumStatus monisum_config_load(const char *path, struct MonisumConfig **out);

/**
 * Sets one field by its config-file key.
 *
 * # Safety
 * `config` must be a live handle; `key` and `value` NUL-terminated.
 */
enum MonisumStatus monisum_config_set(struct MonisumConfig *config,
                                      const char *key,
                                      const char *value);

/**
 * # Safety
 * `config` must be null or a handle not yet freed.
 */
void monisum_config_free(struct MonisumConfig *config);

/**
 * Runs the full simulation.
 *
 * # Safety
 * `config` and `trace` must be live handles and `out` writable.
 */
enum MonisumStatus monisum_run(const struct MonisumConfig *config,
                               const struct MonisumTrace *trace,
                               struct MonisumRun **out);

/**
 * Time-averaged RMSE at horizon `h` for a resource name or `all`.
 *
 * # Safety
 * `run` must be a live handle, `resource` NUL-terminated, `out` writable.
 */
enum MonisumStatus monisum_run_time_avg_rmse(const struct MonisumRun *run,
                                             size_t h,
                                             const char *resource,
                                             double *out);

/**
 * # Safety
 * `run` must be a live handle, `resource` NUL-terminated, `out` writable.
 */
enum MonisumStatus monisum_run_objective(const struct MonisumRun *run,
                                         const char *resource,
                                         double *out);

/**
 * # Safety
 * `run` must be a live handle, `resource` NUL-terminated, `out` writable.
 */
enum MonisumStatus monisum_run_intermediate_rmse(const struct MonisumRun *run,
                                                 const char *resource,
                                                 double *out);

/**
 * Empirical transmission frequency of one node.
 *
 * # Safety
 * `run` must be a live handle and `out` writable.
 */
enum MonisumStatus monisum_run_frequency(const struct MonisumRun *run, size_t node, double *out);

/**
 * Writes the run's manifest and CSVs into `dir`.
 *
 * # Safety
 * `run` must be a live handle and `dir` NUL-terminated.
 */
enum MonisumStatus monisum_run_write(const struct MonisumRun *run, const char *dir);

/**
 * # Safety
 * `run` must be null or a handle not yet freed.
 */
void monisum_run_free(struct MonisumRun *run);

/**
 * One node's adaptive transmitter.
 *
 * # Safety
 * `out` must be writable.
 */
enum MonisumStatus monisum_transmitter_new(double budget,
                                           double v0,
                                           double gamma,
                                           size_t dim,
                                           struct MonisumTransmitter **out);

/**
 * Decides for step `t` (1-based) and updates the queue.
 *
 * # Safety
 * `tx` must be a live handle, `x` must point to `len` doubles and
 * `transmit` must be writable.
 */
enum MonisumStatus monisum_transmitter_step(struct MonisumTransmitter *tx,
                                            const double *x,
                                            size_t len,
                                            size_t t,
                                            bool *transmit);

/**
 * # Safety
 * `tx` must be a live handle and `out` writable.
 */
enum MonisumStatus monisum_transmitter_queue(const struct MonisumTransmitter *tx, double *out);

/**
 * # Safety
 * `tx` must be null or a handle not yet freed.
 */
void monisum_transmitter_free(struct MonisumTransmitter *tx);

/**
 * Maximum-weight label permutation for a row-major `k × k` similarity
 * matrix: fresh cluster `r` gets label `perm[r]`.
 *
 * # Safety
 * `weights` must point to `k * k` doubles and `perm` to `k` writable
 * entries.
 */
enum MonisumStatus monisum_match_labels(const double *weights, size_t k, size_t *perm);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MONISUM_H */
