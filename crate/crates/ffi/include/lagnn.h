#ifndef LAGNN_H
#define LAGNN_H

/* Generated by cbindgen from the lagnn-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call. Mirrors the CLI exit codes: 2 for
 * configuration problems, 3 for data and I/O, 4 for numeric and shape
 * failures.
 */
typedef enum LagnnStatus {
  LAGNN_STATUS_OK = 0,
  LAGNN_STATUS_NULL_ARGUMENT = 1,
  LAGNN_STATUS_CONFIG = 2,
  LAGNN_STATUS_DATA = 3,
  LAGNN_STATUS_NUMERIC = 4,
  LAGNN_STATUS_PANIC = 5,
} LagnnStatus;

/**
 * Opaque pipeline configuration handle.
 */
typedef struct LagnnConfig LagnnConfig;

/**
 * Opaque row-major f64 matrix handle.
 */
typedef struct LagnnMatrix LagnnMatrix;

/**
 * Opaque run-report handle.
 */
typedef struct LagnnReport LagnnReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the calling thread's most recent failure. Valid until the
 * next failing call on the same thread; never null.
 */
const char *lagnn_last_error_message(void);

/**
 * Library version as a static C string.
 */
const char *lagnn_version(void);

/**
 * Raises the allocator's trim and mmap thresholds; see the core crate.
 * Call once at process start.
 */
void lagnn_tune_allocator(void);

/**
 * New configuration with the built-in defaults. Never fails.
 */
struct LagnnConfig *lagnn_config_default(void);

/**
 * Parses and validates a JSON configuration. On success `*out` owns the
 * handle; free it with `lagnn_config_free`.
 */
enum LagnnStatus lagnn_config_from_json(const char *json, struct LagnnConfig **out);

void lagnn_config_free(struct LagnnConfig *config);

/**
 * Benchmark suite (augmentation loop plus la_gcn and the configured
 * baselines) over the configured seeds.
 */
enum LagnnStatus lagnn_run_benchmark(const struct LagnnConfig *config, struct LagnnReport **out);

/**
 * Ablation suite (gcn, width, concat_self, plain_neighbor, la_gcn) over
 * the configured seeds.
 */
enum LagnnStatus lagnn_run_ablation(const struct LagnnConfig *config, struct LagnnReport **out);

/**
 * Feature-masking study over `ratios` (each in [0, 1)).
 */
enum LagnnStatus lagnn_run_mask_study(const struct LagnnConfig *config,
                                      const double *ratios,
                                      uintptr_t n_ratios,
                                      struct LagnnReport **out);

/**
 * Greedy augmentation loop for one seed. On success `*out_xbar` owns the
 * selected augmented feature matrix and `*out_report` the trace report.
 */
enum LagnnStatus lagnn_run_algorithm1(const struct LagnnConfig *config,
                                      uint64_t seed,
                                      struct LagnnMatrix **out_xbar,
                                      struct LagnnReport **out_report);

/**
 * Serializes a report as pretty-printed JSON. On success `*out` owns a
 * C string; free it with `lagnn_string_free`.
 */
enum LagnnStatus lagnn_report_to_json(const struct LagnnReport *report, char **out);

void lagnn_report_free(struct LagnnReport *report);

void lagnn_string_free(char *s);

uintptr_t lagnn_matrix_rows(const struct LagnnMatrix *matrix);

uintptr_t lagnn_matrix_cols(const struct LagnnMatrix *matrix);

/**
 * Copies the matrix row-major into `buf`, which must hold exactly
 * rows * cols doubles.
 */
enum LagnnStatus lagnn_matrix_copy(const struct LagnnMatrix *matrix, double *buf, uintptr_t len);

void lagnn_matrix_free(struct LagnnMatrix *matrix);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* LAGNN_H */
