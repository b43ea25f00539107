#ifndef QAGS_H
#define QAGS_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes returned by every fallible function.
typedef enum QagsStatus {
  QAGS_STATUS_OK = 0,
  QAGS_STATUS_NULL_POINTER = 1,
  QAGS_STATUS_INVALID_INPUT = 2,
  QAGS_STATUS_INVALID_ARITY = 3,
  QAGS_STATUS_UNKNOWN_FUNCTION = 4,
  QAGS_STATUS_CONFIG = 5,
  QAGS_STATUS_EVALUATION = 6,
  QAGS_STATUS_REFINEMENT = 7,
  QAGS_STATUS_INTERNAL = 8,
} QagsStatus;

// Encoding law selector for `QagsOptions::law`.
typedef enum QagsLaw {
  QAGS_LAW_BOLTZMANN_PROBABILITY = 0,
  QAGS_LAW_BOLTZMANN_AMPLITUDE = 1,
} QagsLaw;

// Opaque objective function handle.
typedef struct QagsObjective QagsObjective;

// Opaque run report handle.
typedef struct QagsReport QagsReport;

// Tunables for `qags_run`. Obtain defaults from `qags_options_default`.
typedef struct QagsOptions {
  uint32_t qubits_per_dim;
  double quantile;
  enum QagsLaw law;
  // 0 reads probabilities exactly.
  uint64_t shots;
  uint64_t seed;
  size_t k_max;
  double delta;
  double entropy_floor;
  uint32_t max_qubits;
} QagsOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *qags_last_error_message(void);

// Creates a registry benchmark by name. `shift` (length `shift_len`) is
// only used by `sphere`; pass null for the origin.
//
// # Safety
// `name` must be a NUL-terminated string; `shift` must point to
// `shift_len` doubles or be null; `out` must be writable.
enum QagsStatus qags_objective_new(const char *name,
                                   size_t dim,
                                   const double *shift,
                                   size_t shift_len,
                                   struct QagsObjective **out);

// Wraps a C callback as an objective. The callback must not unwind and
// must be safe to call from the thread that runs the optimizer.
//
// # Safety
// `name` must be a NUL-terminated string; `user_data` must outlive the
// returned handle; `out` must be writable.
enum QagsStatus qags_objective_from_callback(const char *name,
                                             size_t dim,
                                             double (*callback)(const double *x,
                                                                size_t len,
                                                                void *user_data),
                                             void *user_data,
                                             struct QagsObjective **out);

// Releases an objective. Null is ignored.
//
// # Safety
// `obj` must come from a `qags_objective_*` constructor and not be freed twice.
void qags_objective_free(struct QagsObjective *obj);

// Evaluates the objective at `x` (length `len`).
//
// # Safety
// `obj` must be a live handle, `x` must point to `len` doubles, `out` writable.
enum QagsStatus qags_objective_evaluate(const struct QagsObjective *obj,
                                        const double *x,
                                        size_t len,
                                        double *out);

// Default options for a given register width per dimension.
struct QagsOptions qags_options_default(uint32_t qubits_per_dim);

// Runs QAGS over the box `[lower, upper]` (each of length `dim`).
// `options` may be null to use `qags_options_default` with 5 qubits.
//
// # Safety
// Pointers must be live and sized as described; `out` must be writable.
enum QagsStatus qags_run(const struct QagsObjective *obj,
                         const double *lower,
                         const double *upper,
                         size_t dim,
                         const struct QagsOptions *options,
                         struct QagsReport **out);

// Runs the adaptive grid search baseline with default settings.
//
// # Safety
// Pointers must be live and sized as described; `out` must be writable.
enum QagsStatus qags_run_ags(const struct QagsObjective *obj,
                             const double *lower,
                             const double *upper,
                             size_t dim,
                             struct QagsReport **out);

// Releases a report. Null is ignored.
//
// # Safety
// `report` must come from `qags_run*` and not be freed twice.
void qags_report_free(struct QagsReport *report);

// Dimension of the reported point, or 0 for null.
//
// # Safety
// `report` must be null or a live handle.
size_t qags_report_dim(const struct QagsReport *report);

// Best objective value found, or NaN for null.
//
// # Safety
// `report` must be null or a live handle.
double qags_report_found_value(const struct QagsReport *report);

// Number of contraction iterations, or 0 for null.
//
// # Safety
// `report` must be null or a live handle.
size_t qags_report_iterations(const struct QagsReport *report);

// Total objective evaluations, or 0 for null.
//
// # Safety
// `report` must be null or a live handle.
uint64_t qags_report_total_evals(const struct QagsReport *report);

// Peak bytes held by the search model, or 0 for null.
//
// # Safety
// `report` must be null or a live handle.
uint64_t qags_report_peak_model_bytes(const struct QagsReport *report);

// Copies the found point into `buf`, which must hold `len == dim` doubles.
//
// # Safety
// `report` must be a live handle and `buf` must point to `len` doubles.
enum QagsStatus qags_report_found_point(const struct QagsReport *report, double *buf, size_t len);

// Serializes the report as JSON. Free the string with `qags_string_free`.
//
// # Safety
// `report` must be a live handle and `out` writable.
enum QagsStatus qags_report_to_json(const struct QagsReport *report, char **out);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void qags_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QAGS_H */
