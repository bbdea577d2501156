/* C interface of the tvslip solver. */

#pragma once

/* Generated with cbindgen:0.29.4 */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every API function.
typedef enum tvs_status {
  TVS_OK = 0,
  TVS_NULL_POINTER = 1,
  TVS_UTF8_ERROR = 2,
  TVS_INVALID_ARGUMENT = 3,
  TVS_CONFIG_ERROR = 4,
  TVS_SOLVER_FAILURE = 5,
  TVS_PATCH_TOO_LARGE = 6,
  TVS_IO_ERROR = 7,
  TVS_BUFFER_TOO_SMALL = 8,
  TVS_PANIC = 9,
} tvs_status;

// Stop reasons reported by `tvs_run_reason`.
typedef enum tvs_reason {
  TVS_REASON_STATIONARY = 0,
  TVS_REASON_MAX_OUTER_ITERS = 1,
} tvs_reason;

// Opaque handle holding a finished run.
typedef struct tvs_run tvs_run;

// Library version as a static NUL-terminated string.
const char *tvs_version(void);

// Message of the most recent error on this thread. The pointer stays
// valid until the next failing call on the same thread.
const char *tvs_last_error_message(void);

// Runs the solver from a JSON configuration string. File outputs
// configured in the JSON are ignored; results are read through the
// returned handle.
//
// # Safety
// `config_json` must be a NUL-terminated string and `out` a valid
// pointer; the returned handle must be released with `tvs_run_free`.
enum tvs_status tvs_run_config_json(const char *config_json, struct tvs_run **out);

// Final objective value split into J = F + alpha TV.
//
// # Safety
// `run` must be a live handle; out pointers may be null to skip.
enum tvs_status tvs_run_objective(const struct tvs_run *run, double *j, double *f, double *tv);

// # Safety
// `run` must be a live handle and `reason` a valid pointer.
enum tvs_status tvs_run_reason(const struct tvs_run *run, enum tvs_reason *reason);

// Number of outer iterations recorded.
//
// # Safety
// `run` must be a live handle and `n` a valid pointer.
enum tvs_status tvs_run_iterations(const struct tvs_run *run, size_t *n);

// Total number of subproblem solves.
//
// # Safety
// `run` must be a live handle and `n` a valid pointer.
enum tvs_status tvs_run_subproblems(const struct tvs_run *run, uint64_t *n);

// Number of cells of the final control field.
//
// # Safety
// `run` must be a live handle and `len` a valid pointer.
enum tvs_status tvs_run_field_len(const struct tvs_run *run, size_t *len);

// Copies the final integer control field into a caller buffer of
// `len` entries (must be at least the field length).
//
// # Safety
// `run` must be a live handle and `buf` valid for `len` writes.
enum tvs_status tvs_run_copy_field(const struct tvs_run *run, int32_t *buf, size_t len);

// Serializes a run summary (objective, reason, counters, final field)
// as JSON into a newly allocated string.
//
// # Safety
// `run` must be a live handle; the string must be released with
// `tvs_string_free`.
enum tvs_status tvs_run_summary_json(const struct tvs_run *run, char **out);

// Solves a serialized subproblem instance (same JSON schema as the
// CLI's `subsolve`) and returns the solution document as JSON.
//
// # Safety
// `instance_json` must be NUL-terminated; the returned string must be
// released with `tvs_string_free`.
enum tvs_status tvs_subsolve_json(const char *instance_json, char **out);

// Releases a run handle.
//
// # Safety
// `run` must have come from `tvs_run_config_json` and not be freed
// twice; null is a no-op.
void tvs_run_free(struct tvs_run *run);

// Releases a string returned by this library.
//
// # Safety
// `s` must have come from this library and not be freed twice; null is
// a no-op.
void tvs_string_free(char *s);
