#ifndef CYINS_H
#define CYINS_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result code of every fallible call.
 */
typedef enum CyinsStatus {
  CYINS_STATUS_OK = 0,
  CYINS_STATUS_NULL_POINTER = 1,
  CYINS_STATUS_INVALID_UTF8 = 2,
  CYINS_STATUS_PARSE_ERROR = 3,
  CYINS_STATUS_VALIDATION_ERROR = 4,
  CYINS_STATUS_IO_ERROR = 5,
  CYINS_STATUS_INVALID_ARGUMENT = 6,
  CYINS_STATUS_NOT_TWO_BY_TWO = 7,
  CYINS_STATUS_SOLVER_ERROR = 8,
  CYINS_STATUS_BUFFER_TOO_SMALL = 9,
  CYINS_STATUS_PANIC = 10,
} CyinsStatus;

typedef enum CyinsCoverageKind {
  CYINS_COVERAGE_KIND_NONE = 0,
  CYINS_COVERAGE_KIND_LINEAR = 1,
  CYINS_COVERAGE_KIND_THRESHOLD = 2,
} CyinsCoverageKind;

typedef enum CyinsCase {
  CYINS_CASE_ONE = 1,
  CYINS_CASE_TWO = 2,
  CYINS_CASE_THREE = 3,
  CYINS_CASE_FOUR_A = 4,
  CYINS_CASE_FOUR_B = 5,
  CYINS_CASE_FOUR_C = 6,
} CyinsCase;

/*
 Opaque model handle.
 */
typedef struct CyinsModel CyinsModel;

/*
 Coverage function. `level` is used by `LINEAR`; `cutoff`, `low_level`
 and `high_level` by `THRESHOLD`.
 */
typedef struct CyinsCoverage {
  enum CyinsCoverageKind kind;
  double level;
  double cutoff;
  double low_level;
  double high_level;
} CyinsCoverage;

/*
 Closed-form results for a two-state, two-action model.
 */
typedef struct CyinsAnalyticSummary {
  enum CyinsCase case_id;
  double rho;
  /*
   `h(S_G,A_H,0)`, `h(S_G,A_L,0)`, `h(S_B,A_H,0)`, `h(S_B,A_L,0)`.
   */
  double h[4];
  uintptr_t num_thresholds;
  /*
   Policy switch points in increasing order; unused entries are NaN.
   */
  double thresholds[2];
  /*
   `K(R) = premium_slope * R` on the zero-profit region.
   */
  double premium_slope;
  /*
   Upper end of the zero-profit region `[0, region_hi)`, or `[0, 1]`
   when `region_hi_closed` is non-zero.
   */
  double region_hi;
  int32_t region_hi_closed;
} CyinsAnalyticSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failing call on this thread, or NULL. Valid until
 the next failing call on the same thread.
 */
const char *cyins_last_error(void);

/*
 Library version as a static NUL-terminated string.
 */
const char *cyins_version(void);

/*
 Loads a model file into `*out`.

 # Safety
 `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CyinsStatus cyins_model_load(const char *path, struct CyinsModel **out);

/*
 Parses model text into `*out`.

 # Safety
 `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CyinsStatus cyins_model_parse(const char *text, struct CyinsModel **out);

/*
 Writes the model to `path`.

 # Safety
 `model` must come from this library; `path` must be NUL-terminated.
 */
enum CyinsStatus cyins_model_save(const struct CyinsModel *model, const char *path);

/*
 Releases a model handle. NULL is ignored.

 # Safety
 `model` must come from this library and not be used afterwards.
 */
void cyins_model_free(struct CyinsModel *model);

/*
 Number of states, or 0 for NULL.

 # Safety
 `model` must be NULL or come from this library.
 */
uintptr_t cyins_model_num_states(const struct CyinsModel *model);

/*
 Number of actions, or 0 for NULL.

 # Safety
 `model` must be NULL or come from this library.
 */
uintptr_t cyins_model_num_actions(const struct CyinsModel *model);

/*
 Optimal policy (action indices) and values under `coverage`.

 Both buffers must hold `len >= num_states` entries; otherwise
 `BUFFER_TOO_SMALL` is returned and nothing is written.

 # Safety
 Pointers must be valid for `len` elements.
 */
enum CyinsStatus cyins_solve(const struct CyinsModel *model,
                             const struct CyinsCoverage *coverage,
                             double tol,
                             uintptr_t *policy_out,
                             double *values_out,
                             uintptr_t len);

/*
 Maximum premium, coverage paid and insurer profit at the initial state.
 Any output pointer may be NULL to skip it.

 # Safety
 Non-NULL pointers must be valid.
 */
enum CyinsStatus cyins_contract_terms(const struct CyinsModel *model,
                                      const struct CyinsCoverage *coverage,
                                      double *max_premium_out,
                                      double *coverage_paid_out,
                                      double *profit_out);

/*
 Closed-form classification of a two-state, two-action model.

 # Safety
 `model` must come from this library; `out` must be valid.
 */
enum CyinsStatus cyins_analytic_summary(const struct CyinsModel *model,
                                        struct CyinsAnalyticSummary *out);

/*
 Runs a contract sweep and writes it as CSV to `path`.

 `family` is `LINEAR` (grid over `[0, 1]`) or `THRESHOLD` (cutoff grid over
 `[0, 1.25 max loss]` paying `low_level`/`high_level`). `threads` caps the
 worker count; 0 uses all cores.

 # Safety
 `model` must come from this library; `path` must be NUL-terminated.
 */
enum CyinsStatus cyins_sweep_csv(const struct CyinsModel *model,
                                 enum CyinsCoverageKind family,
                                 double low_level,
                                 double high_level,
                                 uintptr_t points,
                                 uintptr_t threads,
                                 const char *path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CYINS_H */
