#ifndef ILLPOSE_H
#define ILLPOSE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum IllposeNorm {
  ILLPOSE_NORM_L2 = 0,
  ILLPOSE_NORM_SOBOLEV = 1,
  ILLPOSE_NORM_HOMOGENEOUS = 2,
  ILLPOSE_NORM_MODULATION = 3,
} IllposeNorm;

typedef enum IllposeStatus {
  ILLPOSE_STATUS_OK = 0,
  ILLPOSE_STATUS_NULL_POINTER = 1,
  ILLPOSE_STATUS_INVALID_ARGUMENT = 2,
  ILLPOSE_STATUS_COMPUTATION_FAILED = 3,
  /**
   * A norm that does not converge for the given field.
   */
  ILLPOSE_STATUS_NOT_CONVERGENT = 4,
  /**
   * The experiment ran but at least one verdict failed.
   */
  ILLPOSE_STATUS_VERDICT_FAILED = 5,
  ILLPOSE_STATUS_PANIC = 6,
} IllposeStatus;

/**
 * Sampled field on a periodic grid.
 */
typedef struct IllposeField IllposeField;

/**
 * Result of a harness experiment.
 */
typedef struct IllposeReport IllposeReport;

typedef struct IllposeRegionEntry {
  bool feasible;
  bool special;
  bool has_witness;
  double theta;
  double a;
  double b;
} IllposeRegionEntry;

typedef struct IllposeInflationSummary {
  double n;
  double a;
  double r;
  double t;
  double norm_phi_hs;
  double norm_u1;
  double norm_u3_lower;
  double tail_bound;
  double ratio;
  bool dominance_holds;
} IllposeInflationSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread, or null.
 * The pointer stays valid until the next `illpose_*` call on the same thread.
 */
const char *illpose_last_error_message(void);

/**
 * Builds a field on a periodic grid of `points` samples over `[-length/2, length/2)`.
 *
 * # Safety
 * `re` and `im` must each point to `points` readable doubles; `im` may be
 * null for a real field. `out` must be a valid pointer to write to.
 */
enum IllposeStatus illpose_field_new(double length,
                                     uintptr_t points,
                                     const double *re,
                                     const double *im,
                                     struct IllposeField **out);

/**
 * # Safety
 * `field` must be null or a handle from this library that was not yet freed.
 */
void illpose_field_free(struct IllposeField *field);

/**
 * Number of samples, 0 for a null handle.
 *
 * # Safety
 * `field` must be null or a live handle.
 */
uintptr_t illpose_field_len(const struct IllposeField *field);

/**
 * Copies the samples into `re` and `im`, each of length `len`.
 *
 * # Safety
 * `field` must be a live handle; `re` and `im` must point to `len` writable doubles.
 */
enum IllposeStatus illpose_field_values(const struct IllposeField *field,
                                        double *re,
                                        double *im,
                                        uintptr_t len);

/**
 * Evaluates a norm. `param` is `s` for the Sobolev norms and `A` for the
 * modulation norm; it is ignored for `L2`.
 *
 * # Safety
 * `field` must be a live handle and `out` a valid pointer.
 */
enum IllposeStatus illpose_field_norm(const struct IllposeField *field,
                                      enum IllposeNorm kind,
                                      double param,
                                      double *out);

/**
 * Runs the split-step integrator for `i u_t - |D|^β u = μ|u|²u` up to `t_final`.
 *
 * # Safety
 * `field` must be a live handle and `out` a valid pointer.
 */
enum IllposeStatus illpose_evolve(const struct IllposeField *field,
                                  double beta,
                                  double mu,
                                  double dt,
                                  double t_final,
                                  struct IllposeField **out);

/**
 * Closed-form `Ḣ^s` norm of `1/(x + ip)`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IllposeStatus illpose_cauchy_hs_norm(double p, double s, double *out);

/**
 * Feasibility of norm inflation at `(β, s)`, with a witness `(θ, a, b)` when one exists.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IllposeStatus illpose_region_entry(double beta, double s, struct IllposeRegionEntry *out);

/**
 * One point of the inflation sweep with the default setup and the series solution.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum IllposeStatus illpose_inflation_run(double theta,
                                         double a,
                                         double b,
                                         double beta,
                                         double s,
                                         double n,
                                         struct IllposeInflationSummary *out);

/**
 * Runs a harness experiment by name with `--key value` style arguments.
 * When `out_dir` is non-null the report files are written below it.
 * A run whose verdicts fail still produces a report and returns
 * `VerdictFailed`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `argv` must point to `argc`
 * NUL-terminated strings (or be null when `argc` is 0); `out_dir` must be
 * null or NUL-terminated; `out` must be a valid pointer.
 */
enum IllposeStatus illpose_run_experiment(const char *name,
                                          const char *const *argv,
                                          uintptr_t argc,
                                          const char *out_dir,
                                          struct IllposeReport **out);

/**
 * # Safety
 * `report` must be null or a handle from this library that was not yet freed.
 */
void illpose_report_free(struct IllposeReport *report);

/**
 * Number of verdicts, 0 for a null handle.
 *
 * # Safety
 * `report` must be null or a live handle.
 */
uintptr_t illpose_report_verdict_count(const struct IllposeReport *report);

/**
 * Whether verdict `index` passed. Writes its name as a new string that the
 * caller releases with [`illpose_string_free`].
 *
 * # Safety
 * `report` must be a live handle; `passed` and `name` must be valid pointers.
 */
enum IllposeStatus illpose_report_verdict(const struct IllposeReport *report,
                                          uintptr_t index,
                                          bool *passed,
                                          char **name);

/**
 * # Safety
 * `s` must be null or a string returned by this library that was not yet freed.
 */
void illpose_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ILLPOSE_H */
