/* C interface to the bianchi curvature verification engine. */

#ifndef BIANCHI_H
#define BIANCHI_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status and verdict codes shared across the C surface.
 */
typedef enum BianchiCode {
  /**
   * Operation succeeded.
   */
  BianchiCode_Ok = 0,
  /**
   * Einstein verdict from the classifier.
   */
  BianchiCode_VerdictEinstein = 1,
  /**
   * Flat Gaussian verdict.
   */
  BianchiCode_VerdictGaussian = 2,
  /**
   * Plane-by-sphere product verdict.
   */
  BianchiCode_VerdictR2xS2 = 3,
  /**
   * Round cylinder verdict.
   */
  BianchiCode_VerdictRxS3 = 4,
  /**
   * Soliton but not a recognized rigid model.
   */
  BianchiCode_VerdictNotRigid = 5,
  /**
   * Not a gradient shrinking soliton at all.
   */
  BianchiCode_VerdictNotASoliton = 6,
  /**
   * A pointer argument was null or malformed.
   */
  BianchiCode_ErrNullArgument = -1,
  /**
   * A string argument was not valid UTF-8.
   */
  BianchiCode_ErrUtf8 = -2,
  /**
   * Model lookup, parsing or validation failed.
   */
  BianchiCode_ErrModel = -3,
  /**
   * Check evaluation failed.
   */
  BianchiCode_ErrVerify = -4,
  /**
   * The operation panicked; state is still consistent.
   */
  BianchiCode_ErrPanic = -5,
} BianchiCode;

/**
 * Opaque model handle.
 */
typedef struct BianchiModel BianchiModel;

/**
 * Opaque report handle holding the rows of one verification run.
 */
typedef struct BianchiReport BianchiReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Returns the engine version as a static string; do not free.
 */
const char *bianchi_version(void);

/**
 * Returns the most recent error message on this thread as a new string,
 * or null when no error is recorded. Free with `bianchi_string_free`.
 */
char *bianchi_last_error(void);

/**
 * Frees a string allocated by this library.
 *
 * # Safety
 * `s` must have been returned by a `bianchi_*` function documented to
 * allocate, and must not be freed twice.
 */
void bianchi_string_free(char *s);

/**
 * Loads a builtin catalog model by name; null on failure.
 *
 * # Safety
 * `name` must point to a NUL-terminated string.
 */
struct BianchiModel *bianchi_model_builtin(const char *name);

/**
 * Loads and validates a model file; null on failure.
 *
 * # Safety
 * `path` must point to a NUL-terminated string.
 */
struct BianchiModel *bianchi_model_from_file(const char *path);

/**
 * Parses and validates a model from JSON text; null on failure.
 *
 * # Safety
 * `json` must point to a NUL-terminated string.
 */
struct BianchiModel *bianchi_model_from_json(const char *json);

/**
 * Releases a model handle.
 *
 * # Safety
 * `model` must come from a `bianchi_model_*` constructor and must not be
 * used afterwards.
 */
void bianchi_model_free(struct BianchiModel *model);

/**
 * Chart dimension of a model, or 0 for a null handle.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
uint32_t bianchi_model_dimension(const struct BianchiModel *model);

/**
 * Model name as a new string; free with `bianchi_string_free`.
 *
 * # Safety
 * `model` must be a live handle or null.
 */
char *bianchi_model_name(const struct BianchiModel *model);

/**
 * Runs every check of a tier over a seeded sample plan. `tol <= 0` keeps
 * each check's default tolerance. Null on failure.
 *
 * # Safety
 * `model` must be a live handle.
 */
struct BianchiReport *bianchi_run_tier(const struct BianchiModel *model,
                                       char tier,
                                       uint32_t points,
                                       uint64_t seed,
                                       double tol);

/**
 * Runs a single check by id; inapplicable checks yield a row with zero
 * points rather than an error.
 *
 * # Safety
 * `model` must be a live handle; `id` must be NUL-terminated.
 */
struct BianchiReport *bianchi_run_check(const struct BianchiModel *model,
                                        const char *id,
                                        uint32_t points,
                                        uint64_t seed,
                                        double tol);

/**
 * Number of rows in a report; 0 for null.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
uintptr_t bianchi_report_len(const struct BianchiReport *report);

/**
 * True when every applicable row passed.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
bool bianchi_report_pass(const struct BianchiReport *report);

/**
 * Report rows as a JSON array (fixed schema: check_id, model, points,
 * max_residual, mean_residual, argmax_point, pass, tolerance). Free with
 * `bianchi_string_free`.
 *
 * # Safety
 * `report` must be a live handle or null.
 */
char *bianchi_report_json(const struct BianchiReport *report);

/**
 * Releases a report handle.
 *
 * # Safety
 * `report` must come from a run function and must not be used afterwards.
 */
void bianchi_report_free(struct BianchiReport *report);

/**
 * Classifies a four-dimensional model; returns a verdict code or a
 * negative error code.
 *
 * # Safety
 * `model` must be a live handle.
 */
enum BianchiCode bianchi_classify(const struct BianchiModel *model,
                                  uint32_t points,
                                  uint64_t seed,
                                  double tol);

/**
 * Full classification result as JSON; null on failure. Free with
 * `bianchi_string_free`.
 *
 * # Safety
 * `model` must be a live handle.
 */
char *bianchi_classify_json(const struct BianchiModel *model,
                            uint32_t points,
                            uint64_t seed,
                            double tol);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BIANCHI_H */
