#ifndef SPLITGAUGE_H
#define SPLITGAUGE_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum SgStatus {
  SG_STATUS_OK = 0,
  SG_STATUS_NULL_POINTER = 1,
  SG_STATUS_IO = 2,
  SG_STATUS_FORMAT = 3,
  SG_STATUS_VALIDATION = 4,
  SG_STATUS_NUMERIC = 5,
  SG_STATUS_INVALID_ARGUMENT = 6,
  SG_STATUS_PANIC = 7,
} SgStatus;

typedef enum SgVerdict {
  SG_VERDICT_MATCH = 0,
  SG_VERDICT_MISMATCH = 1,
  SG_VERDICT_INCONCLUSIVE = 2,
} SgVerdict;

typedef struct SgAuditReport SgAuditReport;

typedef struct SgFeatures SgFeatures;

typedef struct SgRemixPlan SgRemixPlan;

typedef struct SgSummary SgSummary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sg_version(void);

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length excluding the NUL, or
 * 0 when there is no error.
 */
size_t sg_last_error(char *buf, size_t len);

void sg_string_free(char *s);

/**
 * Reads a FEATMTX1 feature file.
 */
enum SgStatus sg_features_load(const char *path, struct SgFeatures **out);

/**
 * Copies a row-major `rows × dim` buffer into a feature handle.
 */
enum SgStatus sg_features_from_rows(const double *values,
                                    size_t rows,
                                    size_t dim,
                                    struct SgFeatures **out);

size_t sg_features_rows(const struct SgFeatures *f);

size_t sg_features_dim(const struct SgFeatures *f);

void sg_features_free(struct SgFeatures *f);

/**
 * Mean and unbiased covariance of a feature matrix.
 */
enum SgStatus sg_summarize(const struct SgFeatures *f, struct SgSummary **out);

void sg_summary_free(struct SgSummary *g);

/**
 * Fréchet distance between two Gaussian summaries.
 */
enum SgStatus sg_frechet(const struct SgSummary *a, const struct SgSummary *b, double *out);

/**
 * Inception Score of a row-major `rows × classes` probability matrix.
 */
enum SgStatus sg_inception_score(const double *probs, size_t rows, size_t classes, double *out);

/**
 * Runs the subset audit. `seeds` may be null with `n_seeds == 0` for the
 * default seeds; `m == 0` selects the default subset size.
 */
enum SgStatus sg_audit(const struct SgFeatures *train,
                       const struct SgFeatures *test,
                       size_t m,
                       const uint64_t *seeds,
                       size_t n_seeds,
                       struct SgAuditReport **out);

enum SgVerdict sg_audit_verdict(const struct SgAuditReport *r);

/**
 * Writes the aggregates `within_mean, within_std, cross_mean, cross_std,
 * gap_ratio, z_gap` into `out[0..6]`.
 */
enum SgStatus sg_audit_stats(const struct SgAuditReport *r, double *out);

/**
 * Report as a JSON string; free with `sg_string_free`.
 */
enum SgStatus sg_audit_report_json(const struct SgAuditReport *r, char **out);

void sg_audit_report_free(struct SgAuditReport *r);

/**
 * Class-stratified remix plan for two label arrays.
 */
enum SgStatus sg_remix(const uint32_t *train_labels,
                       size_t n_train,
                       const uint32_t *test_labels,
                       size_t n_test,
                       uint32_t classes,
                       uint64_t seed,
                       struct SgRemixPlan **out);

enum SgStatus sg_remix_plan_json(const struct SgRemixPlan *p, char **out);

void sg_remix_plan_free(struct SgRemixPlan *p);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPLITGAUGE_H */
