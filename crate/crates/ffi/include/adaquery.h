#ifndef ADAQUERY_H
#define ADAQUERY_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum aq_status {
  AQ_STATUS_OK = 0,
  AQ_STATUS_NULL_ARGUMENT = 1,
  AQ_STATUS_INVALID_ARGUMENT = 2,
  AQ_STATUS_UNKNOWN_FEATURE = 3,
  AQ_STATUS_IO = 4,
  /**
   * The campaign stopped on a Fatal target error; partial results were written.
   */
  AQ_STATUS_FATAL = 5,
  AQ_STATUS_PANIC = 6,
} aq_status;

typedef enum aq_feature_state {
  AQ_FEATURE_STATE_UNKNOWN = 0,
  AQ_FEATURE_STATE_SUPPORTED = 1,
  AQ_FEATURE_STATE_UNSUPPORTED = 2,
} aq_feature_state;

typedef enum aq_oracle {
  AQ_ORACLE_TLP = 0,
  AQ_ORACLE_NOREC = 1,
  AQ_ORACLE_BOTH = 2,
} aq_oracle;

/**
 * Feature catalog.
 */
typedef struct aq_catalog aq_catalog;

/**
 * Feature sets of bugs classified New so far.
 */
typedef struct aq_history aq_history;

/**
 * Per-feature execution counters and states.
 */
typedef struct aq_stats aq_stats;

/**
 * Result of triaging one bug.
 */
typedef struct aq_classification {
  bool is_new;
  /**
   * Id of the earlier bug when `is_new` is false.
   */
  uint64_t duplicate_of;
} aq_classification;

/**
 * Campaign settings. Start from [`aq_campaign_options_default`].
 */
typedef struct aq_campaign_options {
  /**
   * `scheme:config`, e.g. `sqlite::memory:`.
   */
  const char *target;
  const char *out_dir;
  /**
   * May be null.
   */
  const char *stats_path;
  enum aq_oracle oracle;
  uint64_t seed;
  double threshold_p;
  uint64_t interval;
  uint32_t max_depth;
  uint32_t workers;
  /**
   * Statements to run; 0 means unbounded, in which case `duration_secs` must be set.
   */
  uint64_t budget;
  uint64_t duration_secs;
  bool feedback;
  bool isolate_stats;
} aq_campaign_options;

typedef struct aq_campaign_summary {
  uint64_t statements;
  uint64_t statements_succeeded;
  uint64_t checks;
  uint64_t checks_succeeded;
  uint64_t windows;
  uint64_t bugs;
  uint64_t bugs_new;
  uint64_t unsupported_features;
  /**
   * Validity of the last window, or 0 without windows.
   */
  double final_validity;
} aq_campaign_summary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty if none. Valid
 * until the next failing call on the same thread.
 */
const char *aq_last_error(void);

/**
 * Probability that a feature's success rate lies below `p`, given `y`
 * successes in `n` executions.
 */
enum aq_status aq_prob_below_threshold(uint64_t n, uint64_t y, double p, double *out);

enum aq_status aq_catalog_default(struct aq_catalog **out);

enum aq_status aq_catalog_load(const char *path, struct aq_catalog **out);

enum aq_status aq_catalog_len(const struct aq_catalog *catalog, size_t *out);

void aq_catalog_free(struct aq_catalog *catalog);

/**
 * Empty statistics over `catalog`. The catalog handle may be freed afterwards.
 */
enum aq_status aq_stats_new(const struct aq_catalog *catalog, struct aq_stats **out);

enum aq_status aq_stats_load(const struct aq_catalog *catalog,
                             const char *path,
                             struct aq_stats **out);

enum aq_status aq_stats_save(const struct aq_stats *stats, const char *path);

/**
 * Counts one execution of a statement exercising the `len` features in `ids`.
 */
enum aq_status aq_stats_record(const struct aq_stats *stats,
                               const char *const *ids,
                               size_t len,
                               bool success);

/**
 * Reclassifies every feature; writes how many became Unsupported.
 */
enum aq_status aq_stats_classify(struct aq_stats *stats,
                                 double threshold_p,
                                 size_t *newly_unsupported);

enum aq_status aq_stats_get(const struct aq_stats *stats,
                            const char *id,
                            uint64_t *n,
                            uint64_t *y,
                            enum aq_feature_state *state);

void aq_stats_free(struct aq_stats *stats);

enum aq_status aq_history_new(struct aq_history **out);

/**
 * Triages bug `bug_id` with the given feature set, recording it when New.
 */
enum aq_status aq_history_classify(struct aq_history *history,
                                   const char *const *ids,
                                   size_t len,
                                   uint64_t bug_id,
                                   struct aq_classification *out);

enum aq_status aq_history_len(const struct aq_history *history, size_t *out);

void aq_history_free(struct aq_history *history);

struct aq_campaign_options aq_campaign_options_default(void);

/**
 * Runs a campaign with the default catalog and target registry.
 */
enum aq_status aq_campaign_run(const struct aq_campaign_options *options,
                               struct aq_campaign_summary *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ADAQUERY_H */
