#ifndef NOISY_SEARCH_H
#define NOISY_SEARCH_H

/* Generated by cbindgen from src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. Zero is success.
 */
typedef enum NsStatus {
  NS_STATUS_OK = 0,
  NS_STATUS_NULL_POINTER = 1,
  NS_STATUS_INVALID_UTF8 = 2,
  NS_STATUS_DOMAIN = 3,
  NS_STATUS_STRUCTURAL = 4,
  NS_STATUS_PROTOCOL = 5,
  NS_STATUS_PARSE = 6,
  NS_STATUS_CONFIG = 7,
  NS_STATUS_IO = 8,
  NS_STATUS_SERIALIZATION = 9,
  NS_STATUS_OUT_OF_RANGE = 10,
  NS_STATUS_PANIC = 11,
} NsStatus;

/**
 * A configured experiment and, once run, its result.
 */
typedef struct NsExperiment NsExperiment;

/**
 * A graph together with its distance matrix.
 */
typedef struct NsGraph NsGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null after a success.
 * The pointer stays valid until the next call on the same thread.
 */
const char *ns_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *ns_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ns_string_free(char *s);

/**
 * Information rate `1 - H(p)` in bits per answer.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum NsStatus ns_info_rate(double p, double *out);

/**
 * Fixed query budget of the worst-case graph strategy.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum NsStatus ns_graph_budget(size_t n, double p, double delta, uint64_t *out);

/**
 * First-phase query budget of the worst-case binary search.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum NsStatus ns_binary_budget(size_t n, double p, double delta, double c_const, uint64_t *out);

/**
 * Builds a graph from a generator name such as `"grid:4x4"` or `"cycle"`.
 *
 * # Safety
 * `generator` must be a nul-terminated string; `out` must be valid for writes.
 */
enum NsStatus ns_graph_generate(const char *generator,
                                size_t n,
                                uint64_t seed,
                                struct NsGraph **out);

/**
 * Number of vertices in `g`.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid for writes.
 */
enum NsStatus ns_graph_vertex_count(const struct NsGraph *g, size_t *out);

/**
 * Shortest-path distance between `u` and `v`.
 *
 * # Safety
 * `g` must be a live handle; `out` must be valid for writes.
 */
enum NsStatus ns_graph_distance(const struct NsGraph *g, size_t u, size_t v, uint32_t *out);

/**
 * # Safety
 * `g` must come from [`ns_graph_generate`] and not have been freed. Null is ignored.
 */
void ns_graph_free(struct NsGraph *g);

/**
 * Creates an experiment from a JSON object. `scenario`, `n`, `p`, `delta`
 * are required; every other field of the Rust config is optional and
 * defaults as in `ExperimentConfig::new` (`trials` 1000, `seed` 0).
 *
 * # Safety
 * `json` must be a nul-terminated string; `out` must be valid for writes.
 */
enum NsStatus ns_experiment_new(const char *json, struct NsExperiment **out);

/**
 * Runs all trials, replacing any earlier result.
 *
 * # Safety
 * `e` must be a live handle.
 */
enum NsStatus ns_experiment_run(struct NsExperiment *e);

/**
 * Mean, error rate and bound check of a finished experiment. Any output
 * pointer may be null to skip it.
 *
 * # Safety
 * `e` must be a live handle; non-null outputs must be valid for writes.
 */
enum NsStatus ns_experiment_summary(const struct NsExperiment *e,
                                    double *mean_queries,
                                    double *error_rate,
                                    bool *bound_satisfied);

/**
 * The full summary row as JSON. Free the string with [`ns_string_free`].
 *
 * # Safety
 * `e` must be a live handle; `out` must be valid for writes.
 */
enum NsStatus ns_experiment_summary_json(const struct NsExperiment *e, char **out);

/**
 * # Safety
 * `e` must come from [`ns_experiment_new`] and not have been freed. Null is ignored.
 */
void ns_experiment_free(struct NsExperiment *e);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NOISY_SEARCH_H */
