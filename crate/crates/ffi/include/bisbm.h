#ifndef BISBM_H
#define BISBM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum BisbmStatus {
  BISBM_STATUS_OK = 0,
  BISBM_STATUS_NULL_POINTER = 1,
  BISBM_STATUS_INVALID_ARGUMENT = 2,
  BISBM_STATUS_PARSE_ERROR = 3,
  BISBM_STATUS_INVALID_GRAPH = 4,
  BISBM_STATUS_INVALID_PARTITION = 5,
  BISBM_STATUS_PANIC = 6,
} BisbmStatus;

/**
 * The best partition and score of a fit.
 */
typedef struct BisbmFit BisbmFit;

/**
 * A validated bipartite multigraph.
 */
typedef struct BisbmGraph BisbmGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. Valid until the
 * next call on the same thread.
 */
const char *bisbm_last_error(void);

/**
 * Builds a graph from `num_edges` pairs `(src[i], dst[i])`; repeated pairs add multiplicity.
 *
 * # Safety
 * `types` must hold `num_vertices` bytes, `src` and `dst` `num_edges` entries each.
 */
enum BisbmStatus bisbm_graph_new(size_t num_vertices,
                                 const uint8_t *types,
                                 size_t num_edges,
                                 const uint32_t *src,
                                 const uint32_t *dst,
                                 struct BisbmGraph **out);

/**
 * Parses a tab-separated edge list and types file (the CLI formats).
 *
 * # Safety
 * Both strings must be NUL-terminated.
 */
enum BisbmStatus bisbm_graph_parse(const char *edges, const char *types, struct BisbmGraph **out);

/**
 * # Safety
 * `graph` must come from a graph constructor and not be freed twice. Null is ignored.
 */
void bisbm_graph_free(struct BisbmGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle.
 */
enum BisbmStatus bisbm_graph_num_vertices(const struct BisbmGraph *graph, size_t *out);

/**
 * Total edge multiplicity.
 *
 * # Safety
 * `graph` must be a live handle.
 */
enum BisbmStatus bisbm_graph_num_edges(const struct BisbmGraph *graph, uint64_t *out);

/**
 * Maximum-likelihood fit with `restarts` random starts. Unipartite models
 * use `k_a + k_b` groups.
 *
 * # Safety
 * `graph` must be a live handle.
 */
enum BisbmStatus bisbm_fit(const struct BisbmGraph *graph,
                           bool bipartite,
                           bool degree_corrected,
                           size_t k_a,
                           size_t k_b,
                           size_t restarts,
                           uint64_t seed,
                           struct BisbmFit **out);

/**
 * # Safety
 * `fit` must come from [`bisbm_fit`] and not be freed twice. Null is ignored.
 */
void bisbm_fit_free(struct BisbmFit *fit);

/**
 * # Safety
 * `fit` must be a live handle.
 */
enum BisbmStatus bisbm_fit_score(const struct BisbmFit *fit, double *out);

/**
 * Copies the best assignment into `out`, which must hold `len` = number of vertices entries.
 *
 * # Safety
 * `fit` must be a live handle and `out` writable for `len` entries.
 */
enum BisbmStatus bisbm_fit_assignment(const struct BisbmFit *fit, uint32_t *out, size_t len);

/**
 * Log-likelihood of a partition. For bipartite models groups `0..k_a` are
 * type a and `k_a..k_a + k_b` type b; unipartite models use `k_a + k_b` untyped groups.
 *
 * # Safety
 * `graph` must be a live handle and `assignment` hold `len` entries.
 */
enum BisbmStatus bisbm_log_likelihood(const struct BisbmGraph *graph,
                                      const uint32_t *assignment,
                                      size_t len,
                                      size_t k_a,
                                      size_t k_b,
                                      bool bipartite,
                                      bool degree_corrected,
                                      double *out);

/**
 * Normalized mutual information of two labelings of `len` items.
 *
 * # Safety
 * `x` and `y` must hold `len` entries.
 */
enum BisbmStatus bisbm_nmi(const uint32_t *x, const uint32_t *y, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* BISBM_H */
