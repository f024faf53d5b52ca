#ifndef FLOWFILTER_H
#define FLOWFILTER_H

#pragma once

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum FfStatus {
  FF_STATUS_OK = 0,
  FF_STATUS_NULL_ARGUMENT = 1,
  FF_STATUS_INVALID_UTF8 = 2,
  FF_STATUS_PARSE = 3,
  FF_STATUS_CYCLE = 4,
  FF_STATUS_NO_SOURCE = 5,
  FF_STATUS_MULTIPLE_SOURCES = 6,
  FF_STATUS_UNKNOWN_NODE = 7,
  FF_STATUS_NOT_C_TREE = 8,
  FF_STATUS_BUDGET_EXCEEDED = 9,
  FF_STATUS_INVALID_CONFIG = 10,
  FF_STATUS_ROOT_NOT_FOUND = 11,
  FF_STATUS_EMPTY_GRAPH = 12,
  FF_STATUS_ALREADY_FILTER = 13,
  FF_STATUS_INDEX_OUT_OF_RANGE = 14,
  FF_STATUS_PANIC = 99,
} FfStatus;

/**
 * Opaque filter set handle. Members are kept by label so a set can be
 * evaluated on any graph containing those labels.
 */
typedef struct FfFilterSet FfFilterSet;

/**
 * Opaque graph handle.
 */
typedef struct FfGraph FfGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version, statically allocated.
 */
const char *ff_version(void);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into the library from the same thread.
 */
const char *ff_last_error(void);

/**
 * Release a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void ff_string_free(char *s);

/**
 * Parse an edge list. `source` may be null to treat every node without
 * incoming edges as a source.
 *
 * # Safety
 * `text` and `source` must be null or nul-terminated; `out` must be writable.
 */
enum FfStatus ff_graph_parse(const char *text, const char *source, struct FfGraph **out);

/**
 * # Safety
 * `g` must be null or a live handle; it is invalid afterwards.
 */
void ff_graph_free(struct FfGraph *g);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ff_graph_node_count(const struct FfGraph *g);

/**
 * # Safety
 * `g` must be null or a live handle.
 */
size_t ff_graph_edge_count(const struct FfGraph *g);

/**
 * Serialize in the edge-list format.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum FfStatus ff_graph_to_edge_list(const struct FfGraph *g, char **out);

/**
 * New graph with one added node feeding every source of `g`.
 *
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum FfStatus ff_graph_add_super_source(const struct FfGraph *g, struct FfGraph **out);

/**
 * Maximal acyclic subgraph reachable from `root`.
 *
 * # Safety
 * `g` must be a live handle, `root` nul-terminated, `out` writable.
 */
enum FfStatus ff_graph_extract_dag(const struct FfGraph *g, const char *root, struct FfGraph **out);

/**
 * Largest extraction over all roots. `out_root` may be null.
 *
 * # Safety
 * `g` must be a live handle; `out` writable; `out_root` null or writable.
 */
enum FfStatus ff_graph_best_dag(const struct FfGraph *g, struct FfGraph **out, char **out_root);

/**
 * Layered synthetic graph.
 *
 * # Safety
 * `out` must be writable.
 */
enum FfStatus ff_generate_layered(size_t levels,
                                  size_t width,
                                  double x,
                                  double y,
                                  uint64_t seed,
                                  struct FfGraph **out);

/**
 * Run a selection algorithm by name (`greedy-all`, `tree-dp`, `rand-k`, ...).
 *
 * # Safety
 * `g` must be a live handle, `algorithm` nul-terminated, `out` writable.
 */
enum FfStatus ff_place(const struct FfGraph *g,
                       const char *algorithm,
                       size_t k,
                       uint64_t seed,
                       struct FfFilterSet **out);

/**
 * Filter set from `count` labels, each of which must exist in `g`.
 *
 * # Safety
 * `labels` must point to `count` nul-terminated strings; `out` writable.
 */
enum FfStatus ff_filter_set_from_labels(const struct FfGraph *g,
                                        const char *const *labels,
                                        size_t count,
                                        struct FfFilterSet **out);

/**
 * # Safety
 * `fs` must be null or a live handle; it is invalid afterwards.
 */
void ff_filter_set_free(struct FfFilterSet *fs);

/**
 * # Safety
 * `fs` must be null or a live handle.
 */
size_t ff_filter_set_len(const struct FfFilterSet *fs);

/**
 * Label of member `index` in selection order. The pointer is owned by the
 * set and lives as long as it does.
 *
 * # Safety
 * `fs` must be a live handle; `out` writable.
 */
enum FfStatus ff_filter_set_label(const struct FfFilterSet *fs, size_t index, const char **out);

/**
 * Φ, the total number of receipts with `fs` as filters (null = none), as a
 * decimal string.
 *
 * # Safety
 * `g` must be a live handle; `fs` null or live; `out` writable.
 */
enum FfStatus ff_phi(const struct FfGraph *g, const struct FfFilterSet *fs, char **out);

/**
 * F, the receipts removed by `fs`, as a decimal string.
 *
 * # Safety
 * `g` must be a live handle; `fs` null or live; `out` writable.
 */
enum FfStatus ff_objective(const struct FfGraph *g, const struct FfFilterSet *fs, char **out);

/**
 * Filter Ratio F(A)/F(V). `out_decimal` receives the exact value rounded
 * to six digits; either out-pointer may be null.
 *
 * # Safety
 * `g` must be a live handle; `fs` null or live; out-pointers null or writable.
 */
enum FfStatus ff_filter_ratio(const struct FfGraph *g,
                              const struct FfFilterSet *fs,
                              char **out_decimal,
                              double *out_value);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLOWFILTER_H */
