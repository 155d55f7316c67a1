#ifndef WHITNEY_FOREST_H
#define WHITNEY_FOREST_H

/* Generated by cbindgen; edit the Rust source instead. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible call.
 */
typedef enum WfStatus {
  WF_STATUS_OK = 0,
  WF_STATUS_INVALID_ARGUMENT = 1,
  WF_STATUS_PARSE_ERROR = 2,
  WF_STATUS_VALIDATION_ERROR = 3,
  WF_STATUS_RESOURCE_LIMIT = 4,
  WF_STATUS_INTERNAL_ERROR = 5,
} WfStatus;

/**
 * Opaque parsed intersection forest.
 */
typedef struct WfForest WfForest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Thread-local message for the most recent error on this thread. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *wf_last_error_message(void);

/**
 * Frees a string returned by any `*_json` call.
 *
 * # Safety
 * `s` must be a pointer previously returned by this library, or null.
 */
void wf_string_free(char *s);

/**
 * Parses a forest document (JSON, see the library docs for the schema) into
 * an opaque handle.
 *
 * # Safety
 * `json` must be a NUL-terminated UTF-8 string; `out` must be a valid pointer.
 */
enum WfStatus wf_forest_parse_json(const char *json, struct WfForest **out);

/**
 * # Safety
 * `forest` must come from `wf_forest_parse_json`, or be null.
 */
void wf_forest_free(struct WfForest *forest);

/**
 * Component count of a parsed forest.
 *
 * # Safety
 * `forest` must be a live handle from `wf_forest_parse_json`.
 */
uint32_t wf_forest_components(const struct WfForest *forest);

/**
 * Order of a parsed forest.
 *
 * # Safety
 * `forest` must be a live handle from `wf_forest_parse_json`.
 */
size_t wf_forest_order(const struct WfForest *forest);

/**
 * Evaluates τ of the forest; `*out_is_zero` is 1 when the obstruction
 * vanishes in the twisted tree group.
 *
 * # Safety
 * `forest` must be a live handle; `out_is_zero` a valid pointer.
 */
enum WfStatus wf_forest_tau_is_zero(const struct WfForest *forest,
                                    size_t generator_cap,
                                    int32_t *out_is_zero);

/**
 * Milnor invariant of the forest as a JSON document (total tensor,
 * longitudes, kernel-lattice coordinates).
 *
 * # Safety
 * `forest` must be a live handle; `out_json` a valid pointer.
 */
enum WfStatus wf_forest_milnor_json(const struct WfForest *forest,
                                    size_t generator_cap,
                                    char **out_json);

/**
 * Higher-order Arf representative of the forest as JSON: either
 * `{"arf": {"k": ..., "terms": [...]}}` or
 * `{"milnor_obstruction": {...}}` when μ ≠ 0.
 *
 * # Safety
 * `forest` must be a live handle; `out_json` a valid pointer.
 */
enum WfStatus wf_forest_arf_json(const struct WfForest *forest,
                                 size_t generator_cap,
                                 char **out_json);

/**
 * Structure of a tree group as `{"rank": r, "torsion": [...], "generators": g}`.
 *
 * # Safety
 * `out_json` must be a valid pointer.
 */
enum WfStatus wf_group_json(uint32_t m,
                            size_t n,
                            int32_t twisted,
                            size_t generator_cap,
                            char **out_json);

/**
 * η of a tree or ∞-tree expression over labels 1..=m, as tensor JSON.
 *
 * # Safety
 * `expr` must be a NUL-terminated UTF-8 string; `out_json` a valid pointer.
 */
enum WfStatus wf_eta_apply_json(const char *expr,
                                uint32_t m,
                                size_t generator_cap,
                                char **out_json);

/**
 * Symbolic Bing-doubling recipe for a generator expression, as JSON.
 *
 * # Safety
 * `expr` must be a NUL-terminated UTF-8 string; `out_json` a valid pointer.
 */
enum WfStatus wf_realize_json(const char *expr, uint32_t m, char **out_json);

/**
 * Witt rank r_n(m) as a decimal string (arbitrary precision).
 *
 * # Safety
 * `out_decimal` must be a valid pointer.
 */
enum WfStatus wf_witt_rank(uint32_t m, size_t n, char **out_decimal);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* WHITNEY_FOREST_H */
