#ifndef WFNET_H
#define WFNET_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Property bit for `wfnet_net_emit`: option to complete.
 */
#define WFNET_PROPERTY_TERMINATION 1

/**
 * Property bit for `wfnet_net_emit`: proper completion.
 */
#define WFNET_PROPERTY_PROPER 2

/**
 * Property bit for `wfnet_net_emit`: no dead transitions (closure only).
 */
#define WFNET_PROPERTY_NO_DEAD 4

/**
 * Outcome of a library call.
 */
typedef enum WfnetStatus {
  WFNET_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  WFNET_STATUS_NULL_ARGUMENT = 1,
  /**
   * A string argument was not valid UTF-8.
   */
  WFNET_STATUS_INVALID_UTF8 = 2,
  /**
   * The net text could not be parsed.
   */
  WFNET_STATUS_PARSE_ERROR = 3,
  /**
   * A file could not be read.
   */
  WFNET_STATUS_IO_ERROR = 4,
  /**
   * The net is not a workflow net.
   */
  WFNET_STATUS_INVALID_NET = 5,
  /**
   * A numeric or option argument is out of range.
   */
  WFNET_STATUS_INVALID_ARGUMENT = 6,
  /**
   * State-space exploration failed.
   */
  WFNET_STATUS_CHECK_FAILED = 7,
  /**
   * The Promela model could not be generated.
   */
  WFNET_STATUS_EMIT_FAILED = 8,
  /**
   * An internal error was caught at the boundary.
   */
  WFNET_STATUS_PANIC = 9,
} WfnetStatus;

/**
 * Report rendering.
 */
typedef enum WfnetFormat {
  WFNET_FORMAT_TEXT = 0,
  WFNET_FORMAT_JSON = 1,
} WfnetFormat;

/**
 * Soundness classification of a verdict.
 */
typedef enum WfnetResult {
  WFNET_RESULT_SOUND = 0,
  WFNET_RESULT_WEAK_SOUND = 1,
  WFNET_RESULT_UNSOUND = 2,
  WFNET_RESULT_UNBOUNDED = 3,
  WFNET_RESULT_INCONCLUSIVE = 4,
} WfnetResult;

/**
 * A parsed net with its source, sink and resource declarations.
 */
typedef struct WfnetNet WfnetNet;

/**
 * The result of a soundness check.
 */
typedef struct WfnetVerdict WfnetVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a net in the line-oriented text format.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer. On
 * success `*out` receives a handle to release with `wfnet_net_free`.
 */
enum WfnetStatus wfnet_net_parse_dsl(const char *text, struct WfnetNet **out);

/**
 * Parses a PNML document.
 *
 * # Safety
 * Same contract as `wfnet_net_parse_dsl`.
 */
enum WfnetStatus wfnet_net_parse_pnml(const char *text, struct WfnetNet **out);

/**
 * Reads a net from a file; `.pnml` and `.xml` files are read as PNML,
 * anything else as the text format.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum WfnetStatus wfnet_net_load(const char *path, struct WfnetNet **out);

/**
 * Releases a net handle. Null is ignored.
 *
 * # Safety
 * `net` must come from this library and must not be used afterwards.
 */
void wfnet_net_free(struct WfnetNet *net);

/**
 * Number of places, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t wfnet_net_place_count(const struct WfnetNet *net);

/**
 * Number of transitions, or 0 for a null handle.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t wfnet_net_transition_count(const struct WfnetNet *net);

/**
 * Number of warnings raised while reading the net.
 *
 * # Safety
 * `net` must be null or a live handle.
 */
size_t wfnet_net_warning_count(const struct WfnetNet *net);

/**
 * Checks the structural workflow-net conditions.
 *
 * `*valid` receives the outcome. When `report` is not null it receives
 * the structural report, to release with `wfnet_string_free`.
 *
 * # Safety
 * `net` must be a live handle, `valid` a valid pointer and `report` null
 * or a valid pointer.
 */
enum WfnetStatus wfnet_net_validate(const struct WfnetNet *net,
                                    enum WfnetFormat format,
                                    bool *valid,
                                    char **report);

/**
 * Decides soundness with `k` instances, exploring at most `cap` markings
 * per state space (`0` selects the default bound of one million).
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer. On success
 * `*out` receives a handle to release with `wfnet_verdict_free`.
 */
enum WfnetStatus wfnet_net_check(const struct WfnetNet *net,
                                 uint32_t k,
                                 size_t cap,
                                 struct WfnetVerdict **out);

/**
 * Soundness classification of a verdict.
 *
 * # Safety
 * `verdict` must be a live handle and `out` a valid pointer.
 */
enum WfnetStatus wfnet_verdict_result(const struct WfnetVerdict *verdict, enum WfnetResult *out);

/**
 * Number of markings explored in the workflow net's state space.
 *
 * # Safety
 * `verdict` must be null or a live handle.
 */
size_t wfnet_verdict_nodes(const struct WfnetVerdict *verdict);

/**
 * Renders the verdict as a report, to release with `wfnet_string_free`.
 *
 * # Safety
 * `verdict` must be a live handle and `out` a valid pointer.
 */
enum WfnetStatus wfnet_verdict_report(const struct WfnetVerdict *verdict,
                                      enum WfnetFormat format,
                                      char **out);

/**
 * Releases a verdict handle. Null is ignored.
 *
 * # Safety
 * `verdict` must come from this library and must not be used afterwards.
 */
void wfnet_verdict_free(struct WfnetVerdict *verdict);

/**
 * Generates the Promela model of the net.
 *
 * `properties` is a mask of `WFNET_PROPERTY_*` bits; `0` selects
 * termination and proper completion. The model is written to `*out`, to
 * release with `wfnet_string_free`.
 *
 * # Safety
 * `net` must be a live handle and `out` a valid pointer.
 */
enum WfnetStatus wfnet_net_emit(const struct WfnetNet *net,
                                uint32_t k,
                                bool closure,
                                bool weighted,
                                uint32_t properties,
                                char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and must not be used afterwards.
 */
void wfnet_string_free(char *s);

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next library call on the same thread.
 */
const char *wfnet_last_error(void);

/**
 * Library version as a static string.
 */
const char *wfnet_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WFNET_H */
