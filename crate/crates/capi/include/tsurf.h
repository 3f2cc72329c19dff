#ifndef TSURF_H
#define TSURF_H

/* Generated by cbindgen from tsurf-capi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every entry point.
 */
typedef enum TsurfStatus {
  TsurfStatus_Ok = 0,
  TsurfStatus_NullArgument = 1,
  TsurfStatus_InvalidUtf8 = 2,
  TsurfStatus_InvalidArgument = 3,
  TsurfStatus_MathError = 4,
  TsurfStatus_Panic = 5,
} TsurfStatus;

/**
 * Opaque handle around parsed building data.
 */
typedef struct TsurfCover TsurfCover;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the most recent failure on this thread, or null. The
 * pointer stays valid until the next failing call on the same thread.
 */
const char *tsurf_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *tsurf_version(void);

/**
 * Frees a string returned by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned through an out-parameter of
 * this library, or null.
 */
void tsurf_string_free(char *s);

/**
 * Normal form of the quotient with weights `(a, b)` at order `p`, as
 * JSON.
 *
 * # Safety
 * `out_json` must point to writable storage for one pointer.
 */
enum TsurfStatus tsurf_sing_normalize(uint64_t p, int64_t a, int64_t b, char **out_json);

/**
 * Continued-fraction chain of `1/p (1,q)` as JSON (an array).
 *
 * # Safety
 * `out_json` must point to writable storage for one pointer.
 */
enum TsurfStatus tsurf_sing_hj(uint64_t p, uint64_t q, char **out_json);

/**
 * Class-T detection; `found` reports whether a witness exists and the
 * JSON carries the normal form plus the witness, if any.
 *
 * # Safety
 * `out_json` and `found` must point to writable storage.
 */
enum TsurfStatus tsurf_sing_class_t(uint64_t p, int64_t a, int64_t b, char **out_json, bool *found);

/**
 * Mapping-class report of `L(p,q)` as JSON.
 *
 * # Safety
 * `out_json` must point to writable storage for one pointer.
 */
enum TsurfStatus tsurf_lens_mcg(uint64_t p, uint64_t q, char **out_json);

/**
 * Full embedding-obstruction verdict report up to the size bound.
 *
 * # Safety
 * `out_json` and `all_agree` must point to writable storage.
 */
enum TsurfStatus tsurf_obstruct_lemmas(uint64_t max_n, char **out_json, bool *all_agree);

/**
 * Validates the action table against computation.
 *
 * # Safety
 * `out_json` and `passed` must point to writable storage.
 */
enum TsurfStatus tsurf_actions_check(char **out_json, bool *passed);

/**
 * Parses building data from its JSON form into an opaque handle.
 *
 * # Safety
 * `json` must be a valid NUL-terminated string and `out` must point to
 * writable storage for one handle pointer.
 */
enum TsurfStatus tsurf_cover_parse(const char *json, struct TsurfCover **out);

/**
 * Releases a cover handle.
 *
 * # Safety
 * `cover` must come from `tsurf_cover_parse` (or be null) and must not
 * be used afterwards.
 */
void tsurf_cover_free(struct TsurfCover *cover);

/**
 * Exhaustively verifies the cover condition of a handle.
 *
 * # Safety
 * `cover` must be a live handle; `report_json` and `passed` must point
 * to writable storage.
 */
enum TsurfStatus tsurf_cover_verify(const struct TsurfCover *cover,
                                    uint32_t rank_cap,
                                    char **report_json,
                                    bool *passed);

/**
 * `K^2` and `chi` of the covering surface, dual-route checked.
 *
 * # Safety
 * `cover` must be a live handle; `out_json` must point to writable
 * storage.
 */
enum TsurfStatus tsurf_cover_invariants(const struct TsurfCover *cover,
                                        uint32_t rank_cap,
                                        char **out_json);

/**
 * Runs the global construction from a JSON input of the form
 * `{"factors":[{"a":3,"b":6,"n":30}],"multiplier":1,"mode":"bounded","seed":0}`
 * and returns the certificate JSON.
 *
 * # Safety
 * `input_json` must be a valid NUL-terminated string; `cert_json` and
 * `passed` must point to writable storage.
 */
enum TsurfStatus tsurf_construct_certify(const char *input_json,
                                         uint32_t rank_cap,
                                         uint32_t m_cap,
                                         char **cert_json,
                                         bool *passed);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TSURF_H */
