#ifndef FRCERT_H
#define FRCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FrcStatus {
  FRC_STATUS_OK = 0,
  FRC_STATUS_NULL_POINTER = 1,
  FRC_STATUS_INVALID_UTF8 = 2,
  FRC_STATUS_PARSE = 3,
  FRC_STATUS_INVALID_PARAMS = 4,
  FRC_STATUS_VERIFICATION = 5,
  FRC_STATUS_IO = 6,
  FRC_STATUS_PANIC = 7,
} FrcStatus;

/**
 * An instance with its certificates.
 */
typedef struct FrcDocument FrcDocument;

/**
 * The verdicts for every certificate of a document.
 */
typedef struct FrcVerdict FrcVerdict;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses a native document.
 *
 * # Safety
 * `text` must be a nul-terminated string; `out` must be writable.
 */
enum FrcStatus frc_document_parse(const char *text, struct FrcDocument **out);

/**
 * # Safety
 * `doc` must come from this library and not be freed twice. Null is ignored.
 */
void frc_document_free(struct FrcDocument *doc);

/**
 * Weakly infeasible dual system with block sizes `p` (k + 1 entries) and `q` (l + 1 entries).
 *
 * # Safety
 * `p` and `q` must point to `p_len` and `q_len` readable values; `out` must be writable.
 */
enum FrcStatus frc_generate_weak(uint32_t n,
                                 uint32_t m,
                                 const uint32_t *p,
                                 size_t p_len,
                                 const uint32_t *q,
                                 size_t q_len,
                                 int64_t entry_range,
                                 uint64_t seed,
                                 bool messy,
                                 struct FrcDocument **out);

/**
 * Infeasible dual system in staircase form with block sizes `p`.
 *
 * # Safety
 * `p` must point to `p_len` readable values; `out` must be writable.
 */
enum FrcStatus frc_generate_infeasible(uint32_t n,
                                       uint32_t m,
                                       const uint32_t *p,
                                       size_t p_len,
                                       int64_t entry_range,
                                       uint64_t seed,
                                       bool messy,
                                       struct FrcDocument **out);

/**
 * Scrambles a dual psd document; its certificates are transformed along.
 *
 * # Safety
 * `doc` must be a live document; `out` must be writable.
 */
enum FrcStatus frc_mess(const struct FrcDocument *doc, uint64_t seed, struct FrcDocument **out);

/**
 * Native text of the document; free with [`frc_string_free`].
 *
 * # Safety
 * `doc` must be a live document; `out` must be writable.
 */
enum FrcStatus frc_document_to_native(const struct FrcDocument *doc, char **out);

/**
 * SDPA text of a dual psd document; certificates are not included.
 *
 * # Safety
 * `doc` must be a live document; `out` must be writable.
 */
enum FrcStatus frc_document_to_sdpa(const struct FrcDocument *doc, char **out);

/**
 * # Safety
 * `s` must come from this library and not be freed twice. Null is ignored.
 */
void frc_string_free(char *s);

/**
 * Checks every certificate of the document. A rejected certificate is still
 * `FRC_STATUS_OK`; inspect the verdict.
 *
 * # Safety
 * `doc` must be a live document; `out` must be writable.
 */
enum FrcStatus frc_verify(const struct FrcDocument *doc, struct FrcVerdict **out);

/**
 * True when there is at least one certificate and every one is proven exactly.
 *
 * # Safety
 * `verdict` must be a live verdict or null.
 */
bool frc_verdict_is_proven(const struct FrcVerdict *verdict);

/**
 * JSON array with one transcript per certificate; free with [`frc_string_free`].
 *
 * # Safety
 * `verdict` must be a live verdict; `out` must be writable.
 */
enum FrcStatus frc_verdict_report_json(const struct FrcVerdict *verdict, char **out);

/**
 * # Safety
 * `verdict` must come from this library and not be freed twice. Null is ignored.
 */
void frc_verdict_free(struct FrcVerdict *verdict);

/**
 * Message of the last failed call on this thread, empty after a success. The
 * pointer stays valid until the next library call on the same thread.
 */
const char *frc_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRCERT_H */
