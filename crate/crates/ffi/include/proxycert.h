#ifndef PROXYCERT_H
#define PROXYCERT_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  PC_STATUS_NULL_ARGUMENT = 1,
  PC_STATUS_INVALID_UTF8 = 2,
  PC_STATUS_IO = 3,
  PC_STATUS_MALFORMED = 4,
  PC_STATUS_INVALID_ARGUMENT = 5,
  PC_STATUS_NOT_FOUND = 6,
  PC_STATUS_PANIC = 7,
} PcStatus;

/**
 * Levels of the scheme comparison table.
 */
typedef enum PcLevel {
  PC_LEVEL_NO = 0,
  PC_LEVEL_PARTIAL = 1,
  PC_LEVEL_YES = 2,
} PcLevel;

/**
 * Trust anchors.
 */
typedef struct PcAnchors PcAnchors;

/**
 * A presented chain, root-most certificate first.
 */
typedef struct PcChain PcChain;

/**
 * Result of a validation: accepted, or rejected with a reason code.
 */
typedef struct PcOutcome PcOutcome;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message describing the last failure on this thread, or null. Owned by the
 * library; valid until the next call on the same thread.
 */
const char *pc_last_error(void);

/**
 * Loads anchors from a certificate file or from every `.pcert` file in a
 * directory.
 *
 * # Safety
 * `path` must be a valid nul-terminated string; `out` must be writable.
 */
enum PcStatus pc_anchors_load(const char *path, struct PcAnchors **out);

/**
 * # Safety
 * `anchors` must be null or a handle from [`pc_anchors_load`] not yet freed.
 */
void pc_anchors_free(struct PcAnchors *anchors);

/**
 * Parses a chain from document text.
 *
 * # Safety
 * `document` must be a valid nul-terminated string; `out` must be writable.
 */
enum PcStatus pc_chain_parse(const char *document, struct PcChain **out);

/**
 * Loads a chain from a certificate file.
 *
 * # Safety
 * `path` must be a valid nul-terminated string; `out` must be writable.
 */
enum PcStatus pc_chain_load(const char *path, struct PcChain **out);

/**
 * Number of certificates in the chain; 0 for null.
 *
 * # Safety
 * `chain` must be null or a live chain handle.
 */
size_t pc_chain_len(const struct PcChain *chain);

/**
 * # Safety
 * `chain` must be null or a chain handle not yet freed.
 */
void pc_chain_free(struct PcChain *chain);

/**
 * Validates `chain` for `target` at instant `at` (seconds).
 *
 * # Safety
 * Handles must be live; `target` a valid nul-terminated string; `out`
 * writable.
 */
enum PcStatus pc_validate_chain(const struct PcChain *chain,
                                const struct PcAnchors *anchors,
                                const char *target,
                                uint64_t at,
                                struct PcOutcome **out);

/**
 * Validates a delegated-credential document against the end-entity
 * certificate that is the last certificate of `ee`, for a handshake using
 * `handshake_scheme` (e.g. `"ed25519"`).
 *
 * # Safety
 * `dc_document` and `handshake_scheme` must be valid nul-terminated
 * strings; `ee` a live chain handle; `out` writable.
 */
enum PcStatus pc_validate_dc(const char *dc_document,
                             const struct PcChain *ee,
                             const char *handshake_scheme,
                             uint64_t at,
                             struct PcOutcome **out);

/**
 * 1 if the outcome is an acceptance, 0 otherwise (including null).
 *
 * # Safety
 * `outcome` must be null or a live outcome handle.
 */
int32_t pc_outcome_is_accept(const struct PcOutcome *outcome);

/**
 * Reason code of a rejection (e.g. `"Expired"`), or null on acceptance.
 * Owned by the outcome.
 *
 * # Safety
 * `outcome` must be null or a live outcome handle.
 */
const char *pc_outcome_reason(const struct PcOutcome *outcome);

/**
 * # Safety
 * `outcome` must be null or an outcome handle not yet freed.
 */
void pc_outcome_free(struct PcOutcome *outcome);

/**
 * Looks up one cell of the built-in comparison table: `scheme` is a row
 * key such as `"s"`, `criterion` an id such as `"B2"` or a criterion name.
 *
 * # Safety
 * Strings must be valid and nul-terminated; `out` writable.
 */
enum PcStatus pc_matrix_lookup(const char *scheme, const char *criterion, enum PcLevel *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PROXYCERT_H */
