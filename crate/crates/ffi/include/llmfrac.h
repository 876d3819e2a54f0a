#ifndef LLMFRAC_H
#define LLMFRAC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Set in [`LfEstimate::flags`] when α̂ sits at 0.
 */
#define LF_FLAG_BOUNDARY_LOW 1

/**
 * Set in [`LfEstimate::flags`] when α̂ sits at 1.
 */
#define LF_FLAG_BOUNDARY_HIGH 2

/**
 * Set when the model has tokens with identical P and Q.
 */
#define LF_FLAG_UNINFORMATIVE_TOKENS 4

/**
 * Result codes. Zero is success.
 */
typedef enum LfStatus {
  LF_STATUS_OK = 0,
  LF_STATUS_NULL_POINTER = 1,
  LF_STATUS_INVALID_UTF8 = 2,
  LF_STATUS_FILE_NOT_FOUND = 3,
  LF_STATUS_MALFORMED_INPUT = 4,
  LF_STATUS_EMPTY_CORPUS = 5,
  LF_STATUS_INVALID_ARGUMENT = 6,
  LF_STATUS_TOO_FEW_DOCUMENTS = 7,
  LF_STATUS_EMPTY_VOCABULARY = 8,
  LF_STATUS_SCHEMA_VERSION_MISMATCH = 9,
  LF_STATUS_CORRUPT_MODEL = 10,
  LF_STATUS_FLAT_LIKELIHOOD = 11,
  LF_STATUS_IO = 12,
  LF_STATUS_PANIC = 13,
  LF_STATUS_OTHER = 14,
} LfStatus;

/**
 * Opaque document collection.
 */
typedef struct LfCorpus LfCorpus;

/**
 * Opaque fitted model.
 */
typedef struct LfModel LfModel;

/**
 * Point estimate with an optional bootstrap interval. `ci_low` and
 * `ci_high` are NaN when no interval was requested.
 */
typedef struct LfEstimate {
  double alpha;
  double ci_low;
  double ci_high;
  double log_likelihood;
  uint64_t n_units;
  uint32_t flags;
} LfEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *lf_last_error(void);

/**
 * Library version as a static string.
 */
const char *lf_version(void);

/**
 * Loads a JSONL corpus. Malformed lines are skipped.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LfStatus lf_corpus_load(const char *path, struct LfCorpus **out);

/**
 * Number of documents, or 0 for a null handle.
 *
 * # Safety
 * `corpus` must be null or a live handle.
 */
uint64_t lf_corpus_len(const struct LfCorpus *corpus);

/**
 * # Safety
 * `corpus` must be null or a handle not yet freed.
 */
void lf_corpus_free(struct LfCorpus *corpus);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum LfStatus lf_model_load(const char *path, struct LfModel **out);

/**
 * Fits a document-level model with default settings.
 *
 * # Safety
 * `human` and `llm` must be live corpus handles; `out` must be writable.
 */
enum LfStatus lf_model_fit(const struct LfCorpus *human,
                           const struct LfCorpus *llm,
                           struct LfModel **out);

/**
 * # Safety
 * `model` must be a live handle; `path` a NUL-terminated string.
 */
enum LfStatus lf_model_save(const struct LfModel *model, const char *path);

/**
 * Vocabulary size, or 0 for a null handle.
 *
 * # Safety
 * `model` must be null or a live handle.
 */
uint64_t lf_model_vocab_size(const struct LfModel *model);

/**
 * # Safety
 * `model` must be null or a handle not yet freed.
 */
void lf_model_free(struct LfModel *model);

/**
 * Estimates α for `corpus`. With `replicates` = 0 only the point estimate
 * is computed; otherwise a percentile interval at `level` from that many
 * bootstrap replicates (at least 100) drawn with `seed`.
 *
 * # Safety
 * `model` and `corpus` must be live handles; `out` must be writable.
 */
enum LfStatus lf_estimate(const struct LfModel *model,
                          const struct LfCorpus *corpus,
                          uint32_t replicates,
                          double level,
                          uint64_t seed,
                          struct LfEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LLMFRAC_H */
