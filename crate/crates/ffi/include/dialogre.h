#ifndef DIALOGRE_H
#define DIALOGRE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result of every fallible call.
typedef enum DrStatus {
  DR_STATUS_OK = 0,
  DR_STATUS_NULL_ARGUMENT = 1,
  DR_STATUS_INVALID_UTF8 = 2,
  DR_STATUS_IO = 3,
  DR_STATUS_PARSE = 4,
  DR_STATUS_VALIDATION = 5,
  DR_STATUS_INVALID_PREDICTIONS = 6,
  DR_STATUS_PANIC = 7,
} DrStatus;

typedef enum DrFormat {
  DR_FORMAT_AUTO = 0,
  DR_FORMAT_CANONICAL = 1,
  DR_FORMAT_RELEASED = 2,
} DrFormat;

// A validated corpus.
typedef struct DrCorpus DrCorpus;

// Scores of one evaluation run.
typedef struct DrReport DrReport;

// Precision, recall and F1 of one setting, as fractions in `[0, 1]`.
typedef struct DrScores {
  double precision;
  double recall;
  double f1;
  size_t instances;
} DrScores;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL.
const char *dr_last_error(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not be freed twice.
void dr_string_free(char *s);

// Loads and validates a corpus file.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum DrStatus dr_corpus_load(const char *path, enum DrFormat format, struct DrCorpus **out);

// Parses and validates a corpus from memory.
//
// # Safety
// `data` must point to `len` readable bytes; `out` must be writable.
enum DrStatus dr_corpus_parse(const uint8_t *data,
                              size_t len,
                              enum DrFormat format,
                              struct DrCorpus **out);

// Releases a corpus. NULL is ignored.
//
// # Safety
// `corpus` must come from `dr_corpus_load` or `dr_corpus_parse` and not be
// freed twice.
void dr_corpus_free(struct DrCorpus *corpus);

// Number of dialogues, 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t dr_corpus_num_dialogues(const struct DrCorpus *corpus);

// Number of argument-pair instances, 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t dr_corpus_num_instances(const struct DrCorpus *corpus);

// Number of `(instance, label)` triples, 0 for NULL.
//
// # Safety
// `corpus` must be NULL or a live handle.
size_t dr_corpus_num_triples(const struct DrCorpus *corpus);

// Canonical JSON serialization of the corpus.
//
// # Safety
// `corpus` must be a live handle; `out` must be writable.
enum DrStatus dr_corpus_to_json(const struct DrCorpus *corpus, char **out);

// Corpus statistics as JSON.
//
// # Safety
// `corpus` must be a live handle; `out` must be writable.
enum DrStatus dr_corpus_stats_json(const struct DrCorpus *corpus, char **out);

// Scores standard JSON Lines predictions (`len` bytes at `data`).
//
// # Safety
// `corpus` must be a live handle, `data` must point to `len` readable
// bytes and `out` must be writable.
enum DrStatus dr_score_standard(const struct DrCorpus *corpus,
                                const uint8_t *data,
                                size_t len,
                                struct DrReport **out);

// Scores per-prefix conversational JSON Lines predictions.
//
// # Safety
// As for `dr_score_standard`.
enum DrStatus dr_score_conversational(const struct DrCorpus *corpus,
                                      const uint8_t *data,
                                      size_t len,
                                      struct DrReport **out);

// Headline scores of a report: standard P/R/F1 if present, otherwise the
// conversational ones.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum DrStatus dr_report_scores(const struct DrReport *report, struct DrScores *out);

// Full report as JSON.
//
// # Safety
// `report` must be a live handle; `out` must be writable.
enum DrStatus dr_report_to_json(const struct DrReport *report, char **out);

// Releases a report. NULL is ignored.
//
// # Safety
// `report` must come from a scoring call and not be freed twice.
void dr_report_free(struct DrReport *report);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DIALOGRE_H */
