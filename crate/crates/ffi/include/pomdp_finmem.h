#ifndef POMDP_FINMEM_H
#define POMDP_FINMEM_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Memory domain of the belief-observation construction.
typedef enum PfmDomain {
  PFM_DOMAIN_LOCAL = 0,
  PFM_DOMAIN_VERBATIM = 1,
} PfmDomain;

// Winning mode.
typedef enum PfmMode {
  PFM_MODE_ALMOST_SURE = 0,
  PFM_MODE_POSITIVE = 1,
} PfmMode;

// Result of every call.
typedef enum PfmStatus {
  PFM_STATUS_OK = 0,
  // A required pointer argument was null.
  PFM_STATUS_NULL_ARGUMENT = 1,
  // A string argument was not valid UTF-8.
  PFM_STATUS_INVALID_UTF8 = 2,
  // The input text could not be parsed.
  PFM_STATUS_PARSE = 3,
  // The model or objective is well formed but invalid.
  PFM_STATUS_INVALID_MODEL = 4,
  // A strategy is malformed or does not fit the model.
  PFM_STATUS_INVALID_STRATEGY = 5,
  // The objective cannot be handled by the requested operation.
  PFM_STATUS_UNSUPPORTED = 6,
  // The state budget was exceeded.
  PFM_STATUS_BUDGET = 7,
  // An enum argument was out of range.
  PFM_STATUS_INVALID_ARGUMENT = 8,
  // An internal consistency check failed.
  PFM_STATUS_INTERNAL = 9,
  // A panic was caught at the boundary.
  PFM_STATUS_PANIC = 10,
} PfmStatus;

// Result of a solver run.
typedef struct PfmDecision PfmDecision;

// Parsed model with its objective.
typedef struct PfmModel PfmModel;

// Finite-memory strategy bound to the model it was parsed or solved against.
typedef struct PfmStrategy PfmStrategy;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread, or null if none failed yet. The pointer stays
// valid until the next failing call on this thread.
const char *pfm_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *pfm_version(void);

// Releases a string returned by this library. Null is ignored.
//
// # Safety
// `s` must be null or a string returned by this library that was not released yet.
void pfm_string_free(char *s);

// Parses and validates a model. On success `*out_model` receives a new handle.
//
// # Safety
// `text` must be a NUL-terminated string and `out_model` a writable pointer.
enum PfmStatus pfm_model_parse(const char *text, struct PfmModel **out_model);

// Releases a model. Null is ignored.
//
// # Safety
// `model` must be null or a handle from [`pfm_model_parse`] that was not released yet.
void pfm_model_free(struct PfmModel *model);

// Writes the number of states, actions and observations. Any output pointer may be null.
//
// # Safety
// `model` must be a live handle.
enum PfmStatus pfm_model_sizes(const struct PfmModel *model,
                               size_t *states,
                               size_t *actions,
                               size_t *observations);

// Number of warnings produced while parsing the model.
//
// # Safety
// `model` must be a live handle and `count` a writable pointer.
enum PfmStatus pfm_model_warning_count(const struct PfmModel *model, size_t *count);

// Copy of warning `index`, released with [`pfm_string_free`].
//
// # Safety
// `model` must be a live handle and `out_text` a writable pointer.
enum PfmStatus pfm_model_warning(const struct PfmModel *model, size_t index, char **out_text);

// Canonical text of the model, released with [`pfm_string_free`].
//
// # Safety
// `model` must be a live handle and `out_text` a writable pointer.
enum PfmStatus pfm_model_serialize(const struct PfmModel *model, char **out_text);

// Parses a strategy against `model`. On success `*out_strategy` receives a new handle.
//
// # Safety
// `model` must be a live handle, `text` a NUL-terminated string and `out_strategy` a writable pointer.
enum PfmStatus pfm_strategy_parse(const struct PfmModel *model,
                                  const char *text,
                                  struct PfmStrategy **out_strategy);

// Releases a strategy. Null is ignored.
//
// # Safety
// `strategy` must be null or a live strategy handle.
void pfm_strategy_free(struct PfmStrategy *strategy);

// Number of memory elements of the strategy.
//
// # Safety
// `strategy` must be a live handle and `count` a writable pointer.
enum PfmStatus pfm_strategy_memory_count(const struct PfmStrategy *strategy, size_t *count);

// Canonical text of the strategy for `model`, released with [`pfm_string_free`].
//
// # Safety
// Both handles must be live and `out_text` a writable pointer.
enum PfmStatus pfm_strategy_serialize(const struct PfmModel *model,
                                      const struct PfmStrategy *strategy,
                                      char **out_text);

// Checks whether `strategy` wins the model's objective in `mode` (a [`PfmMode`] value).
//
// # Safety
// Both handles must be live and `wins` a writable pointer.
enum PfmStatus pfm_verify(const struct PfmModel *model,
                          const struct PfmStrategy *strategy,
                          int32_t mode,
                          bool *wins);

// Decides whether a finite-memory strategy wins the model's objective in `mode` (a [`PfmMode`]).
// `domain` is a [`PfmDomain`] value and `budget` caps the constructed states, with 0 meaning the
// library default. On success `*out_decision` receives a new decision handle.
//
// # Safety
// `model` must be a live handle and `out_decision` a writable pointer.
enum PfmStatus pfm_solve(const struct PfmModel *model,
                         int32_t mode,
                         int32_t domain,
                         size_t budget,
                         struct PfmDecision **out_decision);

// Releases a decision. Null is ignored.
//
// # Safety
// `decision` must be null or a live decision handle.
void pfm_decision_free(struct PfmDecision *decision);

// Verdict of the decision.
//
// # Safety
// `decision` must be a live handle and `verdict` a writable pointer.
enum PfmStatus pfm_decision_verdict(const struct PfmDecision *decision, bool *verdict);

// One-line `key=value` summary, released with [`pfm_string_free`].
//
// # Safety
// `decision` must be a live handle and `out_text` a writable pointer.
enum PfmStatus pfm_decision_summary(const struct PfmDecision *decision, char **out_text);

// Copy of the verified witness as a new strategy handle, or null in `*out_strategy` on a no verdict.
//
// # Safety
// `decision` must be a live handle and `out_strategy` a writable pointer.
enum PfmStatus pfm_decision_witness(const struct PfmDecision *decision,
                                    struct PfmStrategy **out_strategy);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* POMDP_FINMEM_H */
