#ifndef PLP_H
#define PLP_H

/* Generated by cbindgen from crates/ffi. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum PlpStatus {
  PLP_STATUS_OK = 0,
  /**
   * A null pointer or a string that is not UTF-8.
   */
  PLP_STATUS_INVALID_ARGUMENT = 1,
  PLP_STATUS_SYNTAX = 2,
  /**
   * The program is not stratified by time and predicates.
   */
  PLP_STATUS_NOT_STRATIFIED = 3,
  /**
   * Rejected program or query, for example a bad head probability.
   */
  PLP_STATUS_INVALID_INPUT = 4,
  PLP_STATUS_EVIDENCE_ZERO = 5,
  PLP_STATUS_ORACLE_GUARD = 6,
  PLP_STATUS_ADMISSIBILITY = 7,
  PLP_STATUS_INTERNAL = 8,
} PlpStatus;

/**
 * Answers to one conditional query.
 */
typedef struct PlpAnswerSet PlpAnswerSet;

/**
 * A parsed and stratified program.
 */
typedef struct PlpProgram PlpProgram;

typedef struct PlpQueryOptions {
  /**
   * End of time, used when `has_eot` is true.
   */
  int64_t eot;
  bool has_eot;
  bool unguided;
  bool no_pruning;
  bool no_cache;
  /**
   * Enumerate choices instead of running variable elimination.
   */
  bool oracle;
} PlpQueryOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *plp_last_error(void);

/**
 * Library version as a static string.
 */
const char *plp_version(void);

/**
 * Default query options: guided grounding, pruning and caching on.
 */
struct PlpQueryOptions plp_query_options_default(void);

/**
 * Parse and stratify a program.
 *
 * # Safety
 * `source` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PlpStatus plp_program_parse(const char *source, struct PlpProgram **out);

/**
 * # Safety
 * `program` must come from [`plp_program_parse`] and not be freed yet, or
 * be null.
 */
void plp_program_free(struct PlpProgram *program);

/**
 * Answer a conditional query `?- B | E.` against a program. `options` may
 * be null for the defaults.
 *
 * # Safety
 * `program` must be a live handle, `query` a NUL-terminated string,
 * `options` null or valid, and `out` a valid pointer.
 */
enum PlpStatus plp_query(const struct PlpProgram *program,
                         const char *query,
                         const struct PlpQueryOptions *options,
                         struct PlpAnswerSet **out);

/**
 * Number of answers, including those with probability 0.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
size_t plp_answer_set_len(const struct PlpAnswerSet *set);

/**
 * Conditional probability of answer `i`, or NaN when out of range.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
double plp_answer_set_probability(const struct PlpAnswerSet *set, size_t i);

/**
 * Bindings of answer `i` as text such as `{X=rainy}`, owned by the set;
 * null when out of range.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
const char *plp_answer_set_bindings(const struct PlpAnswerSet *set, size_t i);

/**
 * Probability of the evidence, 1 without evidence.
 *
 * # Safety
 * `set` must be a live handle or null.
 */
double plp_answer_set_evidence_probability(const struct PlpAnswerSet *set);

/**
 * # Safety
 * `set` must come from [`plp_query`] and not be freed yet, or be null.
 */
void plp_answer_set_free(struct PlpAnswerSet *set);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PLP_H */
