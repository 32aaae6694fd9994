#ifndef ONE3PROBE_H
#define ONE3PROBE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum One3Decode {
  ONE3_DECODE_F_CONSISTENT = 0,
  ONE3_DECODE_PAPER_LITERAL = 1,
} One3Decode;

typedef enum One3Mode {
  ONE3_MODE_REPAIRED = 0,
  ONE3_MODE_FAITHFUL = 1,
} One3Mode;

typedef enum One3Status {
  ONE3_STATUS_OK = 0,
  ONE3_STATUS_NULL_POINTER = 1,
  ONE3_STATUS_INVALID_UTF8 = 2,
  ONE3_STATUS_PARSE = 3,
  ONE3_STATUS_INVALID_FORMULA = 4,
  ONE3_STATUS_GUARD_EXCEEDED = 5,
  ONE3_STATUS_INVALID_ARGUMENT = 6,
  ONE3_STATUS_NO_WITNESS = 7,
  ONE3_STATUS_INTERNAL = 8,
} One3Status;

/**
 * A parsed, validated positive 3CNF formula.
 */
typedef struct One3Formula One3Formula;

/**
 * The outcome of [`one3_solve`].
 */
typedef struct One3SolveResult One3SolveResult;

/**
 * Search counters.
 */
typedef struct One3Stats {
  uint64_t calls;
  uint64_t max_depth;
  uint64_t cells_evaluated;
  bool budget_exhausted;
} One3Stats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Parses `p3cnf` text into a new formula handle stored in `*out`.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum One3Status one3_formula_parse(const char *text, struct One3Formula **out);

/**
 * Releases a formula handle. Null is ignored.
 *
 * # Safety
 * `f` must come from [`one3_formula_parse`] and not be used afterwards.
 */
void one3_formula_free(struct One3Formula *f);

/**
 * Number of variables, or 0 for null.
 *
 * # Safety
 * `f` must be null or a live formula handle.
 */
size_t one3_formula_num_vars(const struct One3Formula *f);

/**
 * Number of clauses, or 0 for null.
 *
 * # Safety
 * `f` must be null or a live formula handle.
 */
size_t one3_formula_num_clauses(const struct One3Formula *f);

/**
 * Writes the expanded formula as `p3cnf` text to `*out`.
 *
 * # Safety
 * `f` must be a live formula handle; `out` must be writable.
 */
enum One3Status one3_formula_expand(const struct One3Formula *f, char **out);

/**
 * Brute-force 1-in-3 satisfiability. On success `*satisfiable` is set and,
 * if `witness` is non-null, `*witness` receives the smallest witness as a
 * `0`/`1` string (`z_1` first), or null when unsatisfiable.
 *
 * # Safety
 * `f` must be a live formula handle; `satisfiable` must be writable;
 * `witness` must be null or writable.
 */
enum One3Status one3_oracle(const struct One3Formula *f, bool *satisfiable, char **witness);

/**
 * Expands and searches `f`. A `call_budget` of 0 selects the default.
 *
 * # Safety
 * `f` must be a live formula handle; `out` must be writable.
 */
enum One3Status one3_solve(const struct One3Formula *f,
                           enum One3Mode mode,
                           enum One3Decode decode,
                           uint64_t call_budget,
                           struct One3SolveResult **out);

/**
 * Releases a solve result. Null is ignored.
 *
 * # Safety
 * `r` must come from [`one3_solve`] and not be used afterwards.
 */
void one3_result_free(struct One3SolveResult *r);

/**
 * Whether the search reported the target as found; false for null.
 *
 * # Safety
 * `r` must be null or a live result handle.
 */
bool one3_result_found(const struct One3SolveResult *r);

/**
 * Copies the search counters into `*out`.
 *
 * # Safety
 * `r` must be a live result handle; `out` must be writable.
 */
enum One3Status one3_result_stats(const struct One3SolveResult *r, struct One3Stats *out);

/**
 * The witness over the input's variables as a `0`/`1` string. Returns
 * `NoWitness` when the search produced none (faithful mode never does).
 *
 * # Safety
 * `r` must be a live result handle; `out` must be writable.
 */
enum One3Status one3_result_witness(const struct One3SolveResult *r, char **out);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void one3_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. Valid until
 * the next call into this library on the same thread.
 */
const char *one3_last_error(void);

/**
 * Library version, statically allocated.
 */
const char *one3_version(void);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* ONE3PROBE_H */
