/* C surface over the synthesis core: load a language definition, type-check
 * programs, drive a token-stepped synthesis session, extract datasets, train
 * and search with n-gram policies, or enumerate every program in budget.
 *
 * Conventions: functions return a tyflow_status; `char**` outputs receive
 * malloc'd UTF-8 released with tyflow_string_free; every output pointer may
 * be NULL when the caller does not want that result. On failure `err` (when
 * present and non-NULL) receives a human-readable diagnostic.
 *
 * A language handle is mutable only through the ingesting entry points
 * (extract / roundtrip / train): those extend the name pool and must not
 * race with any other use of the same handle. Everything else only reads,
 * and distinct handles are fully independent.
 */
#ifndef TYFLOW_H
#define TYFLOW_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tyflow_status {
  TYFLOW_OK = 0,
  TYFLOW_EINVAL = 1, /* null or out-of-range argument */
  TYFLOW_EPARSE = 2, /* input text did not parse or validate */
  TYFLOW_EFAIL = 3,  /* domain failure: ill-typed, rejected, mismatched */
  TYFLOW_ESTATE = 4, /* call out of sequence for this handle */
  TYFLOW_ENOENT = 5, /* unknown builtin name or unreadable file */
} tyflow_status;

typedef struct tyflow_language tyflow_language;
typedef struct tyflow_session tyflow_session;

const char* tyflow_version(void);
void tyflow_string_free(char* s);

/* ---- language handles ---------------------------------------------- */

tyflow_status tyflow_language_from_text(const char* text,
                                        tyflow_language** out, char** err);
tyflow_status tyflow_language_from_file(const char* path,
                                        tyflow_language** out, char** err);
/* A fresh private copy of a bundled definition ("stlc", "stlc-ext", ...). */
tyflow_status tyflow_language_builtin(const char* name, tyflow_language** out,
                                      char** err);
void tyflow_language_free(tyflow_language* lang);

tyflow_status tyflow_language_name(const tyflow_language* lang, char** out);
/* Newline-separated names of the bundled definitions. */
tyflow_status tyflow_builtin_names(char** out);
/* The bundled corpus for a builtin name, as corpus JSONL. */
tyflow_status tyflow_builtin_corpus(const char* name, char** out, char** err);
/* Textual synthesis-rule table (one block per typing rule). */
tyflow_status tyflow_language_rules(const tyflow_language* lang, char** out);

/* ---- type checking -------------------------------------------------- */

/* OK: the program derives; *tree (if wanted) gets the indented derivation.
 * EPARSE: the term text is bad. EFAIL: well-formed but does not derive. */
tyflow_status tyflow_check(const tyflow_language* lang, const char* program,
                           int want_tree, char** tree, char** err);

/* ---- token-stepped synthesis session (root goal) -------------------- */

/* max_tokens / max_depth <= 0 pick the defaults (256 / 64). */
tyflow_status tyflow_session_new(const tyflow_language* lang, int max_tokens,
                                 int max_depth, tyflow_session** out,
                                 char** err);
void tyflow_session_free(tyflow_session* s);

/* Space-separated tokens a feed would accept; empty string when stuck. */
tyflow_status tyflow_session_legal(const tyflow_session* s, char** out);
/* EPARSE: unreadable token. EFAIL: parsed but refused; *detail names the
 * rejecting check (grammar/unify/constraint/budget/depth). ESTATE: already
 * complete. OK covers both plain acceptance and completion. */
tyflow_status tyflow_session_feed(tyflow_session* s, const char* token,
                                  char** detail);
int tyflow_session_done(const tyflow_session* s);
tyflow_status tyflow_session_history(const tyflow_session* s, char** out);
/* The finished program in canonical syntax; ESTATE before completion. */
tyflow_status tyflow_session_program(const tyflow_session* s, char** out,
                                     char** err);

/* ---- datasets ------------------------------------------------------- */

/* Corpus JSONL in, task-record JSONL out. Unusable entries are reported one
 * per line in *skipped ("" when none) and do not fail the call. jobs <= 1
 * for sequential; output order is input order regardless. */
tyflow_status tyflow_extract(tyflow_language* lang, const char* corpus_jsonl,
                             int jobs, char** dataset_jsonl, char** skipped,
                             char** err);

/* Whitespace-separated decision tokens in, program out. On EFAIL *consumed
 * is the index of the first refused token and *detail the rejecting check,
 * or "incomplete" when the sequence ran out early. On OK *consumed counts
 * the tokens actually used (trailing extras are left unread). */
tyflow_status tyflow_replay(const tyflow_language* lang, const char* tokens,
                            char** program, size_t* consumed, char** detail,
                            char** err);

/* Per-entry audit: derive, extract, validate, replay, compare. One JSONL row
 * per entry {"id", "status", ...}; status "ok" carries the token count,
 * anything else ("parse", "check", "extract", "replay") a detail message.
 * Returns EFAIL when any row is not ok (the table is still produced). */
tyflow_status tyflow_roundtrip(tyflow_language* lang, const char* corpus_jsonl,
                               int jobs, char** table_jsonl, char** err);

/* ---- policies and search -------------------------------------------- */

/* Train an n-gram policy on the corpus (order >= 1); the returned model text
 * round-trips through tyflow_synth. Strict: any unusable entry is EFAIL. */
tyflow_status tyflow_train_ngram(tyflow_language* lang,
                                 const char* corpus_jsonl, int order,
                                 int goal_conditioned, char** model,
                                 char** err);

/* Beam search from the root goal. model == NULL means the uniform policy.
 * Report: one JSONL line per candidate {"rank", "program", "weight",
 * "well_typed", "tokens"} ranked by weight, then one summary line
 * {"candidates", "elapsed", "seed"} (elapsed in ms, informational). */
tyflow_status tyflow_synth(tyflow_language* lang, const char* prompt,
                           const char* model, int beam, int max_tokens,
                           int refill, uint64_t seed, char** report,
                           char** err);

/* Every derivable program within the token budget, canonical order. One
 * JSONL line per program {"rank", "program", "tokens"}; *programs and
 * *explored receive the totals. type_pruning = 0 runs the ablation. */
tyflow_status tyflow_enumerate(const tyflow_language* lang, int max_tokens,
                               int type_pruning, char** programs_jsonl,
                               uint64_t* programs, uint64_t* explored,
                               char** err);

#ifdef __cplusplus
}
#endif

#endif /* TYFLOW_H */
