#pragma once

#include "tyflow/engine.hpp"
#include "tyflow/typecheck.hpp"

#include "json.hpp"

namespace tyflow {

// Replays a finished derivation as a decision sequence: at a rule site it
// answers with the node's rule, at a fill site it matches the conclusion
// instance against the node's (ground) judgment and reads the hole's value
// off the match. Stateless between picks; the tree must outlive the oracle.
class TreeOracle : public Oracle {
 public:
  explicit TreeOracle(const TypeTree& tree) : root_(&tree) {}
  std::optional<Token> pick(const SynthSession& s,
                            std::span<const Token> legal) override;

 private:
  const TypeTree* root_;
};

// Decision sequence that rebuilds `tree` from scratch. Faults if the tree
// does not drive a session at tree.judgment to completion — e.g. a name
// outside the language's pool (ingest it first) or a non-ground tree.
std::vector<Token> tree_to_decisions(std::shared_ptr<const Language> lang,
                                     const TypeTree& tree,
                                     SynthOptions opts = {});

struct ReplayResult {
  bool complete = false;
  size_t consumed = 0;                   // tokens fed and accepted
  std::optional<RejectSite> reject;      // set when a feed was refused
  SynthSession session;
};

// Feeds tokens in order against the root goal, stopping at the first
// rejection or at completion (trailing tokens are left unconsumed).
ReplayResult replay(std::shared_ptr<const Language> lang,
                    std::span<const Token> tokens, SynthOptions opts = {});

// One supervision example: the live goal the decision was made under, the
// tokens already emitted, and the correct next token. Goals are printed
// with one variable numbering shared across the whole record, so a
// variable keeps its name from step to step.
struct StepRecord {
  size_t index = 0;
  std::string goal;
  std::vector<std::string> prefix;
  std::string next;
  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct TaskRecord {
  std::string id;
  std::string prompt;
  std::string program;               // canonical printed form
  std::vector<std::string> tokens;   // full decision sequence
  std::vector<StepRecord> steps;     // one per token, state before feeding it
  friend bool operator==(const TaskRecord&, const TaskRecord&) = default;
};

// Derives the program, extracts its decision sequence, and replays it to
// capture per-step goals. Faults if the program does not type-check.
TaskRecord build_record(std::shared_ptr<const Language> lang, std::string id,
                        std::string prompt, const TermPtr& program,
                        SynthOptions opts = {});

// Full replay audit: every token accepted, session completes exactly at the
// last token, program and steps match what a fresh replay produces.
// Returns an explanation of the first mismatch, or nullopt if clean.
std::optional<std::string> validate_record(
    std::shared_ptr<const Language> lang, const TaskRecord& rec,
    SynthOptions opts = {});

nlohmann::ordered_json record_to_json(const TaskRecord& rec);
TaskRecord record_from_json(const nlohmann::ordered_json& j);
std::string records_to_jsonl(std::span<const TaskRecord> recs);
std::vector<TaskRecord> records_from_jsonl(const std::string& text);

// Source material: {"id", "prompt", "program"} per line, program in the
// language's surface syntax. Faults with a line number on bad input.
struct CorpusEntry {
  std::string id;
  std::string prompt;
  std::string program;
};

std::vector<CorpusEntry> parse_corpus(const std::string& jsonl);

struct DatasetBuild {
  std::vector<TaskRecord> records;
  std::vector<std::string> skipped;  // "id: reason" per rejected entry
};

// Two passes: first parse every program and ingest its atoms so the name
// pool (and with it every legal set) is fixed, then build one record per
// entry. Entries that fail to parse or type-check are reported, not fatal.
// Pass two fans out over `jobs` threads; records and skip reports come back
// in input order regardless.
DatasetBuild build_dataset(const std::shared_ptr<Language>& lang,
                           std::span<const CorpusEntry> entries,
                           SynthOptions opts = {}, size_t jobs = 1);

}  // namespace tyflow
