#pragma once

#include <memory>
#include <random>

#include "tyflow/translation.hpp"
#include "tyflow/typecheck.hpp"

namespace tyflow {

// One decision: which rule closes the current goal, or which symbol/name
// fills the current hole of an acquisition.
struct Token {
  enum class Kind { Rule, Con, Const, Name };
  Kind kind = Kind::Rule;
  std::uint32_t index = 0;  // Rule: rule index; Con/Const: symbol id
  std::string atom;         // Name payload
  friend bool operator==(const Token&, const Token&) = default;
};

// Textual form: "R:<rule-id>", "C:<constructor>", "K:<constant>", "N:<atom>".
std::string print_token(const Language& lang, const Token& tok);
std::optional<Token> parse_token(const Language& lang, const std::string& text);
std::string print_tokens(const Language& lang, std::span<const Token> toks);

// Canonical order: rules by declaration index, then symbols by declaration
// id, then pool names by pool position.
std::uint64_t token_rank(const Language& lang, const Token& tok);

struct Limits {
  int max_tokens = 256;
  int max_depth = 64;
};

struct SynthOptions {
  Limits limits{};
  // Off: unification/constraint failures no longer reject tokens; the branch
  // is marked doomed and runs on under grammar checks alone. Completions of
  // doomed branches are never accepted, so the accepted set is unchanged.
  bool type_pruning = true;
  // Audit the acquisition-groundness invariant with faults (pruning mode).
  bool check_groundness = false;
};

enum class FeedStatus { Accepted, Rejected, Complete };
enum class RejectSite { Grammar, Unify, Constraint, Budget, Depth };
constexpr int kRejectSites = 5;
const char* reject_site_name(RejectSite s);

struct FeedResult {
  FeedStatus status = FeedStatus::Rejected;
  RejectSite site = RejectSite::Grammar;  // meaningful when Rejected
  bool ok() const { return status != FeedStatus::Rejected; }
};

enum class SiteKind { Rule, Fill, Done };

// An interactive synthesis derivation: feed decision tokens one at a time;
// each is accepted, rejected (with the check that refused it), or completes
// the program. Sessions are value types - copy to branch the search.
class SynthSession {
 public:
  SynthSession(std::shared_ptr<const Language> lang, Judgment goal,
               SynthOptions opts = {});
  // Goal root(?prog) for the language's unary root predicate.
  static SynthSession for_root(std::shared_ptr<const Language> lang,
                               SynthOptions opts = {});

  FeedResult feed(const Token& tok);

  SiteKind site() const;
  bool done() const { return done_; }
  bool doomed() const { return doomed_; }
  const std::vector<Token>& history() const { return history_; }
  const Judgment& goal() const { return goal_; }
  const SynthOptions& options() const { return opts_; }
  const Language& language() const { return *lang_; }
  const std::shared_ptr<const Language>& language_ptr() const { return lang_; }

  // Grammar-level universe at the current site, canonically ordered.
  std::vector<Token> candidate_tokens() const;
  // The subset a feed would accept, determined by trial on a copy.
  std::vector<Token> legal_tokens() const;

  // Introspection for oracles. Fault when the frame does not exist or is in
  // the wrong phase.
  size_t stack_depth() const { return stack_.size(); }
  // For each frame except the innermost: the premise index its successor
  // frame is solving. Identifies the active path through a derivation tree.
  std::vector<size_t> frame_child_path() const;
  Judgment frame_goal() const;         // top-frame goal under σ
  int frame_rule() const;              // -1 before the rule token
  std::vector<TermPtr> frame_conclusion_instance() const;  // σ(ρ(x̄₀))
  TermPtr fill_hole() const;           // Fill site: the open variable

  // Final answers; fault unless done (derivation also requires not doomed).
  Subst theta() const;      // σ restricted to the goal's free variables
  TermPtr program() const;  // unary goals: θ applied to the argument
  const TypeTree& derivation() const;

 private:
  struct Frame {
    Judgment goal;
    int depth = 1;
    int rule_index = -1;
    const SynthesisRule* srule = nullptr;
    Subst rho;                   // rule variables -> this application's copies
    std::vector<TermPtr> fills;  // open acquisition positions, pre-order
    size_t fill_pos = 0;
    size_t next_subgoal = 0;
    std::vector<TypeTree> children;
  };

  std::optional<RejectSite> apply_token(const Token& tok);
  std::optional<RejectSite> settle();
  void audit_fills(const Frame& f) const;

  std::shared_ptr<const Language> lang_;
  Judgment goal_;
  SynthOptions opts_;
  Subst sigma_;
  std::vector<Frame> stack_;
  std::vector<Token> history_;
  bool done_ = false;
  bool doomed_ = false;
  TypeTree root_tree_;
};

// Answers one decision at a time; `legal` is never empty.
class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::optional<Token> pick(const SynthSession& s,
                                    std::span<const Token> legal) = 0;
};

class RandomOracle : public Oracle {
 public:
  explicit RandomOracle(std::uint64_t seed) : rng_(seed) {}
  std::optional<Token> pick(const SynthSession& s,
                            std::span<const Token> legal) override;

 private:
  std::mt19937_64 rng_;
};

// Replays a fixed sequence, then quits.
class ScriptOracle : public Oracle {
 public:
  explicit ScriptOracle(std::vector<Token> toks) : toks_(std::move(toks)) {}
  std::optional<Token> pick(const SynthSession& s,
                            std::span<const Token> legal) override;

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
};

enum class SynthOutcome { Complete, Stuck, OracleQuit };

struct SynthResult {
  SynthOutcome outcome = SynthOutcome::Stuck;
  SynthSession session;
};

// Drives the session to completion or a dead end. An oracle reply outside
// the legal set is a fault: oracles choose, they do not probe.
SynthResult gen_synth_tree(SynthSession session, Oracle& oracle);

struct EnumStats {
  std::uint64_t attempted = 0;
  std::uint64_t explored = 0;   // accepted feeds, i.e. search nodes
  std::uint64_t completed = 0;  // completions reached, doomed included
  std::uint64_t accepted_programs = 0;
  std::uint64_t rejected_by[kRejectSites] = {};
};

struct EnumResult {
  std::vector<SynthSession> programs;  // completed, not doomed; DFS order
  EnumStats stats;
};

// Exhaustive depth-first search in canonical token order, bounded by the
// session's token budget.
EnumResult enumerate_all(const SynthSession& start);

}  // namespace tyflow
