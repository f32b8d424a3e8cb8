#pragma once

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tyflow/subst.hpp"

namespace tyflow {

class Language;
struct SynthRuleSet;  // built by the rule-translation pass, cached on the language

struct Judgment {
  PredId pred;
  std::vector<TermPtr> args;
};

struct ConstraintUse {
  std::uint32_t builtin;  // index into the registry
  std::string name;
  std::vector<TermPtr> args;
};

// Constrained Horn clause: premises, one conjunctive computable constraint,
// a single conclusion. Every constraint variable must occur in some premise
// or in the conclusion.
struct TypingRule {
  std::string id;
  std::vector<Judgment> premises;
  std::vector<ConstraintUse> constraints;
  Judgment conclusion;
};

struct SortDecl {
  std::string name;
  SortKind kind;
  std::vector<SymbolId> constants;     // declaration order
  std::vector<SymbolId> constructors;  // declaration order
};

struct SymbolDecl {
  std::string name;
  SortId sort;                 // result sort
  std::vector<SortId> params;  // empty for constants
  bool is_constant() const { return params.empty(); }
};

struct PredicateDecl {
  std::string name;
  std::vector<SortId> params;
};

struct Diagnostic {
  int line = 0;
  int col = 0;
  std::string message;
};
std::string format_diagnostics(std::span<const Diagnostic> ds);

using ConstraintFn =
    std::function<bool(const Language&, std::span<const TermPtr>)>;

// Constraint solving for the checker: with some arguments still open, a
// builtin may bind them (Solved), refute the goal (Failed), or ask to be
// retried once more arguments are ground (Defer).
enum class SolveOutcome { Solved, Failed, Defer };
struct SolveResult {
  SolveOutcome outcome = SolveOutcome::Defer;
  Subst binding;  // meaningful only when Solved
};
using SolveFn =
    std::function<SolveResult(const Language&, std::span<const TermPtr>)>;

struct ConstraintBuiltin {
  std::string name;
  size_t arity;
  ConstraintFn fn;
  SolveFn solve;  // optional; null means ground-only evaluation
};

// Deterministic per-call variable numbering for canonical printing: ids are
// renumbered from 0 in first-occurrence order.
struct VarNumbering {
  std::unordered_map<VarId, int> ids;
  int next = 0;
  int number(VarId v) {
    auto [it, fresh] = ids.emplace(v, next);
    if (fresh) ++next;
    return it->second;
  }
};

// A validated language definition: sorts, constructors/constants, predicates,
// CHC typing rules, the root predicate, the text-atom name pool, and the
// constraint registry. Immutable once loaded, except for `ingest_*`, which
// may only extend the name pool before the definition is shared across
// threads.
class Language {
 public:
  const std::string& name() const { return name_; }

  std::optional<SortId> sort_by_name(const std::string& n) const;
  const SortDecl& sort(SortId s) const { return sorts_[s]; }
  size_t sort_count() const { return sorts_.size(); }

  std::optional<SymbolId> symbol_by_name(const std::string& n) const;
  const SymbolDecl& symbol(SymbolId s) const { return symbols_[s]; }
  size_t symbol_count() const { return symbols_.size(); }

  std::optional<PredId> pred_by_name(const std::string& n) const;
  const PredicateDecl& pred(PredId p) const { return preds_[p]; }
  size_t pred_count() const { return preds_.size(); }

  PredId root_pred() const { return root_; }
  const std::vector<TypingRule>& rules() const { return rules_; }
  std::optional<int> rule_by_id(const std::string& id) const;

  const std::vector<std::string>& name_pool() const { return name_pool_; }
  bool pool_has(const std::string& atom) const;
  // Load-time pool extension: out-of-pool text literals of ingested programs
  // become legal NAME tokens (appended in encounter order, deduplicated).
  void ingest_atom(const std::string& atom);
  void ingest_literals(const TermPtr& t);

  const std::vector<ConstraintBuiltin>& builtins() const { return builtins_; }
  std::optional<std::uint32_t> builtin_by_name(const std::string& n) const;
  // Dispatch on ground arguments; a non-ground argument is a fault.
  bool eval_constraint(const ConstraintUse& c,
                       std::span<const TermPtr> args) const;
  // Dispatch tolerant of open arguments: falls back to eval when everything
  // is ground, otherwise consults the builtin's solver (Defer if it has none).
  SolveResult solve_constraint(const ConstraintUse& c,
                               std::span<const TermPtr> args) const;

  TermPtr make_constant(SymbolId sym) const;
  TermPtr make_apply(SymbolId ctor, std::vector<TermPtr> children) const;

  // nullopt when well-sorted; otherwise a diagnostic naming the first
  // offending subterm with expected/actual sorts.
  std::optional<std::string> check_sort(const TermPtr& t, SortId expected) const;

  // Canonical syntax: constants and atoms bare, applications as
  // "(ctor child ...)", variables as "?hint.N" with per-call renumbering
  // unless a shared numbering is supplied.
  std::string print_term(const TermPtr& t) const;
  std::string print_term(const TermPtr& t, VarNumbering& nums) const;
  std::string print_judgment(const Judgment& j) const;
  std::string print_judgment(const Judgment& j, VarNumbering& nums) const;

  struct TermParse {
    TermPtr term;  // null on failure
    std::vector<Diagnostic> diagnostics;
    bool ok() const { return term != nullptr; }
  };
  TermParse parse_term(const std::string& text, SortId expected) const;

  // Semantic re-validation of an already-built definition; empty = valid.
  std::vector<Diagnostic> validate() const;

  const SynthRuleSet* synth() const { return synth_.get(); }
  void set_synth(std::shared_ptr<const SynthRuleSet> s) { synth_ = std::move(s); }

  // Builder surface for the parser (and tests constructing tiny languages).
  void set_name(std::string n) { name_ = std::move(n); }
  SortId add_sort(std::string n, SortKind kind);
  SymbolId add_symbol(std::string n, SortId sort, std::vector<SortId> params);
  PredId add_pred(std::string n, std::vector<SortId> params);
  void set_root(PredId p) { root_ = p; }
  void add_rule(TypingRule r) { rules_.push_back(std::move(r)); }
  void add_pool_atom(std::string atom);
  static std::vector<ConstraintBuiltin> default_builtins();

 private:
  std::string name_;
  std::vector<SortDecl> sorts_;
  std::vector<SymbolDecl> symbols_;
  std::vector<PredicateDecl> preds_;
  std::vector<TypingRule> rules_;
  PredId root_ = 0;
  std::vector<std::string> name_pool_;
  std::vector<ConstraintBuiltin> builtins_ = default_builtins();
  std::unordered_map<std::string, SortId> sort_index_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::unordered_map<std::string, PredId> pred_index_;
  std::shared_ptr<const SynthRuleSet> synth_;
};

struct LanguageParse {
  std::shared_ptr<Language> language;  // null when diagnostics contain errors
  std::vector<Diagnostic> diagnostics;
  bool ok() const { return language != nullptr; }
};

// Parse + validate a definition file; on success the synthesis-rule cache is
// already populated. Whitespace-insensitive, '#' starts a line comment.
LanguageParse parse_language(const std::string& text);
LanguageParse parse_language_file(const std::string& path);

}  // namespace tyflow
