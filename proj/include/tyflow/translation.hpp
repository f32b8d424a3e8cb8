#pragma once

#include "tyflow/language.hpp"

namespace tyflow {

// Synthesis normal form of a CHC typing rule. Applying the rule to a goal
// P(t̄) means: unify t̄ against the conclusion pattern x̄₀, acquire ground
// instantiations for the free variables x̄_f (conclusion variables that occur
// in no premise, ordered by first pre-order occurrence in x̄₀), solve the
// subgoals left to right threading substitutions, then check the constraint.
struct SynthesisRule {
  int rule_index = -1;
  std::string id;
  PredId pred = 0;
  std::vector<TermPtr> conclusion_vars;     // x̄: fresh, one per conclusion arg
  std::vector<TermPtr> conclusion_pattern;  // x̄₀: the rule's conclusion args
  std::vector<TermPtr> free_vars;           // x̄_f
  std::vector<Judgment> subgoals;           // premises, original variables
  std::vector<ConstraintUse> constraints;
};

struct SynthRuleSet {
  std::vector<SynthesisRule> rules;  // parallel to Language::rules()
};

// φ: typing rule -> synthesis rule. Pure; the per-language result is computed
// once at load and cached on the Language.
SynthesisRule to_synthesis_rule(const Language& lang, const TypingRule& rule,
                                int index);

// ψ: synthesis rule -> typing rule. Drops the fresh conclusion variables and
// the unification step; the original schematic variables come back verbatim,
// so ψ∘φ is the identity up to nothing at all.
TypingRule to_typing_rule(const SynthesisRule& srule);

std::shared_ptr<const SynthRuleSet> build_synth_rules(const Language& lang);

// Cached set; faults if the language was built without the translation pass.
const SynthRuleSet& synthesis_rules(const Language& lang);

// Structural equality at variable-identity level (ids, not hints).
bool same_rule(const TypingRule& a, const TypingRule& b);
bool same_synthesis_rule(const SynthesisRule& a, const SynthesisRule& b);

// Textual layout per rule: goal pattern, pairwise unification, acquired
// variables with sorts, subgoal templates, constraint. Variables are
// renumbered per rule, so the output is stable across loads.
std::string print_synthesis_rule(const Language& lang, const SynthesisRule& r);
std::string print_synthesis_rules(const Language& lang);

}  // namespace tyflow
