#include "tyflow/translation.hpp"

#include <set>

namespace tyflow {

SynthesisRule to_synthesis_rule(const Language& lang, const TypingRule& rule,
                                int index) {
  SynthesisRule s;
  s.rule_index = index;
  s.id = rule.id;
  s.pred = rule.conclusion.pred;
  const auto& params = lang.pred(rule.conclusion.pred).params;
  for (size_t i = 0; i < params.size(); ++i)
    s.conclusion_vars.push_back(
        fresh_var(params[i], "a" + std::to_string(i)));
  s.conclusion_pattern = rule.conclusion.args;

  std::set<VarId> in_premises;
  for (const auto& p : rule.premises)
    for (const auto& v : free_vars(p.args))
      in_premises.insert(v->as_var()->id);
  for (const auto& v : free_vars(s.conclusion_pattern))
    if (!in_premises.count(v->as_var()->id)) s.free_vars.push_back(v);

  s.subgoals = rule.premises;
  s.constraints = rule.constraints;
  return s;
}

TypingRule to_typing_rule(const SynthesisRule& srule) {
  TypingRule r;
  r.id = srule.id;
  r.premises = srule.subgoals;
  r.constraints = srule.constraints;
  r.conclusion = Judgment{srule.pred, srule.conclusion_pattern};
  return r;
}

std::shared_ptr<const SynthRuleSet> build_synth_rules(const Language& lang) {
  auto set = std::make_shared<SynthRuleSet>();
  for (size_t i = 0; i < lang.rules().size(); ++i)
    set->rules.push_back(
        to_synthesis_rule(lang, lang.rules()[i], static_cast<int>(i)));
  return set;
}

const SynthRuleSet& synthesis_rules(const Language& lang) {
  const SynthRuleSet* s = lang.synth();
  if (!s) throw Fault("language has no cached synthesis rules");
  return *s;
}

namespace {
bool same_judgment(const Judgment& a, const Judgment& b) {
  return a.pred == b.pred && equal(a.args, b.args);
}
bool same_constraints(const std::vector<ConstraintUse>& a,
                      const std::vector<ConstraintUse>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (a[i].builtin != b[i].builtin || !equal(a[i].args, b[i].args))
      return false;
  return true;
}
}  // namespace

bool same_rule(const TypingRule& a, const TypingRule& b) {
  if (a.id != b.id || a.premises.size() != b.premises.size()) return false;
  for (size_t i = 0; i < a.premises.size(); ++i)
    if (!same_judgment(a.premises[i], b.premises[i])) return false;
  return same_constraints(a.constraints, b.constraints) &&
         same_judgment(a.conclusion, b.conclusion);
}

std::string print_synthesis_rule(const Language& lang, const SynthesisRule& r) {
  VarNumbering nums;
  std::string out = "S-";
  out += r.id.rfind("T-", 0) == 0 ? r.id.substr(2) : r.id;
  out += " (" + lang.pred(r.pred).name + "):\n";

  out += "  goal     ";
  out += lang.print_judgment(Judgment{r.pred, r.conclusion_vars}, nums);
  out += "\n  unify    ";
  for (size_t i = 0; i < r.conclusion_vars.size(); ++i) {
    if (i) out += ", ";
    out += lang.print_term(r.conclusion_vars[i], nums) + " = " +
           lang.print_term(r.conclusion_pattern[i], nums);
  }
  out += "\n  acquire  ";
  if (r.free_vars.empty()) out += "(none)";
  for (size_t i = 0; i < r.free_vars.size(); ++i) {
    if (i) out += ", ";
    out += lang.print_term(r.free_vars[i], nums) + " : " +
           lang.sort(r.free_vars[i]->sort()).name;
  }
  if (r.subgoals.empty()) out += "\n  solve    (none)";
  for (const auto& g : r.subgoals)
    out += "\n  solve    " + lang.print_judgment(g, nums);
  out += "\n  check    ";
  if (r.constraints.empty()) out += "(none)";
  for (size_t i = 0; i < r.constraints.size(); ++i) {
    if (i) out += ", ";
    out += r.constraints[i].name + "(";
    for (size_t j = 0; j < r.constraints[i].args.size(); ++j) {
      if (j) out += ", ";
      out += lang.print_term(r.constraints[i].args[j], nums);
    }
    out += ")";
  }
  out += "\n";
  return out;
}

std::string print_synthesis_rules(const Language& lang) {
  std::string out;
  for (const auto& r : synthesis_rules(lang).rules) {
    if (!out.empty()) out += "\n";
    out += print_synthesis_rule(lang, r);
  }
  return out;
}

bool same_synthesis_rule(const SynthesisRule& a, const SynthesisRule& b) {
  if (a.id != b.id || a.pred != b.pred) return false;
  if (!equal(a.conclusion_pattern, b.conclusion_pattern)) return false;
  if (!equal(a.free_vars, b.free_vars)) return false;
  if (a.subgoals.size() != b.subgoals.size()) return false;
  for (size_t i = 0; i < a.subgoals.size(); ++i)
    if (!same_judgment(a.subgoals[i], b.subgoals[i])) return false;
  if (!same_constraints(a.constraints, b.constraints)) return false;
  // The fresh conclusion variables are identity-free: only their sorts count.
  if (a.conclusion_vars.size() != b.conclusion_vars.size()) return false;
  for (size_t i = 0; i < a.conclusion_vars.size(); ++i)
    if (a.conclusion_vars[i]->sort() != b.conclusion_vars[i]->sort())
      return false;
  return true;
}

}  // namespace tyflow
