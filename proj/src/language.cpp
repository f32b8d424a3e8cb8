#include "tyflow/language.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "tyflow/unify.hpp"

namespace tyflow {

std::string format_diagnostics(std::span<const Diagnostic> ds) {
  std::ostringstream os;
  for (const auto& d : ds) {
    if (d.line > 0)
      os << d.line << ":" << d.col << ": ";
    os << d.message << "\n";
  }
  return os.str();
}

std::optional<SortId> Language::sort_by_name(const std::string& n) const {
  auto it = sort_index_.find(n);
  if (it == sort_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<SymbolId> Language::symbol_by_name(const std::string& n) const {
  auto it = symbol_index_.find(n);
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<PredId> Language::pred_by_name(const std::string& n) const {
  auto it = pred_index_.find(n);
  if (it == pred_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Language::rule_by_id(const std::string& id) const {
  for (size_t i = 0; i < rules_.size(); ++i)
    if (rules_[i].id == id) return static_cast<int>(i);
  return std::nullopt;
}

bool Language::pool_has(const std::string& atom) const {
  return std::find(name_pool_.begin(), name_pool_.end(), atom) != name_pool_.end();
}

void Language::ingest_atom(const std::string& atom) {
  if (!pool_has(atom)) name_pool_.push_back(atom);
}

void Language::ingest_literals(const TermPtr& t) {
  if (const auto* tx = t->as_text()) {
    ingest_atom(tx->atom);
    return;
  }
  if (const auto* ap = t->as_apply())
    for (const auto& c : ap->children) ingest_literals(c);
}

std::optional<std::uint32_t> Language::builtin_by_name(const std::string& n) const {
  for (size_t i = 0; i < builtins_.size(); ++i)
    if (builtins_[i].name == n) return static_cast<std::uint32_t>(i);
  return std::nullopt;
}

bool Language::eval_constraint(const ConstraintUse& c,
                               std::span<const TermPtr> args) const {
  const auto& b = builtins_.at(c.builtin);
  if (args.size() != b.arity)
    throw Fault("constraint " + b.name + ": arity mismatch");
  for (const auto& a : args)
    if (!a->ground())
      throw Fault("constraint " + b.name + ": non-ground argument " + print_term(a));
  return b.fn(*this, args);
}

SolveResult Language::solve_constraint(const ConstraintUse& c,
                                       std::span<const TermPtr> args) const {
  const auto& b = builtins_.at(c.builtin);
  if (args.size() != b.arity)
    throw Fault("constraint " + b.name + ": arity mismatch");
  bool all_ground = true;
  for (const auto& a : args) all_ground = all_ground && a->ground();
  if (all_ground)
    return {b.fn(*this, args) ? SolveOutcome::Solved : SolveOutcome::Failed, {}};
  if (!b.solve) return {SolveOutcome::Defer, {}};
  return b.solve(*this, args);
}

TermPtr Language::make_constant(SymbolId sym) const {
  const auto& d = symbols_.at(sym);
  if (!d.is_constant()) throw Fault("make_constant: " + d.name + " is a constructor");
  return Term::constant(sym, d.sort);
}

TermPtr Language::make_apply(SymbolId ctor, std::vector<TermPtr> children) const {
  const auto& d = symbols_.at(ctor);
  if (d.is_constant()) throw Fault("make_apply: " + d.name + " is a constant");
  if (children.size() != d.params.size())
    throw Fault("make_apply: " + d.name + ": arity mismatch");
  for (size_t i = 0; i < children.size(); ++i)
    if (children[i]->sort() != d.params[i])
      throw Fault("make_apply: " + d.name + ": ill-sorted child");
  return Term::apply(ctor, d.sort, std::move(children));
}

std::optional<std::string> Language::check_sort(const TermPtr& t,
                                                SortId expected) const {
  if (t->sort() != expected)
    return "term " + print_term(t) + " has sort " + sorts_.at(t->sort()).name +
           ", expected " + sorts_.at(expected).name;
  const auto& sd = sorts_.at(expected);
  if (const auto* c = t->as_constant()) {
    const auto& sym = symbols_.at(c->sym);
    if (sym.sort != expected || !sym.is_constant())
      return "constant " + sym.name + " does not belong to sort " + sd.name;
    return std::nullopt;
  }
  if (t->as_text()) {
    if (sd.kind != SortKind::Text)
      return "text atom " + print_term(t) + " used at non-text sort " + sd.name;
    return std::nullopt;
  }
  if (t->as_int()) {
    if (sd.kind != SortKind::Int)
      return "int literal " + print_term(t) + " used at non-int sort " + sd.name;
    return std::nullopt;
  }
  if (t->as_var()) return std::nullopt;
  const auto* ap = t->as_apply();
  const auto& sym = symbols_.at(ap->ctor);
  if (sym.sort != expected)
    return "constructor " + sym.name + " builds sort " + sorts_.at(sym.sort).name +
           ", expected " + sd.name;
  if (sym.params.size() != ap->children.size())
    return "constructor " + sym.name + " expects " +
           std::to_string(sym.params.size()) + " arguments, got " +
           std::to_string(ap->children.size());
  for (size_t i = 0; i < ap->children.size(); ++i)
    if (auto err = check_sort(ap->children[i], sym.params[i])) return err;
  return std::nullopt;
}

namespace {
void print_into(const Language& lang, const TermPtr& t, VarNumbering& nums,
                std::string& out) {
  if (const auto* c = t->as_constant()) {
    out += lang.symbol(c->sym).name;
    return;
  }
  if (const auto* tx = t->as_text()) {
    out += tx->atom;
    return;
  }
  if (const auto* il = t->as_int()) {
    out += std::to_string(il->value);
    return;
  }
  if (const auto* v = t->as_var()) {
    out += "?" + v->hint + "." + std::to_string(nums.number(v->id));
    return;
  }
  const auto* ap = t->as_apply();
  out += "(";
  out += lang.symbol(ap->ctor).name;
  for (const auto& c : ap->children) {
    out += " ";
    print_into(lang, c, nums, out);
  }
  out += ")";
}
}  // namespace

std::string Language::print_term(const TermPtr& t) const {
  VarNumbering nums;
  return print_term(t, nums);
}

std::string Language::print_term(const TermPtr& t, VarNumbering& nums) const {
  std::string out;
  print_into(*this, t, nums, out);
  return out;
}

std::string Language::print_judgment(const Judgment& j) const {
  VarNumbering nums;
  return print_judgment(j, nums);
}

std::string Language::print_judgment(const Judgment& j, VarNumbering& nums) const {
  std::string out = preds_.at(j.pred).name + "(";
  for (size_t i = 0; i < j.args.size(); ++i) {
    if (i) out += ", ";
    out += print_term(j.args[i], nums);
  }
  out += ")";
  return out;
}

SortId Language::add_sort(std::string n, SortKind kind) {
  auto id = static_cast<SortId>(sorts_.size());
  sort_index_[n] = id;
  sorts_.push_back({std::move(n), kind, {}, {}});
  return id;
}

SymbolId Language::add_symbol(std::string n, SortId sort,
                              std::vector<SortId> params) {
  auto id = static_cast<SymbolId>(symbols_.size());
  symbol_index_[n] = id;
  if (params.empty())
    sorts_.at(sort).constants.push_back(id);
  else
    sorts_.at(sort).constructors.push_back(id);
  symbols_.push_back({std::move(n), sort, std::move(params)});
  return id;
}

PredId Language::add_pred(std::string n, std::vector<SortId> params) {
  auto id = static_cast<PredId>(preds_.size());
  pred_index_[n] = id;
  preds_.push_back({std::move(n), std::move(params)});
  return id;
}

void Language::add_pool_atom(std::string atom) {
  if (!pool_has(atom)) name_pool_.push_back(std::move(atom));
}

namespace {

// Contexts are cons-lists built from any arity-3 constructor
// (rest, name, type) with some arity-0 end marker; lookup respects shadowing
// by taking the innermost (outermost-application-first) binding.
const TermPtr* find_binding(const TermPtr& ctx, const TermPtr& name) {
  const auto* ap = ctx->as_apply();
  if (!ap || ap->children.size() != 3) return nullptr;
  if (equal(ap->children[1], name)) return &ap->children[2];
  return find_binding(ap->children[0], name);
}

}  // namespace

std::vector<ConstraintBuiltin> Language::default_builtins() {
  std::vector<ConstraintBuiltin> out;
  out.push_back({"lookup", 3,
                 [](const Language&, std::span<const TermPtr> a) {
                   const TermPtr* ty = find_binding(a[0], a[1]);
                   return ty != nullptr && equal(*ty, a[2]);
                 },
                 // Functional mode: with the context and name ground, the
                 // bound type is computed and matched against the third slot.
                 [](const Language&, std::span<const TermPtr> a) -> SolveResult {
                   if (!a[0]->ground() || !a[1]->ground())
                     return {SolveOutcome::Defer, {}};
                   const TermPtr* ty = find_binding(a[0], a[1]);
                   if (!ty) return {SolveOutcome::Failed, {}};
                   auto u = unify(a[2], *ty);
                   if (!u.ok()) return {SolveOutcome::Failed, {}};
                   return {SolveOutcome::Solved, std::move(*u.mgu)};
                 }});
  out.push_back({"not_bound", 2,
                 [](const Language&, std::span<const TermPtr> a) {
                   return find_binding(a[0], a[1]) == nullptr;
                 },
                 nullptr});
  out.push_back({"eq", 2,
                 [](const Language&, std::span<const TermPtr> a) {
                   return equal(a[0], a[1]);
                 },
                 // Syntactic equality solves by unification.
                 [](const Language&, std::span<const TermPtr> a) -> SolveResult {
                   auto u = unify(a[0], a[1]);
                   if (!u.ok()) return {SolveOutcome::Failed, {}};
                   return {SolveOutcome::Solved, std::move(*u.mgu)};
                 }});
  out.push_back({"neq", 2,
                 [](const Language&, std::span<const TermPtr> a) {
                   return !equal(a[0], a[1]);
                 },
                 nullptr});
  out.push_back({"true_k", 0,
                 [](const Language&, std::span<const TermPtr>) { return true; },
                 [](const Language&, std::span<const TermPtr>) -> SolveResult {
                   return {SolveOutcome::Solved, {}};
                 }});
  return out;
}

std::vector<Diagnostic> Language::validate() const {
  std::vector<Diagnostic> ds;
  auto err = [&ds](std::string m) { ds.push_back({0, 0, std::move(m)}); };

  std::set<std::string> seen;
  for (const auto& s : sorts_)
    if (!seen.insert("sort " + s.name).second) err("duplicate sort " + s.name);
  seen.clear();
  for (const auto& s : symbols_)
    if (!seen.insert(s.name).second)
      err("duplicate constructor/constant name " + s.name);
  seen.clear();
  for (const auto& p : preds_)
    if (!seen.insert(p.name).second) err("duplicate predicate " + p.name);
  seen.clear();
  for (const auto& r : rules_)
    if (!seen.insert(r.id).second) err("duplicate rule id " + r.id);

  for (const auto& s : symbols_) {
    for (SortId p : s.params)
      if (p >= sorts_.size()) err("symbol " + s.name + ": undeclared param sort");
    if (s.sort >= sorts_.size()) err("symbol " + s.name + ": undeclared sort");
  }

  if (root_ >= preds_.size()) {
    err("root predicate is not declared");
  } else {
    bool concluded = false;
    for (const auto& r : rules_) concluded = concluded || r.conclusion.pred == root_;
    if (!concluded)
      err("no rule concludes the root predicate " + preds_[root_].name);
  }

  auto check_judgment = [&](const TypingRule& r, const Judgment& j,
                            const char* where) {
    if (j.pred >= preds_.size()) {
      err("rule " + r.id + ": " + where + " uses an undeclared predicate");
      return;
    }
    const auto& pd = preds_[j.pred];
    if (j.args.size() != pd.params.size()) {
      err("rule " + r.id + ": " + where + " " + pd.name + " expects " +
          std::to_string(pd.params.size()) + " arguments");
      return;
    }
    for (size_t i = 0; i < j.args.size(); ++i)
      if (auto e = check_sort(j.args[i], pd.params[i]))
        err("rule " + r.id + ": " + where + " " + pd.name + ": " + *e);
  };

  for (const auto& r : rules_) {
    check_judgment(r, r.conclusion, "conclusion");
    for (const auto& p : r.premises) check_judgment(r, p, "premise");

    // Constraint variables must come from the premises or the conclusion.
    std::set<VarId> scope;
    for (const auto& p : r.premises)
      for (const auto& v : free_vars(p.args)) scope.insert(v->as_var()->id);
    for (const auto& v : free_vars(r.conclusion.args))
      scope.insert(v->as_var()->id);
    for (const auto& c : r.constraints) {
      if (c.builtin >= builtins_.size()) {
        err("rule " + r.id + ": unregistered constraint " + c.name);
        continue;
      }
      const auto& b = builtins_[c.builtin];
      if (c.args.size() != b.arity)
        err("rule " + r.id + ": constraint " + b.name + " expects " +
            std::to_string(b.arity) + " arguments");
      for (const auto& v : free_vars(c.args))
        if (!scope.count(v->as_var()->id))
          err("rule " + r.id + ": constraint " + c.name + " uses variable ?" +
              v->as_var()->hint +
              " which appears in no premise or conclusion");
      if ((b.name == "eq" || b.name == "neq") && c.args.size() == 2 &&
          c.args[0]->sort() != c.args[1]->sort())
        err("rule " + r.id + ": " + b.name + " arguments have different sorts");
    }
  }
  return ds;
}

}  // namespace tyflow
