#include "tyflow/term.hpp"

#include <atomic>
#include <unordered_set>

namespace tyflow {

namespace {
std::atomic<VarId> g_var_counter{0};

TermPtr make(SortId sort, bool ground, Term::Node node) {
  return std::make_shared<const Term>(Term::Key{}, sort, ground, std::move(node));
}
}  // namespace

TermPtr Term::constant(SymbolId sym, SortId sort) {
  return make(sort, true, Constant{sym});
}

TermPtr Term::text(std::string atom, SortId sort) {
  return make(sort, true, TextAtom{std::move(atom)});
}

TermPtr Term::int_lit(std::int64_t value, SortId sort) {
  return make(sort, true, IntLit{value});
}

TermPtr Term::var(VarId id, SortId sort, std::string hint) {
  return make(sort, false, Variable{id, std::move(hint)});
}

TermPtr Term::apply(SymbolId ctor, SortId sort, std::vector<TermPtr> children) {
  bool ground = true;
  for (const auto& c : children) ground = ground && c->ground();
  return make(sort, ground, Apply{ctor, std::move(children)});
}

bool equal(const TermPtr& a, const TermPtr& b) {
  if (a.get() == b.get()) return true;
  if (!a || !b) return false;
  if (a->sort() != b->sort()) return false;
  if (a->node().index() != b->node().index()) return false;
  if (auto* ca = a->as_constant()) return ca->sym == b->as_constant()->sym;
  if (auto* ta = a->as_text()) return ta->atom == b->as_text()->atom;
  if (auto* ia = a->as_int()) return ia->value == b->as_int()->value;
  if (auto* va = a->as_var()) return va->id == b->as_var()->id;
  const auto* pa = a->as_apply();
  const auto* pb = b->as_apply();
  if (pa->ctor != pb->ctor || pa->children.size() != pb->children.size()) return false;
  for (size_t i = 0; i < pa->children.size(); ++i)
    if (!equal(pa->children[i], pb->children[i])) return false;
  return true;
}

bool equal(std::span<const TermPtr> a, std::span<const TermPtr> b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i])) return false;
  return true;
}

bool occurs(const TermPtr& v, const TermPtr& t) {
  const auto* var = v->as_var();
  if (!var) throw Fault("occurs: first argument must be a variable");
  if (t->ground()) return false;
  if (auto* tv = t->as_var()) return tv->id == var->id;
  if (auto* ap = t->as_apply()) {
    for (const auto& c : ap->children)
      if (occurs(v, c)) return true;
  }
  return false;
}

namespace {
void collect_vars(const TermPtr& t, std::vector<TermPtr>& out,
                  std::unordered_set<VarId>& seen) {
  if (t->ground()) return;
  if (auto* v = t->as_var()) {
    if (seen.insert(v->id).second) out.push_back(t);
    return;
  }
  if (auto* ap = t->as_apply()) {
    for (const auto& c : ap->children) collect_vars(c, out, seen);
  }
}
}  // namespace

std::vector<TermPtr> free_vars(const TermPtr& t) {
  std::vector<TermPtr> out;
  std::unordered_set<VarId> seen;
  collect_vars(t, out, seen);
  return out;
}

std::vector<TermPtr> free_vars(std::span<const TermPtr> ts) {
  std::vector<TermPtr> out;
  std::unordered_set<VarId> seen;
  for (const auto& t : ts) collect_vars(t, out, seen);
  return out;
}

VarId fresh_var_id() { return g_var_counter.fetch_add(1, std::memory_order_relaxed); }

TermPtr fresh_var(SortId sort, std::string hint) {
  return Term::var(fresh_var_id(), sort, std::move(hint));
}

}  // namespace tyflow
