#include "tyflow/subst.hpp"

namespace tyflow {

Subst Subst::of(std::initializer_list<std::pair<TermPtr, TermPtr>> pairs) {
  Subst s;
  for (const auto& [v, t] : pairs) s.bind(v, t);
  return s;
}

Subst Subst::unchecked(std::vector<std::pair<TermPtr, TermPtr>> pairs) {
  Subst s;
  for (auto& [v, t] : pairs) {
    const auto* var = v->as_var();
    if (!var) throw Fault("Subst: key is not a variable");
    s.map_[var->id] = {v, std::move(t)};
  }
  return s;
}

void Subst::bind(const TermPtr& v, TermPtr t) {
  const auto* var = v->as_var();
  if (!var) throw Fault("Subst::bind: key is not a variable");
  if (v->sort() != t->sort())
    throw Fault("Subst::bind: sort mismatch for ?" + var->hint);
  map_[var->id] = {v, std::move(t)};
}

const TermPtr* Subst::lookup(VarId v) const {
  auto it = map_.find(v);
  return it == map_.end() ? nullptr : &it->second.second;
}

TermPtr Subst::apply(const TermPtr& t) const {
  if (map_.empty() || t->ground()) return t;
  if (const auto* v = t->as_var()) {
    auto it = map_.find(v->id);
    if (it == map_.end()) return t;
    const TermPtr& image = it->second.second;
    if (image->sort() != t->sort())
      throw Fault("Subst::apply: sort mismatch for ?" + v->hint);
    return image;
  }
  if (const auto* ap = t->as_apply()) {
    std::vector<TermPtr> children;
    children.reserve(ap->children.size());
    bool changed = false;
    for (const auto& c : ap->children) {
      children.push_back(apply(c));
      changed = changed || children.back().get() != c.get();
    }
    if (!changed) return t;
    return Term::apply(ap->ctor, t->sort(), std::move(children));
  }
  return t;
}

std::vector<TermPtr> Subst::apply(std::span<const TermPtr> ts) const {
  std::vector<TermPtr> out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.push_back(apply(t));
  return out;
}

Subst Subst::compose(const Subst& inner) const {
  Subst out;
  for (const auto& [id, vt] : inner.map_)
    out.map_[id] = {vt.first, apply(vt.second)};
  for (const auto& [id, vt] : map_)
    if (!out.map_.count(id)) out.map_[id] = vt;
  return out;
}

Subst Subst::restrict_to(const std::set<VarId>& keep) const {
  Subst out;
  for (const auto& [id, vt] : map_)
    if (keep.count(id)) out.map_[id] = vt;
  return out;
}

bool Subst::is_assignment() const {
  for (const auto& [id, vt] : map_)
    if (!vt.second->ground()) return false;
  return true;
}

bool Subst::is_idempotent() const {
  for (const auto& [id, vt] : map_) {
    for (const auto& v : free_vars(vt.second))
      if (map_.count(v->as_var()->id)) return false;
  }
  return true;
}

std::vector<TermPtr> Subst::domain() const {
  std::vector<TermPtr> out;
  out.reserve(map_.size());
  for (const auto& [id, vt] : map_) out.push_back(vt.first);
  return out;
}

Subst fresh_renaming(std::span<const TermPtr> terms) {
  Subst out;
  for (const auto& v : free_vars(terms)) {
    const auto* var = v->as_var();
    out.bind(v, fresh_var(v->sort(), var->hint));
  }
  return out;
}

}  // namespace tyflow
