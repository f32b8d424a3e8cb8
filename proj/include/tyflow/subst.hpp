#pragma once

#include <initializer_list>
#include <map>
#include <set>
#include <utility>

#include "tyflow/term.hpp"

namespace tyflow {

// Finite map from variables to terms, applied as a simultaneous replacement.
// Everything the solver and the engine build is idempotent (triangular solved
// form, fully applied); `is_idempotent` lets callers assert that.
class Subst {
public:
  Subst() = default;

  // Checked construction: every key must be a variable and sorts must agree.
  static Subst of(std::initializer_list<std::pair<TermPtr, TermPtr>> pairs);
  // Unchecked construction (deserialization, tests); apply() still re-checks.
  static Subst unchecked(std::vector<std::pair<TermPtr, TermPtr>> pairs);

  void bind(const TermPtr& v, TermPtr t);  // faults on non-var key / sort clash

  bool contains(VarId v) const { return map_.count(v) != 0; }
  const TermPtr* lookup(VarId v) const;
  bool empty() const { return map_.empty(); }
  size_t size() const { return map_.size(); }

  TermPtr apply(const TermPtr& t) const;
  std::vector<TermPtr> apply(std::span<const TermPtr> ts) const;

  // compose(s1, s2): apply s2 first, then s1 - (s1∘s2)(v) = s1(s2(v)).
  Subst compose(const Subst& inner) const;

  Subst restrict_to(const std::set<VarId>& keep) const;

  bool is_assignment() const;  // every image ground
  bool is_idempotent() const;  // no domain var free in any image

  // Domain in ascending variable-id order (deterministic iteration).
  std::vector<TermPtr> domain() const;
  const std::map<VarId, std::pair<TermPtr, TermPtr>>& entries() const { return map_; }

private:
  // id -> (variable term, image); keeping the variable around preserves its
  // sort and display hint for printing and checking.
  std::map<VarId, std::pair<TermPtr, TermPtr>> map_;
};

// Fresh renaming of every free variable of `terms`, preserving sorts and
// display hints. Ground input yields the empty substitution.
Subst fresh_renaming(std::span<const TermPtr> terms);

}  // namespace tyflow
