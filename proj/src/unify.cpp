#include "tyflow/unify.hpp"

namespace tyflow {

namespace {

// Shared worker. In total mode the first failure aborts; in partial mode the
// offending equation is skipped and solving continues on the rest.
struct Solver {
  Subst subst;
  std::optional<UnifyFailure> failure;
  bool partial = false;

  bool fail(UnifyFailure::Kind kind, TermPtr l, TermPtr r) {
    if (!failure) failure = UnifyFailure{kind, std::move(l), std::move(r)};
    return partial;  // partial mode: swallow and carry on
  }

  void bind(const TermPtr& v, const TermPtr& t) {
    // Keep the solved form fully applied: eliminate v from existing images.
    Subst one;
    one.bind(v, t);
    Subst next;
    for (const auto& [id, vt] : subst.entries())
      next.bind(vt.first, one.apply(vt.second));
    next.bind(v, t);
    subst = std::move(next);
  }

  bool solve(const TermPtr& lraw, const TermPtr& rraw) {
    TermPtr l = subst.apply(lraw);
    TermPtr r = subst.apply(rraw);
    if (l->sort() != r->sort()) return fail(UnifyFailure::Kind::Sort, l, r);
    const auto* lv = l->as_var();
    const auto* rv = r->as_var();
    if (lv && rv) {
      if (lv->id == rv->id) return true;
      // Lower id into the domain; the newer variable is the representative.
      if (lv->id < rv->id)
        bind(l, r);
      else
        bind(r, l);
      return true;
    }
    if (lv) {
      if (occurs(l, r)) return fail(UnifyFailure::Kind::Occurs, l, r);
      bind(l, r);
      return true;
    }
    if (rv) {
      if (occurs(r, l)) return fail(UnifyFailure::Kind::Occurs, r, l);
      bind(r, l);
      return true;
    }
    const auto* la = l->as_apply();
    const auto* ra = r->as_apply();
    if (la && ra) {
      if (la->ctor != ra->ctor || la->children.size() != ra->children.size())
        return fail(UnifyFailure::Kind::Clash, l, r);
      for (size_t i = 0; i < la->children.size(); ++i)
        if (!solve(la->children[i], ra->children[i]) && !partial) return false;
      return true;
    }
    if (la || ra) return fail(UnifyFailure::Kind::Clash, l, r);
    if (!equal(l, r)) return fail(UnifyFailure::Kind::Clash, l, r);
    return true;
  }

  void run(std::span<const TermPair> pairs) {
    for (const auto& [l, r] : pairs)
      if (!solve(l, r) && !partial) return;
  }
};

}  // namespace

UnifyResult unify(std::span<const TermPair> pairs) {
  Solver s;
  s.run(pairs);
  if (s.failure) return {std::nullopt, s.failure};
  return {std::move(s.subst), std::nullopt};
}

UnifyResult unify(const TermPtr& a, const TermPtr& b) {
  TermPair p{a, b};
  return unify(std::span<const TermPair>(&p, 1));
}

PartialUnify unify_partial(std::span<const TermPair> pairs) {
  Solver s;
  s.partial = true;
  s.run(pairs);
  return {std::move(s.subst), s.failure};
}

namespace {
bool match_into(const TermPtr& pattern, const TermPtr& target, Subst& rho) {
  if (pattern->sort() != target->sort()) return false;
  if (const auto* v = pattern->as_var()) {
    if (const TermPtr* bound = rho.lookup(v->id)) return equal(*bound, target);
    rho.bind(pattern, target);
    return true;
  }
  const auto* pa = pattern->as_apply();
  const auto* ta = target->as_apply();
  if (pa && ta) {
    if (pa->ctor != ta->ctor || pa->children.size() != ta->children.size())
      return false;
    for (size_t i = 0; i < pa->children.size(); ++i)
      if (!match_into(pa->children[i], ta->children[i], rho)) return false;
    return true;
  }
  if (pa || ta) return false;
  return equal(pattern, target);
}
}  // namespace

std::optional<Subst> match(std::span<const TermPair> pairs) {
  Subst rho;
  for (const auto& [p, t] : pairs)
    if (!match_into(p, t, rho)) return std::nullopt;
  return rho;
}

std::optional<Subst> match(const TermPtr& pattern, const TermPtr& target) {
  TermPair p{pattern, target};
  return match(std::span<const TermPair>(&p, 1));
}

std::optional<Subst> factor_witness(const Subst& general, const Subst& other,
                                    std::span<const TermPtr> vars) {
  Subst rho;
  for (const auto& v : vars)
    if (!match_into(general.apply(v), other.apply(v), rho)) return std::nullopt;
  return rho;
}

}  // namespace tyflow
