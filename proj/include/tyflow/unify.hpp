#pragma once

#include <optional>
#include <utility>

#include "tyflow/subst.hpp"

namespace tyflow {

using TermPair = std::pair<TermPtr, TermPtr>;

struct UnifyFailure {
  enum class Kind { Clash, Occurs, Sort };
  Kind kind;
  // Clash/Sort: the two disagreeing subterms. Occurs: (variable, term it
  // occurs in). Enough to render a precise diagnostic at any call site.
  TermPtr left;
  TermPtr right;
};

struct UnifyResult {
  std::optional<Subst> mgu;  // engaged iff success; idempotent by construction
  std::optional<UnifyFailure> failure;
  bool ok() const { return mgu.has_value(); }
};

// Syntactic first-order unification, occurs check on. Equations are taken
// left to right, each one depth-first; when two variables meet, the lower
// fresh-id goes into the domain and the newer variable survives.
UnifyResult unify(std::span<const TermPair> pairs);
UnifyResult unify(const TermPtr& a, const TermPtr& b);

// Best-effort variant: failing equations are skipped instead of aborting,
// yielding the unifier of the solvable subset plus the first failure seen.
// This keeps decoding state well-defined when type pruning is disabled.
struct PartialUnify {
  Subst subst;
  std::optional<UnifyFailure> failure;
};
PartialUnify unify_partial(std::span<const TermPair> pairs);

// One-sided matching: find ρ with ρ(pattern) = target for every pair.
// Only pattern variables are bound; target subterms are taken verbatim.
std::optional<Subst> match(std::span<const TermPair> pairs);
std::optional<Subst> match(const TermPtr& pattern, const TermPtr& target);

// Most-generality witness: ρ with ρ(general(v)) = other(v) for all `vars`,
// or nullopt if `other` does not factor through `general`.
std::optional<Subst> factor_witness(const Subst& general, const Subst& other,
                                    std::span<const TermPtr> vars);

}  // namespace tyflow
