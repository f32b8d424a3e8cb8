#pragma once

#include "tyflow/language.hpp"

namespace tyflow {

// A derivation: one rule application per node, children in premise order.
// `instantiation` maps the rule's schematic variables to their instances, so
// the node can be revalidated without rerunning the search.
struct TypeTree {
  Judgment judgment;
  int rule_index = -1;
  Subst instantiation;
  std::vector<TypeTree> children;
};

enum class DeriveStatus { Ok, NoRule, DepthLimit };

struct DeriveLimits {
  int max_depth = 64;
};

struct DeriveResult {
  std::optional<TypeTree> tree;
  DeriveStatus status = DeriveStatus::NoRule;
  bool ok() const { return tree.has_value(); }
};

// Backtracking goal-directed search over the typing rules in declaration
// order. Goal arguments may contain variables (inference); constraints are
// solved incrementally as their arguments become ground. DepthLimit wins
// over NoRule when any abandoned branch ran out of depth.
DeriveResult derive(const Language& lang, const Judgment& goal,
                    DeriveLimits limits = {});

// Derivation of root(program). Faults unless the root predicate is unary
// with the program's sort as its parameter.
DeriveResult check_program(const Language& lang, const TermPtr& program,
                           DeriveLimits limits = {});

// Independent bottom-up revalidation: every judgment ground and well-sorted,
// every rule applied through its stored instantiation, premises lining up
// with children, every constraint true. No search involved.
bool verify_tree(const Language& lang, const TypeTree& tree);

// Indented rendering, one "judgment  [rule]" line per node.
std::string print_tree(const Language& lang, const TypeTree& tree);

}  // namespace tyflow
