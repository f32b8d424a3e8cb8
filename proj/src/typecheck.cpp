#include "tyflow/typecheck.hpp"

#include <sstream>

#include "tyflow/unify.hpp"

namespace tyflow {

namespace {

struct Searcher {
  const Language& lang;
  DeriveLimits limits;
  bool saw_depth = false;

  // A constraint of the current rule attempt, with its arguments renamed to
  // the attempt's fresh variables. Settled entries are removed.
  struct Pending {
    const ConstraintUse* use;
    std::vector<TermPtr> args;
  };

  // Evaluate/solve what is ready, loop until nothing moves. Returns false on
  // refutation; deferred entries stay in `pending`.
  bool settle(std::vector<Pending>& pending, Subst& sigma) {
    bool progress = true;
    while (progress) {
      progress = false;
      for (size_t i = 0; i < pending.size();) {
        auto args = sigma.apply(pending[i].args);
        SolveResult r = lang.solve_constraint(*pending[i].use, args);
        if (r.outcome == SolveOutcome::Failed) return false;
        if (r.outcome == SolveOutcome::Solved) {
          sigma = r.binding.compose(sigma);
          pending.erase(pending.begin() + static_cast<ptrdiff_t>(i));
          progress = true;
          continue;
        }
        ++i;
      }
    }
    return true;
  }

  std::optional<TypeTree> search(const Judgment& goal, Subst& sigma, int depth) {
    if (depth >= limits.max_depth) {
      saw_depth = true;
      return std::nullopt;
    }
    auto goal_args = sigma.apply(goal.args);

    for (size_t ri = 0; ri < lang.rules().size(); ++ri) {
      const TypingRule& rule = lang.rules()[ri];
      if (rule.conclusion.pred != goal.pred) continue;

      // Rename the rule apart from everything seen so far.
      std::vector<TermPtr> rule_terms = rule.conclusion.args;
      for (const auto& p : rule.premises)
        rule_terms.insert(rule_terms.end(), p.args.begin(), p.args.end());
      for (const auto& c : rule.constraints)
        rule_terms.insert(rule_terms.end(), c.args.begin(), c.args.end());
      Subst rho = fresh_renaming(rule_terms);

      std::vector<TermPair> eqs;
      for (size_t i = 0; i < goal_args.size(); ++i)
        eqs.emplace_back(goal_args[i], rho.apply(rule.conclusion.args[i]));
      auto u = unify(eqs);
      if (!u.ok()) continue;

      Subst saved = sigma;
      sigma = u.mgu->compose(sigma);

      std::vector<Pending> pending;
      for (const auto& c : rule.constraints)
        pending.push_back({&c, rho.apply(c.args)});

      bool failed = !settle(pending, sigma);
      std::vector<TypeTree> children;
      if (!failed) {
        for (const auto& premise : rule.premises) {
          Judgment sub{premise.pred, rho.apply(premise.args)};
          auto child = search(sub, sigma, depth + 1);
          if (!child || !settle(pending, sigma)) {
            failed = true;
            break;
          }
          children.push_back(std::move(*child));
        }
      }
      if (failed || !pending.empty()) {
        sigma = std::move(saved);
        continue;
      }

      TypeTree node;
      node.judgment = Judgment{goal.pred, sigma.apply(goal.args)};
      node.rule_index = static_cast<int>(ri);
      for (const auto& v : free_vars(rule_terms))
        node.instantiation.bind(v, sigma.apply(rho.apply(v)));
      node.children = std::move(children);
      return node;
    }
    return std::nullopt;
  }
};

// Later siblings may refine variables that earlier subtrees recorded open;
// one final pass instantiates everything under the root substitution.
void finalize(TypeTree& node, const Subst& sigma) {
  node.judgment.args = sigma.apply(node.judgment.args);
  std::vector<std::pair<TermPtr, TermPtr>> entries;
  for (const auto& [id, vt] : node.instantiation.entries())
    entries.emplace_back(vt.first, sigma.apply(vt.second));
  node.instantiation = Subst::unchecked(std::move(entries));
  for (auto& c : node.children) finalize(c, sigma);
}

}  // namespace

DeriveResult derive(const Language& lang, const Judgment& goal,
                    DeriveLimits limits) {
  if (goal.pred >= lang.pred_count()) throw Fault("derive: unknown predicate");
  if (goal.args.size() != lang.pred(goal.pred).params.size())
    throw Fault("derive: goal arity mismatch");

  Searcher s{lang, limits};
  Subst sigma;
  DeriveResult out;
  auto tree = s.search(goal, sigma, 0);
  if (tree) {
    finalize(*tree, sigma);
    out.tree = std::move(tree);
    out.status = DeriveStatus::Ok;
  } else {
    out.status = s.saw_depth ? DeriveStatus::DepthLimit : DeriveStatus::NoRule;
  }
  return out;
}

DeriveResult check_program(const Language& lang, const TermPtr& program,
                           DeriveLimits limits) {
  const auto& root = lang.pred(lang.root_pred());
  if (root.params.size() != 1)
    throw Fault("check_program: root predicate " + root.name + " is not unary");
  if (program->sort() != root.params[0])
    throw Fault("check_program: program sort does not match " + root.name);
  return derive(lang, Judgment{lang.root_pred(), {program}}, limits);
}

namespace {

bool verify_node(const Language& lang, const TypeTree& node) {
  if (node.rule_index < 0 ||
      static_cast<size_t>(node.rule_index) >= lang.rules().size())
    return false;
  const TypingRule& rule = lang.rules()[static_cast<size_t>(node.rule_index)];
  if (rule.conclusion.pred != node.judgment.pred) return false;

  const auto& params = lang.pred(node.judgment.pred).params;
  if (node.judgment.args.size() != params.size()) return false;
  for (size_t i = 0; i < params.size(); ++i) {
    if (!node.judgment.args[i]->ground()) return false;
    if (lang.check_sort(node.judgment.args[i], params[i])) return false;
  }

  const Subst& inst = node.instantiation;
  for (size_t i = 0; i < params.size(); ++i)
    if (!equal(inst.apply(rule.conclusion.args[i]), node.judgment.args[i]))
      return false;

  if (node.children.size() != rule.premises.size()) return false;
  for (size_t i = 0; i < rule.premises.size(); ++i) {
    const auto& premise = rule.premises[i];
    const auto& child = node.children[i];
    if (child.judgment.pred != premise.pred) return false;
    if (!equal(inst.apply(premise.args), child.judgment.args)) return false;
    if (!verify_node(lang, child)) return false;
  }

  for (const auto& c : rule.constraints) {
    auto args = inst.apply(c.args);
    for (const auto& a : args)
      if (!a->ground()) return false;
    if (!lang.eval_constraint(c, args)) return false;
  }
  return true;
}

void print_node(const Language& lang, const TypeTree& node, int indent,
                std::ostringstream& os) {
  for (int i = 0; i < indent; ++i) os << "  ";
  os << lang.print_judgment(node.judgment);
  if (node.rule_index >= 0 &&
      static_cast<size_t>(node.rule_index) < lang.rules().size())
    os << "  [" << lang.rules()[static_cast<size_t>(node.rule_index)].id << "]";
  os << "\n";
  for (const auto& c : node.children) print_node(lang, c, indent + 1, os);
}

}  // namespace

bool verify_tree(const Language& lang, const TypeTree& tree) {
  return verify_node(lang, tree);
}

std::string print_tree(const Language& lang, const TypeTree& tree) {
  std::ostringstream os;
  print_node(lang, tree, 0, os);
  return os.str();
}

}  // namespace tyflow
