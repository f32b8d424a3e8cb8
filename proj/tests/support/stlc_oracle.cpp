#include "stlc_oracle.hpp"

#include <stdexcept>

namespace stlc_oracle {

TyP ty_bool() {
  static const TyP b = std::make_shared<Ty>();
  return b;
}

TyP ty_arrow(TyP l, TyP r) {
  auto t = std::make_shared<Ty>();
  t->is_arrow = true;
  t->l = std::move(l);
  t->r = std::move(r);
  return t;
}

bool ty_eq(const TyP& a, const TyP& b) {
  if (a->is_arrow != b->is_arrow) return false;
  if (!a->is_arrow) return true;
  return ty_eq(a->l, b->l) && ty_eq(a->r, b->r);
}

int ty_size(const TyP& t) {
  return t->is_arrow ? 1 + ty_size(t->l) + ty_size(t->r) : 1;
}

std::string ty_print(const TyP& t) {
  if (!t->is_arrow) return "bool";
  return "(arrow " + ty_print(t->l) + " " + ty_print(t->r) + ")";
}

PgP pg_true() {
  auto p = std::make_shared<Pg>();
  p->kind = Pg::True;
  return p;
}

PgP pg_false() {
  auto p = std::make_shared<Pg>();
  p->kind = Pg::False;
  return p;
}

PgP pg_var(std::string name) {
  auto p = std::make_shared<Pg>();
  p->kind = Pg::Var;
  p->name = std::move(name);
  return p;
}

PgP pg_app(PgP f, PgP arg) {
  auto p = std::make_shared<Pg>();
  p->kind = Pg::App;
  p->a = std::move(f);
  p->b = std::move(arg);
  return p;
}

PgP pg_abs(std::string name, TyP ann, PgP body) {
  auto p = std::make_shared<Pg>();
  p->kind = Pg::Abs;
  p->name = std::move(name);
  p->ann = std::move(ann);
  p->a = std::move(body);
  return p;
}

std::string pg_print(const PgP& p) {
  switch (p->kind) {
    case Pg::True: return "true";
    case Pg::False: return "false";
    case Pg::Var: return "(var " + p->name + ")";
    case Pg::App: return "(app " + pg_print(p->a) + " " + pg_print(p->b) + ")";
    case Pg::Abs:
      return "(abs " + p->name + " " + ty_print(p->ann) + " " +
             pg_print(p->a) + ")";
  }
  return "";
}

std::optional<TyP> type_of(const PgP& p, const Env& env) {
  switch (p->kind) {
    case Pg::True:
    case Pg::False:
      return ty_bool();
    case Pg::Var:
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if (it->first == p->name) return it->second;
      return std::nullopt;
    case Pg::Abs: {
      Env inner = env;
      inner.emplace_back(p->name, p->ann);
      auto body = type_of(p->a, inner);
      if (!body) return std::nullopt;
      return ty_arrow(p->ann, *body);
    }
    case Pg::App: {
      auto f = type_of(p->a, env);
      auto a = type_of(p->b, env);
      if (!f || !a || !(*f)->is_arrow) return std::nullopt;
      if (!ty_eq((*f)->l, *a)) return std::nullopt;
      return (*f)->r;
    }
  }
  return std::nullopt;
}

namespace {

// Partial types: holes resolved through a shared binding table. The walk
// below mirrors how information flows during synthesis - bindings made by
// unification are free, holes still open at an acquisition site are paid
// for node by node.
struct PT;
using PTP = std::shared_ptr<PT>;
struct PT {
  enum Kind { Hole, Bool, Arrow } kind = Hole;
  int id = 0;
  PTP l, r;
};

struct Sim {
  std::map<int, PTP> sub;
  int next_id = 0;
  int tokens = 0;

  PTP hole() {
    auto p = std::make_shared<PT>();
    p->kind = PT::Hole;
    p->id = next_id++;
    return p;
  }
  static PTP mk_bool() {
    auto p = std::make_shared<PT>();
    p->kind = PT::Bool;
    return p;
  }
  static PTP mk_arrow(PTP l, PTP r) {
    auto p = std::make_shared<PT>();
    p->kind = PT::Arrow;
    p->l = std::move(l);
    p->r = std::move(r);
    return p;
  }
  static PTP of_ground(const TyP& g) {
    if (!g->is_arrow) return mk_bool();
    return mk_arrow(of_ground(g->l), of_ground(g->r));
  }

  PTP resolve(PTP t) {
    while (t->kind == PT::Hole) {
      auto it = sub.find(t->id);
      if (it == sub.end()) break;
      t = it->second;
    }
    return t;
  }

  // Unification against the rule's conclusion; binding a hole costs nothing.
  // Only reached where the checker already proved the shapes compatible.
  void free_bool(PTP t) {
    t = resolve(std::move(t));
    if (t->kind == PT::Hole) {
      sub[t->id] = mk_bool();
      return;
    }
    if (t->kind != PT::Bool) throw std::logic_error("oracle: bool clash");
  }
  std::pair<PTP, PTP> free_arrow(PTP t) {
    t = resolve(std::move(t));
    if (t->kind == PT::Hole) {
      auto node = mk_arrow(hole(), hole());
      sub[t->id] = node;
      return {node->l, node->r};
    }
    if (t->kind != PT::Arrow) throw std::logic_error("oracle: arrow clash");
    return {t->l, t->r};
  }

  // Acquisition: any hole still open in t is filled from the matching part
  // of `want`, one token per filled type node.
  void acquire(PTP t, const TyP& want) {
    t = resolve(std::move(t));
    if (t->kind == PT::Hole) {
      sub[t->id] = of_ground(want);
      tokens += ty_size(want);
      return;
    }
    if (t->kind == PT::Bool) {
      if (want->is_arrow) throw std::logic_error("oracle: acquire clash");
      return;
    }
    if (!want->is_arrow) throw std::logic_error("oracle: acquire clash");
    acquire(t->l, want->l);
    acquire(t->r, want->r);
  }
};

// One context binding. Shared across sibling branches so a payment made in
// the left subtree is visible to the right one, exactly like the engine's
// threaded substitution.
struct Binder {
  std::string name;
  bool name_paid = false;
  PTP ty;
  TyP want;
};
using SimEnv = std::vector<std::shared_ptr<Binder>>;

void acquire_env(Sim& sim, const SimEnv& env) {
  for (const auto& b : env) {
    if (!b->name_paid) {
      b->name_paid = true;
      sim.tokens += 1;
    }
    sim.acquire(b->ty, b->want);
  }
}

void walk(Sim& sim, const PgP& p, SimEnv env, PTP goal) {
  sim.tokens += 1;  // the rule token
  switch (p->kind) {
    case Pg::True:
    case Pg::False:
      sim.free_bool(std::move(goal));
      acquire_env(sim, env);
      return;
    case Pg::Var: {
      acquire_env(sim, env);
      sim.tokens += 1;  // the variable's name
      TyP want;
      for (auto it = env.rbegin(); it != env.rend(); ++it)
        if ((*it)->name == p->name) {
          want = (*it)->want;
          break;
        }
      if (!want) throw std::logic_error("oracle: unbound variable");
      sim.acquire(std::move(goal), want);
      return;
    }
    case Pg::Abs: {
      auto [dom, cod] = sim.free_arrow(std::move(goal));
      auto b = std::make_shared<Binder>();
      b->name = p->name;
      b->ty = dom;
      b->want = p->ann;
      env.push_back(std::move(b));
      walk(sim, p->a, std::move(env), std::move(cod));
      return;
    }
    case Pg::App: {
      auto dom = sim.hole();
      auto fgoal = Sim::mk_arrow(dom, std::move(goal));
      walk(sim, p->a, env, std::move(fgoal));
      walk(sim, p->b, std::move(env), std::move(dom));
      return;
    }
  }
}

}  // namespace

std::optional<int> token_cost(const PgP& p) {
  if (!type_of(p, {})) return std::nullopt;
  Sim sim;
  sim.tokens = 1;  // the root rule
  walk(sim, p, {}, sim.hole());
  return sim.tokens;
}

std::map<std::string, int> costs_within(int max_budget) {
  // Annotation types. A binder annotation is either paid in full inside a
  // branch that also spends a root, an abs, a leaf, and a name token, or
  // copied by unification from a domain type some earlier branch paid for
  // under the same ceiling - either way its size stays below budget - 3.
  int ann_cap = max_budget - 3;
  std::vector<std::vector<TyP>> ty_by_size(std::max(ann_cap + 1, 2));
  ty_by_size[1].push_back(ty_bool());
  for (int s = 3; s <= ann_cap; s += 2)
    for (int ls = 1; ls <= s - 2; ls += 2)
      for (const auto& l : ty_by_size[ls])
        for (const auto& r : ty_by_size[s - 1 - ls])
          ty_by_size[s].push_back(ty_arrow(l, r));
  std::vector<TyP> anns;
  for (const auto& bucket : ty_by_size)
    for (const auto& t : bucket) anns.push_back(t);

  // Structural weight: 1 per node plus 1 per binder name and variable name.
  // Every one of those shows up in the decision sequence (names are never
  // grounded by unification), so cost >= 1 + weight and weight <= budget - 1
  // is a complete generation bound.
  int max_w = max_budget - 1;
  std::vector<std::vector<PgP>> by_w(max_w + 1);
  if (max_w >= 1) {
    by_w[1].push_back(pg_true());
    by_w[1].push_back(pg_false());
  }
  if (max_w >= 2) by_w[2].push_back(pg_var("x"));
  for (int w = 3; w <= max_w; ++w) {
    for (const auto& body : by_w[w - 2])
      for (const auto& ann : anns) by_w[w].push_back(pg_abs("x", ann, body));
    for (int wf = 1; wf <= w - 2; ++wf)
      for (const auto& f : by_w[wf])
        for (const auto& a : by_w[w - 1 - wf]) by_w[w].push_back(pg_app(f, a));
  }

  std::map<std::string, int> out;
  for (const auto& bucket : by_w)
    for (const auto& p : bucket) {
      if (!type_of(p, {})) continue;
      auto cost = token_cost(p);
      if (cost && *cost <= max_budget) out.emplace(pg_print(p), *cost);
    }
  return out;
}

}  // namespace stlc_oracle
