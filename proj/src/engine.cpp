#include "tyflow/engine.hpp"

#include <algorithm>

#include "tyflow/unify.hpp"

namespace tyflow {

const char* reject_site_name(RejectSite s) {
  switch (s) {
    case RejectSite::Grammar: return "grammar";
    case RejectSite::Unify: return "unify";
    case RejectSite::Constraint: return "constraint";
    case RejectSite::Budget: return "budget";
    case RejectSite::Depth: return "depth";
  }
  return "?";
}

std::string print_token(const Language& lang, const Token& tok) {
  switch (tok.kind) {
    case Token::Kind::Rule:
      return "R:" + lang.rules().at(tok.index).id;
    case Token::Kind::Con:
      return "C:" + lang.symbol(tok.index).name;
    case Token::Kind::Const:
      return "K:" + lang.symbol(tok.index).name;
    case Token::Kind::Name:
      return "N:" + tok.atom;
  }
  throw Fault("print_token: bad kind");
}

std::optional<Token> parse_token(const Language& lang, const std::string& text) {
  auto colon = text.find(':');
  if (colon != 1 || text.size() < 3) return std::nullopt;
  std::string body = text.substr(2);
  switch (text[0]) {
    case 'R': {
      auto idx = lang.rule_by_id(body);
      if (!idx) return std::nullopt;
      return Token{Token::Kind::Rule, static_cast<std::uint32_t>(*idx), ""};
    }
    case 'C': {
      auto sym = lang.symbol_by_name(body);
      if (!sym || lang.symbol(*sym).is_constant()) return std::nullopt;
      return Token{Token::Kind::Con, *sym, ""};
    }
    case 'K': {
      auto sym = lang.symbol_by_name(body);
      if (!sym || !lang.symbol(*sym).is_constant()) return std::nullopt;
      return Token{Token::Kind::Const, *sym, ""};
    }
    case 'N':
      if (body.empty()) return std::nullopt;
      return Token{Token::Kind::Name, 0, body};
  }
  return std::nullopt;
}

std::string print_tokens(const Language& lang, std::span<const Token> toks) {
  std::string out;
  for (size_t i = 0; i < toks.size(); ++i) {
    if (i) out += " ";
    out += print_token(lang, toks[i]);
  }
  return out;
}

std::uint64_t token_rank(const Language& lang, const Token& tok) {
  switch (tok.kind) {
    case Token::Kind::Rule:
      return tok.index;
    case Token::Kind::Con:
    case Token::Kind::Const:
      return (1ull << 32) | tok.index;
    case Token::Kind::Name: {
      const auto& pool = lang.name_pool();
      auto it = std::find(pool.begin(), pool.end(), tok.atom);
      auto pos = static_cast<std::uint64_t>(it - pool.begin());
      return (2ull << 32) | pos;
    }
  }
  throw Fault("token_rank: bad kind");
}

SynthSession::SynthSession(std::shared_ptr<const Language> lang, Judgment goal,
                           SynthOptions opts)
    : lang_(std::move(lang)), goal_(std::move(goal)), opts_(opts) {
  if (!lang_) throw Fault("SynthSession: null language");
  synthesis_rules(*lang_);  // fault early if the cache is missing
  const auto& pd = lang_->pred(goal_.pred);
  if (goal_.args.size() != pd.params.size())
    throw Fault("SynthSession: goal arity mismatch for " + pd.name);
  for (size_t i = 0; i < goal_.args.size(); ++i)
    if (auto err = lang_->check_sort(goal_.args[i], pd.params[i]))
      throw Fault("SynthSession: " + *err);
  stack_.push_back(Frame{goal_, 1, -1, nullptr, {}, {}, 0, 0, {}});
}

SynthSession SynthSession::for_root(std::shared_ptr<const Language> lang,
                                    SynthOptions opts) {
  if (!lang) throw Fault("SynthSession: null language");
  const auto& root = lang->pred(lang->root_pred());
  if (root.params.size() != 1)
    throw Fault("SynthSession: root predicate " + root.name + " is not unary");
  Judgment goal{lang->root_pred(), {fresh_var(root.params[0], "prog")}};
  return SynthSession(std::move(lang), std::move(goal), opts);
}

SiteKind SynthSession::site() const {
  if (done_) return SiteKind::Done;
  const Frame& f = stack_.back();
  return f.rule_index < 0 ? SiteKind::Rule : SiteKind::Fill;
}

std::vector<size_t> SynthSession::frame_child_path() const {
  std::vector<size_t> path;
  if (stack_.size() < 2) return path;
  path.reserve(stack_.size() - 1);
  for (size_t i = 0; i + 1 < stack_.size(); ++i) {
    // next_subgoal was bumped when the successor frame was pushed.
    path.push_back(stack_[i].next_subgoal - 1);
  }
  return path;
}

Judgment SynthSession::frame_goal() const {
  if (done_ || stack_.empty()) throw Fault("frame_goal: no active frame");
  const Frame& f = stack_.back();
  return Judgment{f.goal.pred, sigma_.apply(f.goal.args)};
}

int SynthSession::frame_rule() const {
  if (done_ || stack_.empty()) throw Fault("frame_rule: no active frame");
  return stack_.back().rule_index;
}

std::vector<TermPtr> SynthSession::frame_conclusion_instance() const {
  if (done_ || stack_.empty())
    throw Fault("frame_conclusion_instance: no active frame");
  const Frame& f = stack_.back();
  if (!f.srule) throw Fault("frame_conclusion_instance: rule not chosen yet");
  return sigma_.apply(f.rho.apply(f.srule->conclusion_pattern));
}

TermPtr SynthSession::fill_hole() const {
  if (site() != SiteKind::Fill) throw Fault("fill_hole: not at a fill site");
  const Frame& f = stack_.back();
  auto t = sigma_.apply(f.fills[f.fill_pos]);
  if (!t->as_var()) throw Fault("fill_hole: unsettled state");
  return t;
}

void SynthSession::audit_fills(const Frame& f) const {
  if (!opts_.check_groundness || doomed_) return;
  for (const auto& v : f.srule->free_vars)
    if (!sigma_.apply(f.rho.apply(v))->ground())
      throw Fault("groundness violated: acquisition left " +
                  lang_->print_term(v) + " open in rule " + f.srule->id);
}

std::optional<RejectSite> SynthSession::apply_token(const Token& tok) {
  Frame& f = stack_.back();
  if (f.rule_index < 0) {
    if (tok.kind != Token::Kind::Rule) return RejectSite::Grammar;
    const auto& rules = synthesis_rules(*lang_).rules;
    if (tok.index >= rules.size()) return RejectSite::Grammar;
    const SynthesisRule& sr = rules[tok.index];
    if (sr.pred != f.goal.pred) return RejectSite::Grammar;
    if (!sr.subgoals.empty() && f.depth + 1 > opts_.limits.max_depth)
      return RejectSite::Depth;

    std::vector<TermPtr> rule_terms = sr.conclusion_pattern;
    for (const auto& g : sr.subgoals)
      rule_terms.insert(rule_terms.end(), g.args.begin(), g.args.end());
    for (const auto& c : sr.constraints)
      rule_terms.insert(rule_terms.end(), c.args.begin(), c.args.end());
    Subst rho = fresh_renaming(rule_terms);

    std::vector<TermPair> eqs;
    for (size_t i = 0; i < f.goal.args.size(); ++i)
      eqs.emplace_back(sigma_.apply(f.goal.args[i]),
                       rho.apply(sr.conclusion_pattern[i]));
    if (opts_.type_pruning) {
      auto u = unify(eqs);
      if (!u.ok()) return RejectSite::Unify;
      sigma_ = u.mgu->compose(sigma_);
    } else {
      auto u = unify_partial(eqs);
      if (u.failure) doomed_ = true;
      sigma_ = u.subst.compose(sigma_);
    }

    f.rule_index = static_cast<int>(tok.index);
    f.srule = &sr;
    f.rho = std::move(rho);
    for (const auto& v : sr.free_vars) f.fills.push_back(f.rho.apply(v));
    return std::nullopt;
  }

  // Fill site: the settled invariant guarantees the current position is an
  // open variable.
  TermPtr hole = sigma_.apply(f.fills[f.fill_pos]);
  const SortDecl& sd = lang_->sort(hole->sort());
  TermPtr value;
  switch (tok.kind) {
    case Token::Kind::Rule:
      return RejectSite::Grammar;
    case Token::Kind::Const: {
      if (tok.index >= lang_->symbol_count()) return RejectSite::Grammar;
      const auto& sym = lang_->symbol(tok.index);
      if (!sym.is_constant() || sym.sort != hole->sort())
        return RejectSite::Grammar;
      value = Term::constant(tok.index, sym.sort);
      break;
    }
    case Token::Kind::Con: {
      if (tok.index >= lang_->symbol_count()) return RejectSite::Grammar;
      const auto& sym = lang_->symbol(tok.index);
      if (sym.is_constant() || sym.sort != hole->sort())
        return RejectSite::Grammar;
      std::vector<TermPtr> kids;
      for (SortId p : sym.params)
        kids.push_back(fresh_var(p, hole->as_var()->hint));
      value = Term::apply(tok.index, sym.sort, std::move(kids));
      break;
    }
    case Token::Kind::Name: {
      if (sd.kind != SortKind::Text || !lang_->pool_has(tok.atom))
        return RejectSite::Grammar;
      value = Term::text(tok.atom, hole->sort());
      break;
    }
  }
  sigma_ = Subst::of({{hole, value}}).compose(sigma_);
  return std::nullopt;
}

std::optional<RejectSite> SynthSession::settle() {
  while (true) {
    if (stack_.empty()) {
      done_ = true;
      if (opts_.check_groundness && !doomed_)
        for (const auto& a : goal_.args)
          if (!sigma_.apply(a)->ground())
            throw Fault("groundness violated: completed goal is open");
      return std::nullopt;
    }
    Frame& f = stack_.back();
    if (f.rule_index < 0) return std::nullopt;  // awaiting a rule token

    bool waiting = false;
    while (f.fill_pos < f.fills.size()) {
      TermPtr t = sigma_.apply(f.fills[f.fill_pos]);
      if (t->ground()) {
        ++f.fill_pos;
        continue;
      }
      if (t->as_var()) {
        waiting = true;  // awaiting a fill token
        break;
      }
      // Partially built: expand the children in place, keeping pre-order.
      const auto& kids = t->as_apply()->children;
      f.fills[f.fill_pos] = kids.empty() ? TermPtr() : kids[0];
      if (kids.empty())
        f.fills.erase(f.fills.begin() + static_cast<ptrdiff_t>(f.fill_pos));
      else
        f.fills.insert(f.fills.begin() + static_cast<ptrdiff_t>(f.fill_pos) + 1,
                       kids.begin() + 1, kids.end());
    }
    if (waiting) return std::nullopt;
    audit_fills(f);

    if (f.next_subgoal < f.srule->subgoals.size()) {
      const Judgment& sub = f.srule->subgoals[f.next_subgoal];
      ++f.next_subgoal;
      Judgment goal{sub.pred, f.rho.apply(sub.args)};
      int depth = f.depth + 1;
      stack_.push_back(Frame{std::move(goal), depth, -1, nullptr, {}, {}, 0, 0, {}});
      continue;
    }

    for (const auto& c : f.srule->constraints) {
      auto args = sigma_.apply(f.rho.apply(c.args));
      bool ground = true;
      for (const auto& a : args) ground = ground && a->ground();
      if (!ground) {
        if (opts_.type_pruning && !doomed_)
          throw Fault("groundness violated: constraint " + c.name +
                      " has open arguments in rule " + f.srule->id);
        doomed_ = true;
        continue;
      }
      if (!lang_->eval_constraint(c, args)) {
        if (opts_.type_pruning) return RejectSite::Constraint;
        doomed_ = true;
      }
    }

    TypeTree node;
    node.judgment = Judgment{f.goal.pred, sigma_.apply(f.goal.args)};
    node.rule_index = f.rule_index;
    for (const auto& [id, vt] : f.rho.entries())
      node.instantiation.bind(vt.first, sigma_.apply(vt.second));
    node.children = std::move(f.children);
    stack_.pop_back();
    if (stack_.empty())
      root_tree_ = std::move(node);
    else
      stack_.back().children.push_back(std::move(node));
  }
}

namespace {
void finalize_tree(TypeTree& node, const Subst& sigma) {
  node.judgment.args = sigma.apply(node.judgment.args);
  std::vector<std::pair<TermPtr, TermPtr>> entries;
  for (const auto& [id, vt] : node.instantiation.entries())
    entries.emplace_back(vt.first, sigma.apply(vt.second));
  node.instantiation = Subst::unchecked(std::move(entries));
  for (auto& c : node.children) finalize_tree(c, sigma);
}
}  // namespace

FeedResult SynthSession::feed(const Token& tok) {
  if (done_) throw Fault("feed: session already complete");
  if (static_cast<int>(history_.size()) >= opts_.limits.max_tokens)
    return {FeedStatus::Rejected, RejectSite::Budget};

  // Transactional: any rejection restores the pre-feed state.
  Subst saved_sigma = sigma_;
  std::vector<Frame> saved_stack = stack_;
  bool saved_doomed = doomed_;

  std::optional<RejectSite> rej = apply_token(tok);
  if (!rej) rej = settle();
  if (rej) {
    sigma_ = std::move(saved_sigma);
    stack_ = std::move(saved_stack);
    doomed_ = saved_doomed;
    done_ = false;
    return {FeedStatus::Rejected, *rej};
  }
  history_.push_back(tok);
  if (done_) {
    finalize_tree(root_tree_, sigma_);
    return {FeedStatus::Complete, RejectSite::Grammar};
  }
  return {FeedStatus::Accepted, RejectSite::Grammar};
}

std::vector<Token> SynthSession::candidate_tokens() const {
  std::vector<Token> out;
  if (done_) return out;
  const Frame& f = stack_.back();
  if (f.rule_index < 0) {
    const auto& rules = synthesis_rules(*lang_).rules;
    for (size_t i = 0; i < rules.size(); ++i)
      if (rules[i].pred == f.goal.pred)
        out.push_back(Token{Token::Kind::Rule, static_cast<std::uint32_t>(i), ""});
    return out;
  }
  TermPtr hole = sigma_.apply(f.fills[f.fill_pos]);
  const SortDecl& sd = lang_->sort(hole->sort());
  if (sd.kind == SortKind::Text) {
    for (const auto& atom : lang_->name_pool())
      out.push_back(Token{Token::Kind::Name, 0, atom});
    return out;
  }
  if (sd.kind == SortKind::Int) return out;  // no literal tokens
  std::vector<SymbolId> syms = sd.constants;
  syms.insert(syms.end(), sd.constructors.begin(), sd.constructors.end());
  std::sort(syms.begin(), syms.end());  // declaration order across both lists
  for (SymbolId s : syms)
    out.push_back(Token{lang_->symbol(s).is_constant() ? Token::Kind::Const
                                                       : Token::Kind::Con,
                        s, ""});
  return out;
}

std::vector<Token> SynthSession::legal_tokens() const {
  std::vector<Token> out;
  for (const Token& tok : candidate_tokens()) {
    SynthSession trial = *this;
    if (trial.feed(tok).ok()) out.push_back(tok);
  }
  return out;
}

Subst SynthSession::theta() const {
  if (!done_) throw Fault("theta: session not complete");
  std::set<VarId> keep;
  for (const auto& v : free_vars(goal_.args)) keep.insert(v->as_var()->id);
  return sigma_.restrict_to(keep);
}

TermPtr SynthSession::program() const {
  if (!done_) throw Fault("program: session not complete");
  if (goal_.args.size() != 1) throw Fault("program: goal is not unary");
  return sigma_.apply(goal_.args[0]);
}

const TypeTree& SynthSession::derivation() const {
  if (!done_) throw Fault("derivation: session not complete");
  if (doomed_) throw Fault("derivation: branch failed type checks");
  return root_tree_;
}

std::optional<Token> RandomOracle::pick(const SynthSession&,
                                        std::span<const Token> legal) {
  std::uniform_int_distribution<size_t> d(0, legal.size() - 1);
  return legal[d(rng_)];
}

std::optional<Token> ScriptOracle::pick(const SynthSession&,
                                        std::span<const Token>) {
  if (pos_ >= toks_.size()) return std::nullopt;
  return toks_[pos_++];
}

SynthResult gen_synth_tree(SynthSession session, Oracle& oracle) {
  while (!session.done()) {
    auto legal = session.legal_tokens();
    if (legal.empty())
      return {SynthOutcome::Stuck, std::move(session)};
    auto tok = oracle.pick(session, legal);
    if (!tok) return {SynthOutcome::OracleQuit, std::move(session)};
    if (std::find(legal.begin(), legal.end(), *tok) == legal.end())
      throw Fault("oracle picked a token outside the legal set: " +
                  print_token(session.language(), *tok));
    if (!session.feed(*tok).ok())
      throw Fault("legal token rejected on feed");  // unreachable by design
  }
  return {SynthOutcome::Complete, std::move(session)};
}

namespace {
void enum_dfs(const SynthSession& s, EnumResult& out) {
  for (const Token& tok : s.candidate_tokens()) {
    SynthSession child = s;
    ++out.stats.attempted;
    FeedResult r = child.feed(tok);
    if (r.status == FeedStatus::Rejected) {
      ++out.stats.rejected_by[static_cast<int>(r.site)];
      continue;
    }
    ++out.stats.explored;
    if (r.status == FeedStatus::Complete) {
      ++out.stats.completed;
      if (!child.doomed()) {
        ++out.stats.accepted_programs;
        out.programs.push_back(std::move(child));
      }
      continue;
    }
    enum_dfs(child, out);
  }
}
}  // namespace

EnumResult enumerate_all(const SynthSession& start) {
  EnumResult out;
  if (start.done()) throw Fault("enumerate_all: session already complete");
  enum_dfs(start, out);
  return out;
}

}  // namespace tyflow
