#include <cctype>
#include <fstream>
#include <sstream>

#include "tyflow/language.hpp"
#include "tyflow/translation.hpp"

namespace tyflow {

namespace {

struct Tok {
  enum Kind {
    Ident, Int, LParen, RParen, Comma, Semi, Colon, Assign, Pipe, LBrack,
    RBrack, Sep, End, Bad
  };
  Kind kind;
  std::string text;
  std::int64_t ival = 0;
  int line = 1;
  int col = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_cont(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::vector<Tok> lex(const std::string& text, std::vector<Diagnostic>& ds) {
  std::vector<Tok> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto push = [&](Tok::Kind k, std::string t, std::int64_t v = 0) {
    out.push_back({k, std::move(t), v, line, col});
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') { ++line; col = 1; ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++col; ++i; continue; }
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    int start_col = col;
    if (ident_start(c)) {
      size_t j = i;
      while (j < text.size() && ident_cont(text[j])) ++j;
      out.push_back({Tok::Ident, text.substr(i, j - i), 0, line, start_col});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j]))) ++j;
      out.push_back({Tok::Int, text.substr(i, j - i),
                     std::stoll(text.substr(i, j - i)), line, start_col});
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    if (c == '-') {
      size_t j = i;
      while (j < text.size() && text[j] == '-') ++j;
      if (j - i == 3) {
        out.push_back({Tok::Sep, "---", 0, line, start_col});
      } else {
        ds.push_back({line, start_col, "stray '-' (rule separator is '---')"});
        out.push_back({Tok::Bad, text.substr(i, j - i), 0, line, start_col});
      }
      col += static_cast<int>(j - i);
      i = j;
      continue;
    }
    Tok::Kind k = Tok::Bad;
    switch (c) {
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      case ';': k = Tok::Semi; break;
      case ':': k = Tok::Colon; break;
      case '=': k = Tok::Assign; break;
      case '|': k = Tok::Pipe; break;
      case '[': k = Tok::LBrack; break;
      case ']': k = Tok::RBrack; break;
      default:
        ds.push_back({line, col, std::string("unexpected character '") + c + "'"});
        break;
    }
    push(k, std::string(1, c));
    ++col;
    ++i;
  }
  out.push_back({Tok::End, "<eof>", 0, line, col});
  return out;
}

bool is_keyword(const std::string& s) {
  return s == "language" || s == "names" || s == "sort" || s == "pred" ||
         s == "root" || s == "rule";
}

// Unresolved functional-syntax term: name(arg, ...) or a bare name / integer.
struct RawTerm {
  std::string name;
  bool is_int = false;
  std::int64_t ival = 0;
  bool has_args = false;
  std::vector<RawTerm> args;
  int line = 0, col = 0;
};

struct RawJudgment {
  std::string pred;
  std::vector<RawTerm> args;
  int line = 0, col = 0;
};

struct Parser {
  const std::vector<Tok>& toks;
  std::vector<Diagnostic>& ds;
  Language& lang;
  size_t pos = 0;

  const Tok& peek() const { return toks[pos]; }
  const Tok& next() { return toks[pos == toks.size() - 1 ? pos : pos++]; }
  bool at(Tok::Kind k) const { return peek().kind == k; }

  void error_here(std::string m) { ds.push_back({peek().line, peek().col, std::move(m)}); }

  bool expect(Tok::Kind k, const char* what) {
    if (at(k)) { next(); return true; }
    error_here(std::string("expected ") + what + ", found '" + peek().text + "'");
    return false;
  }

  // Skip to the start of the next declaration after an error.
  void sync() {
    while (!at(Tok::End) && !(at(Tok::Ident) && is_keyword(peek().text))) next();
  }

  std::optional<std::string> ident(const char* what) {
    if (at(Tok::Ident) && !is_keyword(peek().text)) return next().text;
    error_here(std::string("expected ") + what + ", found '" + peek().text + "'");
    return std::nullopt;
  }

  RawTerm raw_term() {
    RawTerm t;
    t.line = peek().line;
    t.col = peek().col;
    if (at(Tok::Int)) {
      t.is_int = true;
      t.ival = next().ival;
      return t;
    }
    auto n = ident("term");
    if (!n) { next(); return t; }
    t.name = *n;
    if (at(Tok::LParen)) {
      next();
      t.has_args = true;
      if (!at(Tok::RParen)) {
        t.args.push_back(raw_term());
        while (at(Tok::Comma)) { next(); t.args.push_back(raw_term()); }
      }
      expect(Tok::RParen, "')'");
    }
    return t;
  }

  RawJudgment raw_judgment() {
    RawJudgment j;
    j.line = peek().line;
    j.col = peek().col;
    if (auto n = ident("predicate")) j.pred = *n;
    if (at(Tok::LParen)) {
      next();
      if (!at(Tok::RParen)) {
        j.args.push_back(raw_term());
        while (at(Tok::Comma)) { next(); j.args.push_back(raw_term()); }
      }
      expect(Tok::RParen, "')'");
    }
    return j;
  }

  void decl_language() {
    if (auto n = ident("language name")) lang.set_name(*n);
  }

  void decl_names() {
    while (at(Tok::Ident) && !is_keyword(peek().text)) lang.add_pool_atom(next().text);
  }

  void decl_sort() {
    auto n = ident("sort name");
    if (!n) { sync(); return; }
    auto sid = lang.sort_by_name(*n);
    if (!sid) {  // pre-scan registers every declared sort; this is defensive
      sid = lang.add_sort(*n, SortKind::Inductive);
    }
    if (!expect(Tok::Assign, "'='")) { sync(); return; }
    while (true) {
      int aline = peek().line, acol = peek().col;
      auto alt = ident("constructor or constant");
      if (!alt) { sync(); return; }
      if (lang.symbol_by_name(*alt)) {
        ds.push_back({aline, acol, "duplicate constructor/constant name " + *alt});
        // Still parse the parameter list to stay in sync.
      }
      std::vector<SortId> params;
      bool params_ok = true;
      if (at(Tok::LParen)) {
        next();
        while (true) {
          int pline = peek().line, pcol = peek().col;
          auto ps = ident("sort");
          if (!ps) { sync(); return; }
          if (auto psid = lang.sort_by_name(*ps)) {
            params.push_back(*psid);
          } else {
            ds.push_back({pline, pcol, "undeclared sort " + *ps});
            params_ok = false;
          }
          if (at(Tok::Comma)) { next(); continue; }
          break;
        }
        expect(Tok::RParen, "')'");
      }
      if (params_ok && !lang.symbol_by_name(*alt))
        lang.add_symbol(*alt, *sid, std::move(params));
      if (at(Tok::Pipe)) { next(); continue; }
      break;
    }
  }

  void decl_pred() {
    auto n = ident("predicate name");
    if (!n) { sync(); return; }
    std::vector<SortId> params;
    if (!expect(Tok::LParen, "'('")) { sync(); return; }
    if (!at(Tok::RParen)) {
      while (true) {
        int pline = peek().line, pcol = peek().col;
        auto ps = ident("sort");
        if (!ps) { sync(); return; }
        if (auto psid = lang.sort_by_name(*ps))
          params.push_back(*psid);
        else
          ds.push_back({pline, pcol, "undeclared sort " + *ps});
        if (at(Tok::Comma)) { next(); continue; }
        break;
      }
    }
    expect(Tok::RParen, "')'");
    if (lang.pred_by_name(*n))
      error_here("duplicate predicate " + *n);
    else
      lang.add_pred(*n, std::move(params));
  }

  void decl_root() {
    int line = peek().line, col = peek().col;
    auto n = ident("predicate name");
    if (!n) return;
    if (auto pid = lang.pred_by_name(*n))
      lang.set_root(*pid);
    else
      ds.push_back({line, col, "root references undeclared predicate " + *n});
  }

  // --- rule resolution ---------------------------------------------------

  struct RuleEnv {
    std::unordered_map<std::string, TermPtr> vars;
  };

  TermPtr resolve_term(const RawTerm& raw, SortId expected, RuleEnv& env,
                       const std::string& rule_id) {
    const auto& sd = lang.sort(expected);
    if (raw.is_int) {
      if (sd.kind != SortKind::Int) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": int literal at sort " + sd.name});
        return nullptr;
      }
      return Term::int_lit(raw.ival, expected);
    }
    if (raw.has_args) {
      auto sym = lang.symbol_by_name(raw.name);
      if (!sym) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": unknown constructor " + raw.name});
        return nullptr;
      }
      const auto& d = lang.symbol(*sym);
      if (d.is_constant()) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": " + raw.name + " is a constant"});
        return nullptr;
      }
      if (d.sort != expected) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": constructor " + raw.name +
                          " builds sort " + lang.sort(d.sort).name +
                          ", expected " + sd.name});
        return nullptr;
      }
      if (d.params.size() != raw.args.size()) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": constructor " + raw.name +
                          " expects " + std::to_string(d.params.size()) +
                          " arguments"});
        return nullptr;
      }
      std::vector<TermPtr> children;
      for (size_t i = 0; i < raw.args.size(); ++i) {
        auto c = resolve_term(raw.args[i], d.params[i], env, rule_id);
        if (!c) return nullptr;
        children.push_back(std::move(c));
      }
      return Term::apply(*sym, expected, std::move(children));
    }
    // Bare identifier: declared constant first, schematic variable otherwise.
    if (auto sym = lang.symbol_by_name(raw.name)) {
      const auto& d = lang.symbol(*sym);
      if (!d.is_constant()) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": constructor " + raw.name +
                          " needs arguments"});
        return nullptr;
      }
      if (d.sort != expected) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": constant " + raw.name + " has sort " +
                          lang.sort(d.sort).name + ", expected " + sd.name});
        return nullptr;
      }
      return Term::constant(*sym, expected);
    }
    auto it = env.vars.find(raw.name);
    if (it != env.vars.end()) {
      if (it->second->sort() != expected) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": variable " + raw.name +
                          " used at sort " + sd.name + " but previously at " +
                          lang.sort(it->second->sort()).name});
        return nullptr;
      }
      return it->second;
    }
    auto v = fresh_var(expected, raw.name);
    env.vars.emplace(raw.name, v);
    return v;
  }

  // Constraint arguments have no expected sort from a signature; they are
  // resolved bottom-up against declared symbols and already-seen rule vars.
  TermPtr resolve_constraint_term(const RawTerm& raw, RuleEnv& env,
                                  const std::string& rule_id) {
    if (raw.is_int) {
      for (SortId s = 0; s < lang.sort_count(); ++s)
        if (lang.sort(s).kind == SortKind::Int) return Term::int_lit(raw.ival, s);
      ds.push_back({raw.line, raw.col,
                    "rule " + rule_id + ": no int sort for literal"});
      return nullptr;
    }
    if (raw.has_args) {
      auto sym = lang.symbol_by_name(raw.name);
      if (!sym) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": unknown constructor " + raw.name});
        return nullptr;
      }
      const auto& d = lang.symbol(*sym);
      if (d.is_constant() || d.params.size() != raw.args.size()) {
        ds.push_back({raw.line, raw.col,
                      "rule " + rule_id + ": bad application of " + raw.name});
        return nullptr;
      }
      std::vector<TermPtr> children;
      for (size_t i = 0; i < raw.args.size(); ++i) {
        auto c = resolve_term(raw.args[i], d.params[i], env, rule_id);
        if (!c) return nullptr;
        children.push_back(std::move(c));
      }
      return Term::apply(*sym, d.sort, std::move(children));
    }
    if (auto sym = lang.symbol_by_name(raw.name)) {
      const auto& d = lang.symbol(*sym);
      if (d.is_constant()) return Term::constant(*sym, d.sort);
    }
    auto it = env.vars.find(raw.name);
    if (it != env.vars.end()) return it->second;
    ds.push_back({raw.line, raw.col,
                  "rule " + rule_id + ": constraint variable " + raw.name +
                      " appears in no premise or conclusion"});
    return nullptr;
  }

  std::optional<Judgment> resolve_judgment(const RawJudgment& raw, RuleEnv& env,
                                           const std::string& rule_id) {
    auto pid = lang.pred_by_name(raw.pred);
    if (!pid) {
      ds.push_back({raw.line, raw.col,
                    "rule " + rule_id + ": undeclared predicate " + raw.pred});
      return std::nullopt;
    }
    const auto& pd = lang.pred(*pid);
    if (pd.params.size() != raw.args.size()) {
      ds.push_back({raw.line, raw.col,
                    "rule " + rule_id + ": predicate " + raw.pred + " expects " +
                        std::to_string(pd.params.size()) + " arguments"});
      return std::nullopt;
    }
    Judgment j{*pid, {}};
    for (size_t i = 0; i < raw.args.size(); ++i) {
      auto t = resolve_term(raw.args[i], pd.params[i], env, rule_id);
      if (!t) return std::nullopt;
      j.args.push_back(std::move(t));
    }
    return j;
  }

  void decl_rule() {
    int line = peek().line, col = peek().col;
    auto id = ident("rule id");
    if (!id) { sync(); return; }
    if (!expect(Tok::Colon, "':'")) { sync(); return; }

    std::vector<RawJudgment> raw_premises;
    std::vector<RawJudgment> raw_constraints;
    bool first = true;
    while (!at(Tok::Sep) && !at(Tok::End)) {
      if (!first && !expect(Tok::Semi, "';' or '---'")) { sync(); return; }
      if (at(Tok::Sep)) break;  // tolerate a trailing ';' before '---'
      first = false;
      if (at(Tok::LBrack)) {
        next();
        if (!at(Tok::RBrack)) {
          raw_constraints.push_back(raw_judgment());
          while (at(Tok::Comma)) { next(); raw_constraints.push_back(raw_judgment()); }
        }
        expect(Tok::RBrack, "']'");
      } else {
        raw_premises.push_back(raw_judgment());
      }
    }
    if (!expect(Tok::Sep, "'---'")) { sync(); return; }
    RawJudgment raw_conclusion = raw_judgment();

    if (lang.rule_by_id(*id)) ds.push_back({line, col, "duplicate rule id " + *id});

    // Premises and conclusion bind the schematic variables; constraints are
    // resolved afterwards and may only reference what is already in scope.
    RuleEnv env;
    TypingRule rule;
    rule.id = *id;
    bool ok = true;
    for (const auto& rp : raw_premises) {
      auto j = resolve_judgment(rp, env, *id);
      if (j)
        rule.premises.push_back(std::move(*j));
      else
        ok = false;
    }
    auto concl = resolve_judgment(raw_conclusion, env, *id);
    if (concl)
      rule.conclusion = std::move(*concl);
    else
      ok = false;
    for (const auto& rc : raw_constraints) {
      auto b = lang.builtin_by_name(rc.pred);
      if (!b) {
        ds.push_back({rc.line, rc.col,
                      "rule " + *id + ": unregistered constraint " + rc.pred});
        ok = false;
        continue;
      }
      ConstraintUse use{*b, rc.pred, {}};
      if (lang.builtins()[*b].arity != rc.args.size()) {
        ds.push_back({rc.line, rc.col,
                      "rule " + *id + ": constraint " + rc.pred + " expects " +
                          std::to_string(lang.builtins()[*b].arity) +
                          " arguments"});
        ok = false;
      }
      for (const auto& ra : rc.args) {
        auto t = resolve_constraint_term(ra, env, *id);
        if (!t) { ok = false; continue; }
        use.args.push_back(std::move(t));
      }
      rule.constraints.push_back(std::move(use));
    }
    if (ok) lang.add_rule(std::move(rule));
  }

  void run() {
    while (!at(Tok::End)) {
      if (!at(Tok::Ident) || !is_keyword(peek().text)) {
        error_here("expected a declaration keyword, found '" + peek().text + "'");
        sync();
        continue;
      }
      std::string kw = next().text;
      if (kw == "language") decl_language();
      else if (kw == "names") decl_names();
      else if (kw == "sort") decl_sort();
      else if (kw == "pred") decl_pred();
      else if (kw == "root") decl_root();
      else decl_rule();
    }
  }
};

}  // namespace

LanguageParse parse_language(const std::string& text) {
  LanguageParse out;
  auto toks = lex(text, out.diagnostics);
  auto lang = std::make_shared<Language>();
  lang->add_sort("String", SortKind::Text);
  lang->add_sort("Int", SortKind::Int);

  // Pre-scan sort declarations so alternatives may reference sorts declared
  // later in the file (mutually recursive sorts).
  for (size_t i = 0; i + 2 < toks.size(); ++i) {
    if (toks[i].kind == Tok::Ident && toks[i].text == "sort" &&
        toks[i + 1].kind == Tok::Ident && toks[i + 2].kind == Tok::Assign) {
      if (lang->sort_by_name(toks[i + 1].text)) {
        out.diagnostics.push_back({toks[i + 1].line, toks[i + 1].col,
                                   "duplicate sort " + toks[i + 1].text});
      } else {
        lang->add_sort(toks[i + 1].text, SortKind::Inductive);
      }
    }
  }

  Parser p{toks, out.diagnostics, *lang};
  p.run();
  auto semantic = lang->validate();
  out.diagnostics.insert(out.diagnostics.end(), semantic.begin(), semantic.end());
  if (!out.diagnostics.empty()) return out;

  lang->set_synth(build_synth_rules(*lang));
  out.language = std::move(lang);
  return out;
}

LanguageParse parse_language_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    LanguageParse out;
    out.diagnostics.push_back({0, 0, "cannot open " + path});
    return out;
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_language(ss.str());
}

// --- canonical term syntax ---------------------------------------------

namespace {

struct STok {
  enum Kind { LParen, RParen, Atom, End } kind;
  std::string text;
  int line = 1, col = 1;
};

std::vector<STok> slex(const std::string& text) {
  std::vector<STok> out;
  int line = 1, col = 1;
  size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == '\n') { ++line; col = 1; ++i; continue; }
    if (std::isspace(static_cast<unsigned char>(c))) { ++col; ++i; continue; }
    if (c == '(' || c == ')') {
      out.push_back({c == '(' ? STok::LParen : STok::RParen,
                     std::string(1, c), line, col});
      ++col; ++i;
      continue;
    }
    size_t j = i;
    int start = col;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j])) &&
           text[j] != '(' && text[j] != ')')
      ++j;
    out.push_back({STok::Atom, text.substr(i, j - i), line, start});
    col += static_cast<int>(j - i);
    i = j;
  }
  out.push_back({STok::End, "<eof>", line, col});
  return out;
}

struct STermParser {
  const Language& lang;
  const std::vector<STok>& toks;
  std::vector<Diagnostic>& ds;
  size_t pos = 0;
  std::unordered_map<std::string, TermPtr> vars;  // printed var -> term

  const STok& peek() const { return toks[pos]; }
  const STok& next() { return toks[pos == toks.size() - 1 ? pos : pos++]; }

  void err(const STok& t, std::string m) { ds.push_back({t.line, t.col, std::move(m)}); }

  TermPtr parse(SortId expected) {
    const auto& sd = lang.sort(expected);
    const STok& t = next();
    if (t.kind == STok::LParen) {
      const STok& head = next();
      if (head.kind != STok::Atom) {
        err(head, "expected a constructor name");
        return nullptr;
      }
      auto sym = lang.symbol_by_name(head.text);
      if (!sym) {
        err(head, "unknown constructor " + head.text);
        return nullptr;
      }
      const auto& d = lang.symbol(*sym);
      if (d.is_constant()) {
        err(head, head.text + " is a constant, not a constructor");
        return nullptr;
      }
      if (d.sort != expected) {
        err(head, "constructor " + head.text + " builds sort " +
                      lang.sort(d.sort).name + ", expected " + sd.name);
        return nullptr;
      }
      std::vector<TermPtr> children;
      for (SortId param : d.params) {
        if (peek().kind == STok::RParen || peek().kind == STok::End) {
          err(peek(), "constructor " + head.text + " expects " +
                          std::to_string(d.params.size()) + " arguments");
          return nullptr;
        }
        auto c = parse(param);
        if (!c) return nullptr;
        children.push_back(std::move(c));
      }
      if (peek().kind != STok::RParen) {
        err(peek(), "expected ')' after " + head.text + " arguments");
        return nullptr;
      }
      next();
      return Term::apply(*sym, expected, std::move(children));
    }
    if (t.kind != STok::Atom) {
      err(t, "expected a term, found '" + t.text + "'");
      return nullptr;
    }
    if (t.text[0] == '?') {
      // Printed variable "?hint.N": reparsed as a fresh variable, one per
      // distinct printed name, so structure and sharing survive round trips.
      auto it = vars.find(t.text);
      if (it != vars.end()) {
        if (it->second->sort() != expected) {
          err(t, "variable " + t.text + " used at two different sorts");
          return nullptr;
        }
        return it->second;
      }
      std::string hint = t.text.substr(1);
      if (auto dot = hint.rfind('.'); dot != std::string::npos)
        hint = hint.substr(0, dot);
      auto v = fresh_var(expected, hint);
      vars.emplace(t.text, v);
      return v;
    }
    bool numeric = std::isdigit(static_cast<unsigned char>(t.text[0])) ||
                   (t.text[0] == '-' && t.text.size() > 1);
    if (numeric) {
      if (sd.kind != SortKind::Int) {
        err(t, "int literal at sort " + sd.name);
        return nullptr;
      }
      try {
        return Term::int_lit(std::stoll(t.text), expected);
      } catch (const std::exception&) {
        err(t, "bad int literal " + t.text);
        return nullptr;
      }
    }
    if (sd.kind == SortKind::Text) return Term::text(t.text, expected);
    auto sym = lang.symbol_by_name(t.text);
    if (!sym) {
      err(t, "unknown constant " + t.text + " at sort " + sd.name);
      return nullptr;
    }
    const auto& d = lang.symbol(*sym);
    if (!d.is_constant()) {
      err(t, "constructor " + t.text + " needs arguments");
      return nullptr;
    }
    if (d.sort != expected) {
      err(t, "constant " + t.text + " has sort " + lang.sort(d.sort).name +
                 ", expected " + sd.name);
      return nullptr;
    }
    return Term::constant(*sym, expected);
  }
};

}  // namespace

Language::TermParse Language::parse_term(const std::string& text,
                                         SortId expected) const {
  TermParse out;
  auto toks = slex(text);
  STermParser p{*this, toks, out.diagnostics, 0, {}};
  auto t = p.parse(expected);
  if (t && p.peek().kind != STok::End) {
    p.err(p.peek(), "trailing input after term");
    t = nullptr;
  }
  out.term = std::move(t);
  return out;
}

}  // namespace tyflow
