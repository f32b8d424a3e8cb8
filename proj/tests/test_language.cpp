#include "doctest.h"

#include "tyflow/builtin.hpp"
#include "tyflow/language.hpp"

using namespace tyflow;

namespace {

std::shared_ptr<Language> parse_ok(const std::string& text) {
  auto r = parse_language(text);
  INFO(format_diagnostics(r.diagnostics));
  REQUIRE(r.ok());
  return r.language;
}

std::vector<Diagnostic> parse_bad(const std::string& text) {
  auto r = parse_language(text);
  REQUIRE_FALSE(r.ok());
  REQUIRE_FALSE(r.diagnostics.empty());
  return r.diagnostics;
}

bool mentions(const std::vector<Diagnostic>& ds, const std::string& needle) {
  for (const auto& d : ds)
    if (d.message.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_SUITE("language") {

TEST_CASE("stlc definition parses into the expected tables") {
  auto lang = parse_ok(builtin_language_text("stlc"));
  CHECK(lang->name() == "stlc");

  // String and Int are predeclared, user sorts follow in file order.
  REQUIRE(lang->sort_count() == 5);
  CHECK(lang->sort(0).name == "String");
  CHECK(lang->sort(0).kind == SortKind::Text);
  CHECK(lang->sort(1).name == "Int");
  CHECK(lang->sort(1).kind == SortKind::Int);
  auto prog = lang->sort_by_name("Prog");
  auto type = lang->sort_by_name("Type");
  auto ctx = lang->sort_by_name("Context");
  REQUIRE(prog);
  REQUIRE(type);
  REQUIRE(ctx);
  CHECK(lang->sort(*prog).kind == SortKind::Inductive);

  // Constants and constructors keep declaration order within their sort.
  auto names_of = [&](const std::vector<SymbolId>& ids) {
    std::vector<std::string> out;
    for (auto id : ids) out.push_back(lang->symbol(id).name);
    return out;
  };
  CHECK(names_of(lang->sort(*prog).constants) ==
        std::vector<std::string>{"true", "false"});
  CHECK(names_of(lang->sort(*prog).constructors) ==
        std::vector<std::string>{"var", "app", "abs"});
  CHECK(names_of(lang->sort(*type).constants) == std::vector<std::string>{"bool"});
  CHECK(names_of(lang->sort(*type).constructors) ==
        std::vector<std::string>{"arrow"});

  auto arrow = lang->symbol_by_name("arrow");
  REQUIRE(arrow);
  CHECK(lang->symbol(*arrow).params == std::vector<SortId>{*type, *type});
  auto abs = lang->symbol_by_name("abs");
  REQUIRE(abs);
  CHECK(lang->symbol(*abs).params ==
        std::vector<SortId>{*lang->sort_by_name("String"), *type, *prog});

  auto typed = lang->pred_by_name("typed");
  auto well = lang->pred_by_name("well_typed");
  REQUIRE(typed);
  REQUIRE(well);
  CHECK(lang->pred(*typed).params == std::vector<SortId>{*ctx, *prog, *type});
  CHECK(lang->root_pred() == *well);

  std::vector<std::string> ids;
  for (const auto& r : lang->rules()) ids.push_back(r.id);
  CHECK(ids == std::vector<std::string>{"T-TRUE", "T-FALSE", "T-VAR", "T-ABS",
                                        "T-APP", "T-ROOT"});
  CHECK(lang->rule_by_id("T-APP") == 4);
  CHECK_FALSE(lang->rule_by_id("T-NOPE"));

  CHECK(lang->name_pool() ==
        std::vector<std::string>{"x", "y", "z", "f", "g", "h", "u", "v", "w"});
}

TEST_CASE("rule bodies resolve schematic variables consistently") {
  auto lang = parse_ok(builtin_language_text("stlc"));
  const auto& abs = lang->rules()[*lang->rule_by_id("T-ABS")];
  REQUIRE(abs.premises.size() == 1);

  // The G / x / t1 / t2 in the premise are the same variables as in the
  // conclusion: count the distinct ids across the whole rule.
  std::vector<TermPtr> all = abs.premises[0].args;
  all.insert(all.end(), abs.conclusion.args.begin(), abs.conclusion.args.end());
  auto fv = free_vars(all);
  CHECK(fv.size() == 5);  // G, x, t1, p, t2

  const auto& var_rule = lang->rules()[*lang->rule_by_id("T-VAR")];
  REQUIRE(var_rule.constraints.size() == 1);
  CHECK(var_rule.constraints[0].name == "lookup");
  // lookup's G/x/t are shared with the conclusion typed(G, var(x), t).
  auto cfv = free_vars(var_rule.constraints[0].args);
  auto kfv = free_vars(var_rule.conclusion.args);
  REQUIRE(cfv.size() == 3);
  REQUIRE(kfv.size() == 3);
  for (size_t i = 0; i < 3; ++i)
    CHECK(cfv[i]->as_var()->id == kfv[i]->as_var()->id);
}

TEST_CASE("builtin registry parses once and caches") {
  auto names = builtin_language_names();
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "stlc");
  CHECK(names[1] == "stlc-ext");
  CHECK(names[2] == "tiny");

  auto a = builtin_language("stlc");
  auto b = builtin_language("stlc");
  CHECK(a.get() == b.get());
  CHECK(a->synth() != nullptr);

  auto ext = builtin_language("stlc-ext");
  CHECK(ext->name() == "stlc-ext");
  CHECK(ext->rules().size() == 11);

  CHECK(builtin_language_text("nope") == nullptr);
  CHECK_THROWS_AS(builtin_language("nope"), Fault);

  CHECK(builtin_corpus_text("stlc") != nullptr);
  CHECK(builtin_corpus_text("stlc-ext") != nullptr);
  CHECK(builtin_corpus_text("tiny") == nullptr);
}

TEST_CASE("definition file loads from disk identically") {
  auto from_file =
      parse_language_file(std::string(TYFLOW_SOURCE_DIR) + "/languages/stlc.tyl");
  REQUIRE(from_file.ok());
  CHECK(from_file.language->rules().size() == 6);

  auto missing = parse_language_file("/nonexistent/path.tyl");
  CHECK_FALSE(missing.ok());
  CHECK(mentions(missing.diagnostics, "cannot open"));
}

TEST_CASE("ground terms round-trip through the canonical syntax") {
  auto lang = builtin_language("stlc");
  SortId prog = *lang->sort_by_name("Prog");
  for (const char* text : {
           "true",
           "false",
           "(var x)",
           "(app (abs x bool (var x)) true)",
           "(abs f (arrow bool bool) (app (var f) true))",
           "(app (app (abs x bool (abs y bool (var x))) true) false)",
       }) {
    auto p = lang->parse_term(text, prog);
    INFO(text << ": " << format_diagnostics(p.diagnostics));
    REQUIRE(p.ok());
    CHECK(p.term->ground());
    CHECK_FALSE(lang->check_sort(p.term, prog).has_value());
    CHECK(lang->print_term(p.term) == text);
  }
}

TEST_CASE("variables round-trip with sharing intact") {
  auto lang = builtin_language("stlc");
  SortId type = *lang->sort_by_name("Type");

  auto p = lang->parse_term("(arrow ?a.0 ?a.0)", type);
  REQUIRE(p.ok());
  const auto* ap = p.term->as_apply();
  REQUIRE(ap);
  CHECK(ap->children[0]->as_var()->id == ap->children[1]->as_var()->id);
  CHECK(lang->print_term(p.term) == "(arrow ?a.0 ?a.0)");

  auto q = lang->parse_term("(arrow ?a.0 ?b.1)", type);
  REQUIRE(q.ok());
  CHECK(lang->print_term(q.term) == "(arrow ?a.0 ?b.1)");

  // Distinct parses mint distinct variables.
  auto r = lang->parse_term("(arrow ?a.0 ?a.0)", type);
  CHECK(r.term->as_apply()->children[0]->as_var()->id !=
        p.term->as_apply()->children[0]->as_var()->id);

  // Printing renumbers per call, in first-occurrence order.
  auto v1 = fresh_var(type, "t");
  auto v2 = fresh_var(type, "s");
  auto arrow_sym = *lang->symbol_by_name("arrow");
  auto t = lang->make_apply(arrow_sym, {v2, v1});
  CHECK(lang->print_term(t) == "(arrow ?s.0 ?t.1)");

  // One var at two sorts is rejected.
  SortId prog = *lang->sort_by_name("Prog");
  auto bad = lang->parse_term("(abs ?a.0 ?a.0 true)", prog);
  CHECK_FALSE(bad.ok());
  CHECK(mentions(bad.diagnostics, "two different sorts"));
}

TEST_CASE("text atoms and literals parse by sort kind") {
  auto lang = builtin_language("stlc");
  SortId str = *lang->sort_by_name("String");
  SortId intsort = *lang->sort_by_name("Int");
  SortId prog = *lang->sort_by_name("Prog");

  auto a = lang->parse_term("x", str);
  REQUIRE(a.ok());
  CHECK(a.term->as_text()->atom == "x");

  // Atoms outside the name pool still parse; the pool only limits generation.
  auto b = lang->parse_term("whatever", str);
  REQUIRE(b.ok());
  CHECK(b.term->as_text()->atom == "whatever");

  auto n = lang->parse_term("42", intsort);
  REQUIRE(n.ok());
  CHECK(n.term->as_int()->value == 42);
  CHECK(lang->print_term(n.term) == "42");

  auto neg = lang->parse_term("-7", intsort);
  REQUIRE(neg.ok());
  CHECK(neg.term->as_int()->value == -7);

  CHECK_FALSE(lang->parse_term("42", prog).ok());
  CHECK_FALSE(lang->parse_term("zzz", prog).ok());          // unknown constant
  CHECK_FALSE(lang->parse_term("(var x) true", prog).ok()); // trailing input
  CHECK(mentions(lang->parse_term("(var x) true", prog).diagnostics,
                 "trailing input"));
  CHECK_FALSE(lang->parse_term("(app true)", prog).ok());   // arity
  CHECK_FALSE(lang->parse_term("(arrow bool bool)", prog).ok());  // wrong sort
}

TEST_CASE("check_sort reports the first offending subterm") {
  auto lang = builtin_language("stlc");
  SortId prog = *lang->sort_by_name("Prog");
  SortId type = *lang->sort_by_name("Type");
  auto app = *lang->symbol_by_name("app");
  auto bool_t = lang->make_constant(*lang->symbol_by_name("bool"));
  auto tru = lang->make_constant(*lang->symbol_by_name("true"));

  // Raw construction can build ill-sorted applications; the checker catches
  // the sort clash at the child.
  auto bad = Term::apply(app, prog, {bool_t, tru});
  auto err = lang->check_sort(bad, prog);
  REQUIRE(err.has_value());
  CHECK(err->find("bool") != std::string::npos);
  CHECK(err->find("expected Prog") != std::string::npos);

  CHECK_FALSE(lang->check_sort(tru, prog).has_value());
  CHECK(lang->check_sort(tru, type).has_value());

  // make_apply refuses outright.
  CHECK_THROWS_AS(lang->make_apply(app, {bool_t, tru}), Fault);
  CHECK_THROWS_AS(lang->make_apply(app, {tru}), Fault);
  CHECK_THROWS_AS(lang->make_constant(app), Fault);
}

TEST_CASE("context lookup respects shadowing") {
  auto lang = builtin_language("stlc");
  SortId ctx = *lang->sort_by_name("Context");
  auto parse = [&](const char* s) {
    auto p = lang->parse_term(s, ctx);
    REQUIRE(p.ok());
    return p.term;
  };
  SortId type = *lang->sort_by_name("Type");
  SortId str = *lang->sort_by_name("String");
  auto ty = [&](const char* s) { return lang->parse_term(s, type).term; };
  auto nm = [&](const char* s) { return lang->parse_term(s, str).term; };

  auto env = parse("(bind (bind empty x bool) y (arrow bool bool))");
  auto lookup = ConstraintUse{*lang->builtin_by_name("lookup"), "lookup", {}};
  auto not_bound =
      ConstraintUse{*lang->builtin_by_name("not_bound"), "not_bound", {}};

  std::vector<TermPtr> a1{env, nm("y"), ty("(arrow bool bool)")};
  CHECK(lang->eval_constraint(lookup, a1));
  std::vector<TermPtr> a2{env, nm("x"), ty("bool")};
  CHECK(lang->eval_constraint(lookup, a2));
  std::vector<TermPtr> a3{env, nm("x"), ty("(arrow bool bool)")};
  CHECK_FALSE(lang->eval_constraint(lookup, a3));
  std::vector<TermPtr> a4{env, nm("z"), ty("bool")};
  CHECK_FALSE(lang->eval_constraint(lookup, a4));

  // The innermost binding wins.
  auto shadowed = parse("(bind (bind empty x bool) x (arrow bool bool))");
  std::vector<TermPtr> a5{shadowed, nm("x"), ty("(arrow bool bool)")};
  CHECK(lang->eval_constraint(lookup, a5));
  std::vector<TermPtr> a6{shadowed, nm("x"), ty("bool")};
  CHECK_FALSE(lang->eval_constraint(lookup, a6));

  std::vector<TermPtr> a7{env, nm("z")};
  CHECK(lang->eval_constraint(not_bound, a7));
  std::vector<TermPtr> a8{env, nm("x")};
  CHECK_FALSE(lang->eval_constraint(not_bound, a8));

  auto eq = ConstraintUse{*lang->builtin_by_name("eq"), "eq", {}};
  std::vector<TermPtr> a9{ty("bool"), ty("bool")};
  CHECK(lang->eval_constraint(eq, a9));
  std::vector<TermPtr> a10{ty("bool"), ty("(arrow bool bool)")};
  CHECK_FALSE(lang->eval_constraint(eq, a10));

  // Dispatch on non-ground arguments is a programming error.
  std::vector<TermPtr> a11{env, nm("x"), fresh_var(type, "t")};
  CHECK_THROWS_AS(lang->eval_constraint(lookup, a11), Fault);
  std::vector<TermPtr> a12{env, nm("x")};
  CHECK_THROWS_AS(lang->eval_constraint(lookup, a12), Fault);  // arity
}

TEST_CASE("judgments print with shared numbering") {
  auto lang = builtin_language("stlc");
  const auto& var_rule = lang->rules()[*lang->rule_by_id("T-VAR")];
  CHECK(lang->print_judgment(var_rule.conclusion) ==
        "typed(?G.0, (var ?x.1), ?t.2)");

  const auto& app_rule = lang->rules()[*lang->rule_by_id("T-APP")];
  VarNumbering nums;
  auto first = lang->print_judgment(app_rule.premises[0], nums);
  auto second = lang->print_judgment(app_rule.premises[1], nums);
  CHECK(first == "typed(?G.0, ?p1.1, (arrow ?t1.2 ?t2.3))");
  CHECK(second == "typed(?G.0, ?p2.4, ?t1.2)");  // G and t1 keep their numbers
}

TEST_CASE("ingesting programs extends the name pool in encounter order") {
  auto lang = parse_ok(builtin_language_text("stlc"));
  SortId prog = *lang->sort_by_name("Prog");
  auto p = lang->parse_term("(app (abs id bool (var id)) true)", prog);
  REQUIRE(p.ok());

  CHECK_FALSE(lang->pool_has("id"));
  lang->ingest_literals(p.term);
  CHECK(lang->pool_has("id"));
  CHECK(lang->name_pool().back() == "id");

  size_t before = lang->name_pool().size();
  lang->ingest_literals(p.term);  // idempotent
  CHECK(lang->name_pool().size() == before);
}

TEST_CASE("malformed definitions produce pointed diagnostics") {
  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "sort S = b\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: --- top(a)\n"),
                 "duplicate sort S"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a | f(S, Missing)\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: --- top(a)\n"),
                 "undeclared sort Missing"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: --- top(g(a))\n"),
                 "unknown constructor g"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: [eq(q, q)] --- top(a)\n"),
                 "appears in no premise or conclusion"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "pred p(S)\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: --- p(a)\n"),
                 "no rule concludes the root predicate top"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "sort T = b\n"
                           "pred q(S, T)\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: q(x, t); [eq(x, t)] --- top(x)\n"),
                 "different sorts"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "pred q(S, S)\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: q(x) --- top(x)\n"),
                 "expects 2 arguments"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "sort T = b\n"
                           "pred q(S, T)\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: q(x, x) --- top(x)\n"),
                 "used at sort"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "pred top(S)\n"
                           "root nope\n"
                           "rule R: --- top(a)\n"),
                 "undeclared predicate nope"));

  CHECK(mentions(parse_bad("language l\n"
                           "sort S = a\n"
                           "pred top(S)\n"
                           "root top\n"
                           "rule R: [frobnicate(a)] --- top(a)\n"),
                 "unregistered constraint frobnicate"));
}

TEST_CASE("the parser recovers at declaration boundaries") {
  auto ds = parse_bad("language l\n"
                      "sort S = = a\n"        // first error
                      "pred top(Missing)\n"   // second error
                      "root top\n"
                      "rule R: --- top(x)\n");
  CHECK(ds.size() >= 2);
  CHECK(mentions(ds, "undeclared sort Missing"));

  // Diagnostics carry positions.
  bool positioned = false;
  for (const auto& d : ds) positioned = positioned || (d.line == 3);
  CHECK(positioned);
}

}  // TEST_SUITE
