#include "tyflow/dataset.hpp"

#include "tyflow/builtin.hpp"
#include "tyflow/typecheck.hpp"

#include <algorithm>

#include "doctest.h"

using namespace tyflow;

namespace {

// Each test mutates the name pool through ingestion, so no builtin cache.
std::shared_ptr<Language> fresh_lang(std::string_view name) {
  const char* text = builtin_language_text(name);
  REQUIRE(text != nullptr);
  LanguageParse lp = parse_language(text);
  REQUIRE(lp.ok());
  return lp.language;
}

TermPtr parse_prog(const Language& lang, const std::string& text) {
  SortId prog = lang.pred(lang.root_pred()).params[0];
  auto tp = lang.parse_term(text, prog);
  REQUIRE(tp.ok());
  return tp.term;
}

std::vector<Token> parse_tokens(const Language& lang,
                                const std::vector<std::string>& texts) {
  std::vector<Token> out;
  for (const auto& t : texts) {
    auto tok = parse_token(lang, t);
    REQUIRE(tok.has_value());
    out.push_back(*tok);
  }
  return out;
}

const char* kIdentityProgram = "(app (abs x bool (var x)) true)";

const std::vector<std::string> kIdentityTokens = {
    "R:T-ROOT", "R:T-APP", "R:T-ABS", "R:T-VAR", "N:x",
    "K:bool",   "N:x",     "K:bool",  "R:T-TRUE"};

struct GoalNext {
  const char* goal;
  const char* next;
};

// Hand-derived walkthrough of the identity program: the goal each decision
// was made under, printed with one shared variable numbering.
const GoalNext kIdentitySteps[] = {
    {"well_typed(?prog.0)", "R:T-ROOT"},
    {"typed(empty, ?p.1, ?t.2)", "R:T-APP"},
    {"typed(empty, ?p1.3, (arrow ?t1.4 ?t2.5))", "R:T-ABS"},
    {"typed((bind empty ?x.6 ?t1.7), ?p.8, ?t2.9)", "R:T-VAR"},
    {"typed((bind empty ?x.6 ?t1.7), (var ?x.10), ?t.11)", "N:x"},
    {"typed((bind empty x ?t1.7), (var ?x.10), ?t.11)", "K:bool"},
    {"typed((bind empty x bool), (var ?x.10), ?t.11)", "N:x"},
    {"typed((bind empty x bool), (var x), ?t.11)", "K:bool"},
    {"typed(empty, ?p2.12, bool)", "R:T-TRUE"},
};

}  // namespace

TEST_CASE("corpus files parse into clean entry lists") {
  auto entries = parse_corpus(builtin_corpus_text("stlc"));
  CHECK(entries.size() == 23);
  CHECK(entries[0].id == "identity-app");
  CHECK(entries[0].prompt ==
        "Implement an identity function that takes a boolean input and "
        "returns the same value; then apply it to the value true.");
  CHECK(entries[0].program == kIdentityProgram);
  CHECK(parse_corpus(builtin_corpus_text("stlc-ext")).size() == 22);

  CHECK_THROWS_WITH_AS(
      parse_corpus("{\"id\":\"a\",\"prompt\":\"p\",\"program\":\"true\"}\n"
                   "{broken"),
      doctest::Contains("line 2"), Fault);
  CHECK_THROWS_WITH_AS(parse_corpus(R"({"id": "a", "prompt": "p"})"),
                       doctest::Contains("line 1"), Fault);
  CHECK_THROWS_WITH_AS(
      parse_corpus("{\"id\":\"a\",\"prompt\":\"p\",\"program\":\"true\"}\n"
                   "{\"id\":\"a\",\"prompt\":\"q\",\"program\":\"false\"}\n"),
      doctest::Contains("duplicate id"), Fault);
}

TEST_CASE("identity record matches the hand-derived walkthrough") {
  auto lang = fresh_lang("stlc");
  TaskRecord rec = build_record(lang, "identity-app", "prompt text",
                                parse_prog(*lang, kIdentityProgram));

  CHECK(rec.id == "identity-app");
  CHECK(rec.prompt == "prompt text");
  CHECK(rec.program == kIdentityProgram);
  CHECK(rec.tokens == kIdentityTokens);

  REQUIRE(rec.steps.size() == std::size(kIdentitySteps));
  for (size_t i = 0; i < rec.steps.size(); ++i) {
    CAPTURE(i);
    CHECK(rec.steps[i].index == i);
    CHECK(rec.steps[i].goal == kIdentitySteps[i].goal);
    CHECK(rec.steps[i].next == kIdentitySteps[i].next);
    CHECK(rec.steps[i].prefix ==
          std::vector<std::string>(rec.tokens.begin(), rec.tokens.begin() + i));
  }

  CHECK(validate_record(lang, rec) == std::nullopt);
}

TEST_CASE("every corpus entry extracts, replays, and validates") {
  for (const char* name : {"stlc", "stlc-ext"}) {
    CAPTURE(name);
    auto lang = fresh_lang(name);
    auto entries = parse_corpus(builtin_corpus_text(name));
    DatasetBuild built = build_dataset(lang, entries);

    CHECK(built.skipped.empty());
    REQUIRE(built.records.size() == entries.size());
    for (size_t i = 0; i < entries.size(); ++i) {
      CAPTURE(entries[i].id);
      const TaskRecord& rec = built.records[i];
      CHECK(rec.id == entries[i].id);
      // Canonical printing of the corpus program.
      TermPtr prog = parse_prog(*lang, entries[i].program);
      CHECK(rec.program == lang->print_term(prog));
      CHECK(validate_record(lang, rec) == std::nullopt);

      // Extraction agrees with a direct tree walk.
      DeriveResult dr = check_program(*lang, prog);
      REQUIRE(dr.ok());
      auto toks = tree_to_decisions(lang, *dr.tree);
      CHECK(print_tokens(*lang, toks) ==
            print_tokens(*lang, parse_tokens(*lang, rec.tokens)));
    }
  }
}

TEST_CASE("ingestion extends the pool in encounter order") {
  auto stlc = fresh_lang("stlc");
  build_dataset(stlc, parse_corpus(builtin_corpus_text("stlc")));
  CHECK(stlc->name_pool() == std::vector<std::string>{"x", "y", "z", "f", "g",
                                                      "h", "u", "v", "w",
                                                      "id"});

  auto ext = fresh_lang("stlc-ext");
  DatasetBuild built =
      build_dataset(ext, parse_corpus(builtin_corpus_text("stlc-ext")));
  CHECK(ext->name_pool() == std::vector<std::string>{"x", "y", "z", "f", "g",
                                                     "h", "u", "v", "w", "p",
                                                     "not"});

  // The ingested names show up as decisions of their records.
  auto uses = [&](const std::string& id, const std::string& tok) {
    auto it = std::find_if(built.records.begin(), built.records.end(),
                           [&](const TaskRecord& r) { return r.id == id; });
    REQUIRE(it != built.records.end());
    return std::count(it->tokens.begin(), it->tokens.end(), tok) > 0;
  };
  CHECK(uses("proj-fn", "N:p"));
  CHECK(uses("let-not", "N:not"));
}

TEST_CASE("tree oracle faults on names outside the pool") {
  auto lang = fresh_lang("stlc");
  TermPtr prog = parse_prog(*lang, "(abs q bool (var q))");
  DeriveResult dr = check_program(*lang, prog);
  REQUIRE(dr.ok());

  CHECK_THROWS_AS((void)tree_to_decisions(lang, *dr.tree), Fault);
  lang->ingest_literals(prog);
  auto toks = tree_to_decisions(lang, *dr.tree);
  CHECK(print_tokens(*lang, toks) ==
        "R:T-ROOT R:T-ABS R:T-VAR N:q K:bool N:q K:bool");
}

TEST_CASE("subtrees extract against an open goal of their own shape") {
  auto lang = fresh_lang("stlc");
  DeriveResult dr = check_program(*lang, parse_prog(*lang, kIdentityProgram));
  REQUIRE(dr.ok());
  REQUIRE(dr.tree->children.size() == 1);

  // The typed(...) child alone. Unlike under T-ROOT, whose premise pins the
  // context to empty, the open goal leaves the context a hole the engine must
  // fill - hence the extra K:empty among T-VAR's acquisitions.
  auto toks = tree_to_decisions(lang, dr.tree->children[0]);
  CHECK(print_tokens(*lang, toks) ==
        "R:T-APP R:T-ABS R:T-VAR K:empty N:x K:bool N:x K:bool R:T-TRUE");
}

TEST_CASE("replay reports consumption, completion, and rejection site") {
  auto lang = fresh_lang("stlc");
  auto tokens = parse_tokens(*lang, kIdentityTokens);

  ReplayResult full = replay(lang, tokens);
  CHECK(full.complete);
  CHECK(full.consumed == 9);
  CHECK(!full.reject.has_value());
  CHECK(lang->print_term(full.session.program()) == kIdentityProgram);

  auto short5 = std::vector<Token>(tokens.begin(), tokens.begin() + 5);
  ReplayResult part = replay(lang, short5);
  CHECK(!part.complete);
  CHECK(part.consumed == 5);
  CHECK(!part.reject.has_value());

  // A rule token at a fill site is refused by the grammar check.
  auto bad = tokens;
  bad[4] = *parse_token(*lang, "R:T-TRUE");
  ReplayResult rej = replay(lang, bad);
  CHECK(!rej.complete);
  CHECK(rej.consumed == 4);
  REQUIRE(rej.reject.has_value());
  CHECK(*rej.reject == RejectSite::Grammar);

  // Binding y but looking up x: refused when the lookup turns ground, which
  // is the fill that completes the T-VAR frame.
  auto wrong = tokens;
  wrong[4] = *parse_token(*lang, "N:y");
  ReplayResult con = replay(lang, wrong);
  CHECK(!con.complete);
  CHECK(con.consumed == 7);
  REQUIRE(con.reject.has_value());
  CHECK(*con.reject == RejectSite::Constraint);

  // Trailing tokens after completion stay unconsumed.
  auto trailing = tokens;
  trailing.push_back(tokens[0]);
  trailing.push_back(tokens[0]);
  ReplayResult extra = replay(lang, trailing);
  CHECK(extra.complete);
  CHECK(extra.consumed == 9);
}

TEST_CASE("validate_record pinpoints every kind of damage") {
  auto lang = fresh_lang("stlc");
  const TaskRecord rec = build_record(lang, "identity-app", "p",
                                      parse_prog(*lang, kIdentityProgram));
  REQUIRE(validate_record(lang, rec) == std::nullopt);

  auto expect = [&](TaskRecord damaged, const char* needle) {
    auto err = validate_record(lang, damaged);
    REQUIRE(err.has_value());
    CHECK_MESSAGE(err->find(needle) != std::string::npos, *err);
  };

  {
    TaskRecord d = rec;
    d.tokens.pop_back();
    expect(std::move(d), "length mismatch");
  }
  {
    TaskRecord d = rec;
    d.tokens[2] = "R:NO-SUCH-RULE";
    expect(std::move(d), "unparseable");
  }
  {
    // Swapping the bound name is caught as the first recorded goal that no
    // longer matches the replayed state - before the lookup itself fails.
    TaskRecord d = rec;
    d.tokens[4] = "N:y";
    d.steps[4].next = "N:y";
    for (size_t i = 5; i < d.steps.size(); ++i) d.steps[i].prefix[4] = "N:y";
    expect(std::move(d), "step 5 goal");
  }
  {
    // A tamper at the last decision has no later steps to disagree with, so
    // the engine's own rejection is what surfaces.
    TaskRecord d = rec;
    d.tokens[8] = "R:T-ABS";
    d.steps[8].next = "R:T-ABS";
    expect(std::move(d), "token 8 (R:T-ABS) rejected: unify");
  }
  {
    TaskRecord d = rec;
    d.steps[3].index = 7;
    expect(std::move(d), "carries index 7");
  }
  {
    TaskRecord d = rec;
    d.steps[5].next = "K:bool ";
    expect(std::move(d), "step 5 next");
  }
  {
    TaskRecord d = rec;
    d.steps[6].prefix[0] = "R:T-APP";
    expect(std::move(d), "step 6 prefix");
  }
  {
    TaskRecord d = rec;
    d.steps[8].goal = "typed(empty, ?p2.12, (arrow bool bool))";
    expect(std::move(d), "step 8 goal");
  }
  {
    TaskRecord d = rec;
    d.tokens.pop_back();
    d.steps.pop_back();
    expect(std::move(d), "ends before the program is complete");
  }
  {
    TaskRecord d = rec;
    d.tokens.push_back("R:T-TRUE");
    d.steps.push_back(StepRecord{9, "", {}, "R:T-TRUE"});
    expect(std::move(d), "completes early, at token 9");
  }
  {
    TaskRecord d = rec;
    d.program = "(app (abs x bool (var x)) false)";
    expect(std::move(d), "replay builds");
  }
}

TEST_CASE("records survive a byte-stable JSONL round trip") {
  auto lang = fresh_lang("stlc");
  DatasetBuild built =
      build_dataset(lang, parse_corpus(builtin_corpus_text("stlc")));
  REQUIRE(!built.records.empty());

  std::string jsonl = records_to_jsonl(built.records);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') ==
        static_cast<long>(built.records.size()));

  std::vector<TaskRecord> back = records_from_jsonl(jsonl);
  REQUIRE(back.size() == built.records.size());
  for (size_t i = 0; i < back.size(); ++i) {
    CAPTURE(built.records[i].id);
    CHECK(back[i] == built.records[i]);
  }
  CHECK(records_to_jsonl(back) == jsonl);

  // Field order and step shape are part of the format.
  std::string first = jsonl.substr(0, jsonl.find('\n'));
  CHECK(first.find("{\"id\":\"identity-app\",\"prompt\":\"") == 0);
  CHECK(first.find("\"tokens\":[\"R:T-ROOT\",\"R:T-APP\",\"R:T-ABS\","
                   "\"R:T-VAR\",\"N:x\",\"K:bool\",\"N:x\",\"K:bool\","
                   "\"R:T-TRUE\"]") != std::string::npos);
  CHECK(first.find("{\"i\":0,\"goal\":\"well_typed(?prog.0)\","
                   "\"prefix\":[],\"next\":\"R:T-ROOT\"}") !=
        std::string::npos);

  CHECK_THROWS_WITH_AS(records_from_jsonl("{\"id\": 3}\n"),
                       doctest::Contains("records line 1"), Fault);
}

TEST_CASE("build_dataset reports unusable entries and keeps the rest") {
  auto lang = fresh_lang("stlc");
  std::vector<CorpusEntry> entries = {
      {"ok", "fine", "(abs x bool (var x))"},
      {"bad-syntax", "unclosed", "(abs x bool"},
      {"bad-type", "bool applied to bool", "(app true false)"},
  };
  DatasetBuild built = build_dataset(lang, entries);

  REQUIRE(built.records.size() == 1);
  CHECK(built.records[0].id == "ok");
  CHECK(validate_record(lang, built.records[0]) == std::nullopt);

  REQUIRE(built.skipped.size() == 2);
  CHECK(built.skipped[0].find("bad-syntax: ") == 0);
  CHECK(built.skipped[1].find("bad-type: ") == 0);
  CHECK(built.skipped[1].find("does not type-check") != std::string::npos);
}

TEST_CASE("parallel build is byte-identical to sequential, failures included") {
  std::vector<CorpusEntry> entries =
      parse_corpus(builtin_corpus_text("stlc-ext"));
  entries.insert(entries.begin() + 3,
                 {"broken", "ill-typed on purpose", "(fst true)"});

  DatasetBuild seq = build_dataset(fresh_lang("stlc-ext"), entries, {}, 1);
  DatasetBuild par = build_dataset(fresh_lang("stlc-ext"), entries, {}, 8);
  REQUIRE(seq.records.size() == entries.size() - 1);
  CHECK(seq.records == par.records);
  CHECK(seq.skipped == par.skipped);
  CHECK(records_to_jsonl(seq.records) == records_to_jsonl(par.records));
}

TEST_CASE("build_record refuses ill-typed programs") {
  auto lang = fresh_lang("stlc");
  CHECK_THROWS_WITH_AS(
      (void)build_record(lang, "x", "p", parse_prog(*lang, "(app true false)")),
      doctest::Contains("does not type-check"), Fault);
}
