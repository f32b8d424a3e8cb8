#include "tyflow/dataset.hpp"

#include "tyflow/unify.hpp"

#include <optional>
#include <sstream>
#include <thread>

namespace tyflow {
namespace {

// Locate the tree node the session's innermost frame is working on.
const TypeTree* node_at(const TypeTree* root, const SynthSession& s) {
  const TypeTree* node = root;
  for (size_t idx : s.frame_child_path()) {
    if (idx >= node->children.size())
      throw Fault("tree oracle: session descended past premise " +
                  std::to_string(idx));
    node = &node->children[idx];
  }
  return node;
}

Token token_for_value(const SynthSession& s, const TermPtr& val) {
  if (const auto* ap = val->as_apply())
    return Token{Token::Kind::Con, ap->ctor, {}};
  if (const auto* c = val->as_constant())
    return Token{Token::Kind::Const, c->sym, {}};
  if (const auto* tx = val->as_text())
    return Token{Token::Kind::Name, 0, tx->atom};
  if (val->as_int())
    throw Fault("tree oracle: integer literals have no decision token");
  throw Fault("tree oracle: fill value " + s.language().print_term(val) +
              " is not ground");
}

}  // namespace

std::optional<Token> TreeOracle::pick(const SynthSession& s,
                                      std::span<const Token>) {
  const TypeTree* node = node_at(root_, s);
  if (s.site() == SiteKind::Rule) {
    if (node->rule_index < 0)
      throw Fault("tree oracle: node carries no rule");
    return Token{Token::Kind::Rule,
                 static_cast<std::uint32_t>(node->rule_index), {}};
  }

  // Fill site: the frame already committed to the node's rule; matching the
  // partially-filled conclusion against the node's ground judgment tells us
  // what every remaining hole must become.
  if (s.frame_goal().pred != node->judgment.pred)
    throw Fault("tree oracle: judgment mismatch against the tree");
  std::vector<TermPtr> concl = s.frame_conclusion_instance();
  const auto& want = node->judgment.args;
  if (concl.size() != want.size())
    throw Fault("tree oracle: conclusion arity mismatch against the tree");
  std::vector<TermPair> pairs;
  pairs.reserve(concl.size());
  for (size_t i = 0; i < concl.size(); ++i) pairs.push_back({concl[i], want[i]});
  std::optional<Subst> theta = match(pairs);
  if (!theta)
    throw Fault("tree oracle: conclusion instance does not match the tree");
  return token_for_value(s, theta->apply(s.fill_hole()));
}

namespace {

SynthSession session_for(const std::shared_ptr<const Language>& lang,
                         const Judgment& target, SynthOptions opts) {
  if (target.pred == lang->root_pred())
    return SynthSession::for_root(lang, opts);
  // Open goal of the target's shape: one fresh variable per parameter.
  const PredicateDecl& pd = lang->pred(target.pred);
  Judgment goal{target.pred, {}};
  goal.args.reserve(pd.params.size());
  for (size_t i = 0; i < pd.params.size(); ++i)
    goal.args.push_back(fresh_var(pd.params[i], "a" + std::to_string(i)));
  return SynthSession(lang, goal, opts);
}

}  // namespace

std::vector<Token> tree_to_decisions(std::shared_ptr<const Language> lang,
                                     const TypeTree& tree, SynthOptions opts) {
  TreeOracle oracle(tree);
  SynthResult r = gen_synth_tree(session_for(lang, tree.judgment, opts), oracle);
  if (r.outcome != SynthOutcome::Complete)
    throw Fault("tree replay " + std::string(r.outcome == SynthOutcome::Stuck
                                                 ? "stuck: no legal decision"
                                                 : "gave up"));
  std::vector<TermPtr> got = r.session.theta().apply(r.session.goal().args);
  if (!equal(std::span<const TermPtr>(got),
             std::span<const TermPtr>(tree.judgment.args)))
    throw Fault("tree replay diverged from the tree's judgment");
  return r.session.history();
}

ReplayResult replay(std::shared_ptr<const Language> lang,
                    std::span<const Token> tokens, SynthOptions opts) {
  SynthSession s = SynthSession::for_root(lang, opts);
  size_t consumed = 0;
  std::optional<RejectSite> reject;
  for (const Token& tok : tokens) {
    if (s.done()) break;
    FeedResult fr = s.feed(tok);
    if (!fr.ok()) {
      reject = fr.site;
      break;
    }
    ++consumed;
  }
  return ReplayResult{s.done(), consumed, reject, std::move(s)};
}

namespace {

// Shared by build_record and validate_record so both produce byte-identical
// step text: one numbering for the whole record, goals captured before the
// token that resolves them is fed.
struct StepCapture {
  StepRecord step;
  FeedResult feed;
};

StepCapture capture_and_feed(SynthSession& s, VarNumbering& nums, size_t index,
                             std::vector<std::string>& prefix,
                             const Token& tok) {
  StepCapture out;
  out.step.index = index;
  out.step.goal = s.language().print_judgment(s.frame_goal(), nums);
  out.step.prefix = prefix;
  out.step.next = print_token(s.language(), tok);
  out.feed = s.feed(tok);
  prefix.push_back(out.step.next);
  return out;
}

}  // namespace

TaskRecord build_record(std::shared_ptr<const Language> lang, std::string id,
                        std::string prompt, const TermPtr& program,
                        SynthOptions opts) {
  DeriveResult dr = check_program(*lang, program);
  if (!dr.ok())
    throw Fault("build_record: " + lang->print_term(program) +
                " does not type-check");
  std::vector<Token> tokens = tree_to_decisions(lang, *dr.tree, opts);

  TaskRecord rec;
  rec.id = std::move(id);
  rec.prompt = std::move(prompt);

  SynthSession s = SynthSession::for_root(lang, opts);
  VarNumbering nums;
  std::vector<std::string> prefix;
  for (size_t i = 0; i < tokens.size(); ++i) {
    StepCapture sc = capture_and_feed(s, nums, i, prefix, tokens[i]);
    if (!sc.feed.ok())
      throw Fault("build_record: extracted token " + sc.step.next +
                  " rejected on replay");
    rec.tokens.push_back(sc.step.next);
    rec.steps.push_back(std::move(sc.step));
  }
  if (!s.done()) throw Fault("build_record: replay did not complete");
  rec.program = lang->print_term(s.program());
  if (rec.program != lang->print_term(program))
    throw Fault("build_record: replay rebuilt a different program");
  return rec;
}

std::optional<std::string> validate_record(std::shared_ptr<const Language> lang,
                                           const TaskRecord& rec,
                                           SynthOptions opts) {
  if (rec.steps.size() != rec.tokens.size())
    return "steps/tokens length mismatch (" + std::to_string(rec.steps.size()) +
           " vs " + std::to_string(rec.tokens.size()) + ")";

  std::vector<Token> tokens;
  tokens.reserve(rec.tokens.size());
  for (size_t i = 0; i < rec.tokens.size(); ++i) {
    std::optional<Token> tok = parse_token(*lang, rec.tokens[i]);
    if (!tok) return "token " + std::to_string(i) + " unparseable: " + rec.tokens[i];
    tokens.push_back(*tok);
  }

  SynthSession s = SynthSession::for_root(lang, opts);
  VarNumbering nums;
  std::vector<std::string> prefix;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (s.done())
      return "sequence completes early, at token " + std::to_string(i);
    StepCapture sc = capture_and_feed(s, nums, i, prefix, tokens[i]);
    const StepRecord& want = rec.steps[i];
    if (want.index != i)
      return "step " + std::to_string(i) + " carries index " +
             std::to_string(want.index);
    if (want.next != sc.step.next)
      return "step " + std::to_string(i) + " next is " + want.next +
             ", token says " + sc.step.next;
    if (want.prefix != sc.step.prefix)
      return "step " + std::to_string(i) + " prefix does not match the tokens";
    if (want.goal != sc.step.goal)
      return "step " + std::to_string(i) + " goal is \"" + want.goal +
             "\", replay sees \"" + sc.step.goal + "\"";
    if (!sc.feed.ok())
      return "token " + std::to_string(i) + " (" + sc.step.next +
             ") rejected: " + reject_site_name(sc.feed.site);
  }
  if (!s.done()) return "sequence ends before the program is complete";
  if (std::string got = lang->print_term(s.program()); got != rec.program)
    return "program is \"" + rec.program + "\", replay builds \"" + got + "\"";
  return std::nullopt;
}

nlohmann::ordered_json record_to_json(const TaskRecord& rec) {
  nlohmann::ordered_json j;
  j["id"] = rec.id;
  j["prompt"] = rec.prompt;
  j["program"] = rec.program;
  j["tokens"] = rec.tokens;
  auto steps = nlohmann::ordered_json::array();
  for (const StepRecord& st : rec.steps) {
    nlohmann::ordered_json e;
    e["i"] = st.index;
    e["goal"] = st.goal;
    e["prefix"] = st.prefix;
    e["next"] = st.next;
    steps.push_back(std::move(e));
  }
  j["steps"] = std::move(steps);
  return j;
}

TaskRecord record_from_json(const nlohmann::ordered_json& j) {
  TaskRecord rec;
  rec.id = j.at("id").get<std::string>();
  rec.prompt = j.at("prompt").get<std::string>();
  rec.program = j.at("program").get<std::string>();
  rec.tokens = j.at("tokens").get<std::vector<std::string>>();
  for (const auto& e : j.at("steps")) {
    StepRecord st;
    st.index = e.at("i").get<size_t>();
    st.goal = e.at("goal").get<std::string>();
    st.prefix = e.at("prefix").get<std::vector<std::string>>();
    st.next = e.at("next").get<std::string>();
    rec.steps.push_back(std::move(st));
  }
  return rec;
}

std::string records_to_jsonl(std::span<const TaskRecord> recs) {
  std::string out;
  for (const TaskRecord& rec : recs) {
    out += record_to_json(rec).dump();
    out += '\n';
  }
  return out;
}

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r") == std::string::npos;
}

template <typename Fn>
void for_jsonl_line(const std::string& text, const char* what, Fn fn) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      fn(nlohmann::ordered_json::parse(line));
    } catch (const nlohmann::json::exception& e) {
      throw Fault(std::string(what) + " line " + std::to_string(lineno) + ": " +
                  e.what());
    }
  }
}

}  // namespace

std::vector<TaskRecord> records_from_jsonl(const std::string& text) {
  std::vector<TaskRecord> out;
  for_jsonl_line(text, "records", [&](const nlohmann::ordered_json& j) {
    out.push_back(record_from_json(j));
  });
  return out;
}

std::vector<CorpusEntry> parse_corpus(const std::string& jsonl) {
  std::vector<CorpusEntry> out;
  for_jsonl_line(jsonl, "corpus", [&](const nlohmann::ordered_json& j) {
    CorpusEntry e;
    e.id = j.at("id").get<std::string>();
    e.prompt = j.at("prompt").get<std::string>();
    e.program = j.at("program").get<std::string>();
    out.push_back(std::move(e));
  });
  for (size_t i = 0; i < out.size(); ++i)
    for (size_t k = i + 1; k < out.size(); ++k)
      if (out[i].id == out[k].id)
        throw Fault("corpus: duplicate id \"" + out[i].id + "\"");
  return out;
}

DatasetBuild build_dataset(const std::shared_ptr<Language>& lang,
                           std::span<const CorpusEntry> entries,
                           SynthOptions opts, size_t jobs) {
  const PredicateDecl& rp = lang->pred(lang->root_pred());
  if (rp.params.size() != 1)
    throw Fault("build_dataset: root predicate is not unary");
  SortId prog_sort = rp.params[0];

  DatasetBuild out;
  std::vector<std::pair<const CorpusEntry*, TermPtr>> parsed;
  // Pass 1: parse and ingest everything, so the name pool - and with it the
  // token universe every record is extracted against - is settled up front.
  for (const CorpusEntry& e : entries) {
    Language::TermParse tp = lang->parse_term(e.program, prog_sort);
    if (!tp.ok()) {
      out.skipped.push_back(e.id + ": " + (tp.diagnostics.empty()
                                               ? "parse failed"
                                               : tp.diagnostics[0].message));
      continue;
    }
    lang->ingest_literals(tp.term);
    parsed.push_back({&e, tp.term});
  }
  // Pass 2 only reads the language, so entries can be built in parallel;
  // indexed slots keep the output in input order.
  std::vector<std::optional<TaskRecord>> built(parsed.size());
  std::vector<std::string> failed(parsed.size());
  auto work = [&](size_t first, size_t step) {
    for (size_t i = first; i < parsed.size(); i += step) {
      try {
        built[i] = build_record(lang, parsed[i].first->id,
                                parsed[i].first->prompt, parsed[i].second, opts);
      } catch (const Fault& f) {
        failed[i] = f.what();
      }
    }
  };
  size_t n = std::min(std::max<size_t>(jobs, 1), std::max<size_t>(parsed.size(), 1));
  if (n <= 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (size_t t = 0; t < n; ++t) pool.emplace_back(work, t, n);
    for (auto& th : pool) th.join();
  }
  for (size_t i = 0; i < parsed.size(); ++i) {
    if (built[i]) out.records.push_back(std::move(*built[i]));
    else out.skipped.push_back(parsed[i].first->id + ": " + failed[i]);
  }
  return out;
}

}  // namespace tyflow
