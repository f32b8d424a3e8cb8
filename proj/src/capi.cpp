#include "tyflow.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "tyflow/builtin.hpp"
#include "tyflow/dataset.hpp"
#include "tyflow/policy.hpp"

#include "json.hpp"

using namespace tyflow;

struct tyflow_language {
  std::shared_ptr<Language> impl;
};

struct tyflow_session {
  SynthSession impl;
};

namespace {

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void put(char** slot, const std::string& s) {
  if (slot) *slot = dup(s);
}

// The C boundary: map Fault and friends onto a status + message.
template <class Fn>
tyflow_status guarded(char** err, Fn&& fn) {
  try {
    return fn();
  } catch (const Fault& f) {
    put(err, f.what());
    return TYFLOW_EFAIL;
  } catch (const std::exception& e) {
    put(err, e.what());
    return TYFLOW_EFAIL;
  }
}

tyflow_status load_language(const std::string& text, tyflow_language** out,
                            char** err) {
  LanguageParse lp = parse_language(text);
  if (!lp.ok()) {
    put(err, format_diagnostics(lp.diagnostics));
    return TYFLOW_EPARSE;
  }
  *out = new tyflow_language{lp.language};
  return TYFLOW_OK;
}

SynthOptions make_options(int max_tokens, int max_depth) {
  SynthOptions opts;
  if (max_tokens > 0) opts.limits.max_tokens = max_tokens;
  if (max_depth > 0) opts.limits.max_depth = max_depth;
  return opts;
}

std::vector<Token> parse_token_text(const Language& lang,
                                    const std::string& text) {
  std::vector<Token> toks;
  std::istringstream in(text);
  std::string word;
  size_t at = 0;
  while (in >> word) {
    auto tok = parse_token(lang, word);
    if (!tok)
      throw Fault("token " + std::to_string(at) + " \"" + word +
                  "\" does not parse");
    toks.push_back(*tok);
    ++at;
  }
  return toks;
}

// Shared by extract-style calls: parse, then fan a per-entry job out over
// `jobs` threads with input-ordered results.
template <class Fn>
void for_entries(size_t count, int jobs, Fn&& fn) {
  size_t n = std::min<size_t>(jobs < 1 ? 1 : static_cast<size_t>(jobs),
                              count ? count : 1);
  if (n <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (size_t t = 0; t < n; ++t)
    pool.emplace_back([&, t] {
      for (size_t i = t; i < count; i += n) fn(i);
    });
  for (auto& th : pool) th.join();
}

}  // namespace

extern "C" {

const char* tyflow_version(void) { return "0.1.0"; }

void tyflow_string_free(char* s) { std::free(s); }

tyflow_status tyflow_language_from_text(const char* text,
                                        tyflow_language** out, char** err) {
  if (!text || !out) return TYFLOW_EINVAL;
  return guarded(err, [&] { return load_language(text, out, err); });
}

tyflow_status tyflow_language_from_file(const char* path,
                                        tyflow_language** out, char** err) {
  if (!path || !out) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    std::ifstream in(path);
    if (!in) {
      put(err, std::string("cannot read ") + path);
      return TYFLOW_ENOENT;
    }
    std::ostringstream text;
    text << in.rdbuf();
    return load_language(text.str(), out, err);
  });
}

tyflow_status tyflow_language_builtin(const char* name, tyflow_language** out,
                                      char** err) {
  if (!name || !out) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    const char* text = builtin_language_text(name);
    if (!text) {
      put(err, std::string("no builtin language \"") + name + "\"");
      return TYFLOW_ENOENT;
    }
    // A private copy: ingesting calls must not touch the shared cache.
    return load_language(text, out, err);
  });
}

void tyflow_language_free(tyflow_language* lang) { delete lang; }

tyflow_status tyflow_language_name(const tyflow_language* lang, char** out) {
  if (!lang || !out) return TYFLOW_EINVAL;
  *out = dup(lang->impl->name());
  return TYFLOW_OK;
}

tyflow_status tyflow_builtin_names(char** out) {
  if (!out) return TYFLOW_EINVAL;
  std::string all;
  for (auto name : builtin_language_names()) {
    all += name;
    all += '\n';
  }
  *out = dup(all);
  return TYFLOW_OK;
}

tyflow_status tyflow_builtin_corpus(const char* name, char** out, char** err) {
  if (!name || !out) return TYFLOW_EINVAL;
  const char* text = builtin_corpus_text(name);
  if (!text) {
    put(err, std::string("no bundled corpus for \"") + name + "\"");
    return TYFLOW_ENOENT;
  }
  *out = dup(text);
  return TYFLOW_OK;
}

tyflow_status tyflow_language_rules(const tyflow_language* lang, char** out) {
  if (!lang || !out) return TYFLOW_EINVAL;
  return guarded(nullptr, [&] {
    *out = dup(print_synthesis_rules(*lang->impl));
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_check(const tyflow_language* lang, const char* program,
                           int want_tree, char** tree, char** err) {
  if (!lang || !program) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    const Language& l = *lang->impl;
    SortId prog_sort = l.pred(l.root_pred()).params.at(0);
    auto tp = l.parse_term(program, prog_sort);
    if (!tp.ok()) {
      put(err, format_diagnostics(tp.diagnostics));
      return TYFLOW_EPARSE;
    }
    DeriveResult dr = check_program(l, tp.term);
    if (!dr.ok()) {
      put(err, dr.status == DeriveStatus::DepthLimit
                   ? "no derivation within the depth limit"
                   : "program does not type-check");
      return TYFLOW_EFAIL;
    }
    if (want_tree) put(tree, print_tree(l, *dr.tree));
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_session_new(const tyflow_language* lang, int max_tokens,
                                 int max_depth, tyflow_session** out,
                                 char** err) {
  if (!lang || !out) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    *out = new tyflow_session{SynthSession::for_root(
        lang->impl, make_options(max_tokens, max_depth))};
    return TYFLOW_OK;
  });
}

void tyflow_session_free(tyflow_session* s) { delete s; }

tyflow_status tyflow_session_legal(const tyflow_session* s, char** out) {
  if (!s || !out) return TYFLOW_EINVAL;
  return guarded(nullptr, [&] {
    *out = dup(print_tokens(s->impl.language(), s->impl.legal_tokens()));
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_session_feed(tyflow_session* s, const char* token,
                                  char** detail) {
  if (!s || !token) return TYFLOW_EINVAL;
  return guarded(detail, [&] {
    if (s->impl.done()) {
      put(detail, "session already complete");
      return TYFLOW_ESTATE;
    }
    auto tok = parse_token(s->impl.language(), token);
    if (!tok) {
      put(detail, std::string("token \"") + token + "\" does not parse");
      return TYFLOW_EPARSE;
    }
    FeedResult fr = s->impl.feed(*tok);
    if (fr.status == FeedStatus::Rejected) {
      put(detail, reject_site_name(fr.site));
      return TYFLOW_EFAIL;
    }
    return TYFLOW_OK;
  });
}

int tyflow_session_done(const tyflow_session* s) {
  return s && s->impl.done() ? 1 : 0;
}

tyflow_status tyflow_session_history(const tyflow_session* s, char** out) {
  if (!s || !out) return TYFLOW_EINVAL;
  *out = dup(print_tokens(s->impl.language(), s->impl.history()));
  return TYFLOW_OK;
}

tyflow_status tyflow_session_program(const tyflow_session* s, char** out,
                                     char** err) {
  if (!s || !out) return TYFLOW_EINVAL;
  if (!s->impl.done()) {
    put(err, "session is not complete");
    return TYFLOW_ESTATE;
  }
  return guarded(err, [&] {
    *out = dup(s->impl.language().print_term(s->impl.program()));
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_extract(tyflow_language* lang, const char* corpus_jsonl,
                             int jobs, char** dataset_jsonl, char** skipped,
                             char** err) {
  if (!lang || !corpus_jsonl) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    std::vector<CorpusEntry> entries;
    try {
      entries = parse_corpus(corpus_jsonl);
    } catch (const Fault& f) {
      put(err, f.what());
      return TYFLOW_EPARSE;
    }
    DatasetBuild built = build_dataset(lang->impl, entries, {},
                                       jobs < 1 ? 1 : static_cast<size_t>(jobs));
    put(dataset_jsonl, records_to_jsonl(built.records));
    std::string misses;
    for (const auto& s : built.skipped) misses += s + "\n";
    put(skipped, misses);
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_replay(const tyflow_language* lang, const char* tokens,
                            char** program, size_t* consumed, char** detail,
                            char** err) {
  if (!lang || !tokens) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    std::vector<Token> toks;
    try {
      toks = parse_token_text(*lang->impl, tokens);
    } catch (const Fault& f) {
      put(err, f.what());
      return TYFLOW_EPARSE;
    }
    ReplayResult rr = replay(lang->impl, toks);
    if (consumed) *consumed = rr.consumed;
    if (!rr.complete) {
      put(detail, rr.reject ? reject_site_name(*rr.reject) : "incomplete");
      put(err, rr.reject
                   ? "token " + std::to_string(rr.consumed) + " rejected: " +
                         reject_site_name(*rr.reject)
                   : "sequence ends before the program is complete");
      return TYFLOW_EFAIL;
    }
    put(program, lang->impl->print_term(rr.session.program()));
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_roundtrip(tyflow_language* lang, const char* corpus_jsonl,
                               int jobs, char** table_jsonl, char** err) {
  if (!lang || !corpus_jsonl) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    std::vector<CorpusEntry> entries;
    try {
      entries = parse_corpus(corpus_jsonl);
    } catch (const Fault& f) {
      put(err, f.what());
      return TYFLOW_EPARSE;
    }
    const auto& l = lang->impl;
    SortId prog_sort = l->pred(l->root_pred()).params.at(0);

    // Settle the name pool first so rows are independent afterwards.
    std::vector<TermPtr> terms(entries.size());
    std::vector<std::string> parse_errors(entries.size());
    for (size_t i = 0; i < entries.size(); ++i) {
      auto tp = l->parse_term(entries[i].program, prog_sort);
      if (!tp.ok()) {
        parse_errors[i] = tp.diagnostics.empty()
                              ? "parse failed"
                              : tp.diagnostics[0].message;
        continue;
      }
      l->ingest_literals(tp.term);
      terms[i] = tp.term;
    }

    std::vector<nlohmann::ordered_json> rows(entries.size());
    for_entries(entries.size(), jobs, [&](size_t i) {
      auto fail = [&](const char* stage, const std::string& detail) {
        rows[i] = {{"id", entries[i].id}, {"status", stage}, {"detail", detail}};
      };
      if (!terms[i]) return fail("parse", parse_errors[i]);
      if (!check_program(*l, terms[i]).ok())
        return fail("check", "program does not type-check");
      TaskRecord rec;
      try {
        rec = build_record(l, entries[i].id, entries[i].prompt, terms[i]);
      } catch (const Fault& f) {
        return fail("extract", f.what());
      }
      if (auto why = validate_record(l, rec)) return fail("extract", *why);
      std::vector<Token> toks;
      for (const auto& t : rec.tokens) {
        auto tok = parse_token(*l, t);
        if (!tok) return fail("replay", "token \"" + t + "\" does not parse");
        toks.push_back(*tok);
      }
      ReplayResult rr = replay(l, toks);
      if (!rr.complete || rr.consumed != toks.size())
        return fail("replay", "sequence does not rebuild a program");
      if (l->print_term(rr.session.program()) != rec.program)
        return fail("replay", "replayed program differs");
      rows[i] = {{"id", entries[i].id},
                 {"status", "ok"},
                 {"tokens", rec.tokens.size()}};
    });

    std::string table;
    bool all_ok = true;
    for (const auto& row : rows) {
      table += row.dump() + "\n";
      if (row.at("status") != "ok") all_ok = false;
    }
    put(table_jsonl, table);
    if (!all_ok) {
      put(err, "round trip failed for at least one entry");
      return TYFLOW_EFAIL;
    }
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_train_ngram(tyflow_language* lang,
                                 const char* corpus_jsonl, int order,
                                 int goal_conditioned, char** model,
                                 char** err) {
  if (!lang || !corpus_jsonl || !model) return TYFLOW_EINVAL;
  if (order < 1) {
    put(err, "order must be >= 1");
    return TYFLOW_EINVAL;
  }
  return guarded(err, [&] {
    std::vector<CorpusEntry> entries;
    try {
      entries = parse_corpus(corpus_jsonl);
    } catch (const Fault& f) {
      put(err, f.what());
      return TYFLOW_EPARSE;
    }
    DatasetBuild built = build_dataset(lang->impl, entries);
    if (!built.skipped.empty()) {
      std::string msg = "corpus has unusable entries:";
      for (const auto& s : built.skipped) msg += "\n  " + s;
      put(err, msg);
      return TYFLOW_EFAIL;
    }
    NGramModel m({.order = order, .goal_conditioned = goal_conditioned != 0});
    m.train(lang->impl, built.records);
    *model = dup(m.save());
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_synth(tyflow_language* lang, const char* prompt,
                           const char* model, int beam, int max_tokens,
                           int refill, uint64_t seed, char** report,
                           char** err) {
  if (!lang || !report) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    std::unique_ptr<Policy> policy;
    if (model) {
      try {
        policy = std::make_unique<NGramModel>(NGramModel::load(model));
      } catch (const Fault& f) {
        put(err, f.what());
        return TYFLOW_EPARSE;
      }
    } else {
      policy = std::make_unique<UniformPolicy>();
    }

    BeamOptions opts;
    if (beam > 0) opts.width = static_cast<size_t>(beam);
    opts.synth = make_options(max_tokens, 0);
    opts.refill = refill != 0;
    opts.seed = seed;

    auto start = std::chrono::steady_clock::now();
    BeamResult r = beam_search_root(lang->impl, *policy,
                                    prompt ? prompt : "", opts);
    auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - start)
                       .count();

    std::string out;
    for (size_t i = 0; i < r.completed.size(); ++i) {
      const BeamCandidate& c = r.completed[i];
      nlohmann::ordered_json row = {
          {"rank", i + 1},
          {"program", lang->impl->print_term(c.program)},
          {"weight", c.log_weight},
          {"well_typed", check_program(*lang->impl, c.program).ok()},
          {"tokens", c.tokens.size()}};
      out += row.dump() + "\n";
    }
    nlohmann::ordered_json summary = {{"candidates", r.completed.size()},
                                      {"elapsed", elapsed},
                                      {"seed", seed}};
    out += summary.dump() + "\n";
    *report = dup(out);
    return TYFLOW_OK;
  });
}

tyflow_status tyflow_enumerate(const tyflow_language* lang, int max_tokens,
                               int type_pruning, char** programs_jsonl,
                               uint64_t* programs, uint64_t* explored,
                               char** err) {
  if (!lang) return TYFLOW_EINVAL;
  return guarded(err, [&] {
    SynthOptions opts = make_options(max_tokens, 0);
    opts.type_pruning = type_pruning != 0;
    EnumResult r = enumerate_all(SynthSession::for_root(lang->impl, opts));
    if (programs) *programs = r.stats.accepted_programs;
    if (explored) *explored = r.stats.explored;
    if (programs_jsonl) {
      std::string out;
      for (size_t i = 0; i < r.programs.size(); ++i) {
        const SynthSession& s = r.programs[i];
        nlohmann::ordered_json row = {
            {"rank", i},
            {"program", lang->impl->print_term(s.program())},
            {"tokens", print_tokens(*lang->impl, s.history())}};
        out += row.dump() + "\n";
      }
      *programs_jsonl = dup(out);
    }
    return TYFLOW_OK;
  });
}

}  // extern "C"
