// Command-line front end over the C API. Exit codes: 0 success, 1 domain
// failure (ill-typed program, rejected token, failed round trip), 2 usage.
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "CLI11.hpp"

#include "tyflow.h"

namespace {

struct CStr {
  char* p = nullptr;
  CStr() = default;
  CStr(const CStr&) = delete;
  CStr& operator=(const CStr&) = delete;
  ~CStr() { tyflow_string_free(p); }
  explicit operator bool() const { return p != nullptr; }
  std::string str() const { return p ? p : ""; }
};

using Lang = std::unique_ptr<tyflow_language, decltype(&tyflow_language_free)>;

int complain(const std::string& what, const CStr& err) {
  std::fprintf(stderr, "tyflow: %s%s%s\n", what.c_str(),
               err ? ": " : "", err ? err.p : "");
  return 1;
}

// A path to a definition file, or the name of a bundled language.
Lang load_language(const std::string& spec, int& rc) {
  tyflow_language* raw = nullptr;
  CStr err;
  if (std::ifstream(spec).good()) {
    if (tyflow_language_from_file(spec.c_str(), &raw, &err.p) != TYFLOW_OK) {
      rc = complain("cannot load " + spec, err);
      return Lang(nullptr, &tyflow_language_free);
    }
  } else if (tyflow_language_builtin(spec.c_str(), &raw, &err.p) != TYFLOW_OK) {
    rc = complain("no file or builtin language \"" + spec + "\"", err);
    return Lang(nullptr, &tyflow_language_free);
  }
  return Lang(raw, &tyflow_language_free);
}

bool slurp(const std::string& path, std::string& out, int& rc) {
  std::ifstream in(path);
  if (!in) {
    rc = complain("cannot read " + path, CStr{});
    return false;
  }
  std::ostringstream text;
  text << in.rdbuf();
  out = text.str();
  return true;
}

bool spill(const std::string& path, const std::string& text, int& rc) {
  if (path.empty() || path == "-") {
    std::fputs(text.c_str(), stdout);
    return true;
  }
  std::ofstream out(path);
  out << text;
  if (!out) {
    rc = complain("cannot write " + path, CStr{});
    return false;
  }
  return true;
}

std::uint64_t env_seed() {
  const char* e = std::getenv("TYFLOW_SEED");
  return e ? std::strtoull(e, nullptr, 10) : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Type-guided program synthesis toolkit"};
  app.require_subcommand(1);
  int rc = 0;

  std::string lang_spec, program, file, corpus, tokens_path, out_path;
  std::string prompt, policy = "uniform";
  bool want_tree = false, no_refill = false, no_pruning = false;
  bool goal_conditioned = false;
  int jobs = 1, beam = 4, max_tokens = 256, order = 2;
  std::uint64_t seed = env_seed();

  auto* check = app.add_subcommand("check", "Type-check a program");
  check->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  auto* opt_prog = check->add_option("--program", program, "Program term");
  auto* opt_file = check->add_option("--file", file, "File with the term")
                       ->excludes(opt_prog)
                       ->check(CLI::ExistingFile);
  check->add_flag("--tree", want_tree, "Print the derivation tree");
  check->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    if (!opt_prog->count() && !opt_file->count()) {
      std::fprintf(stderr, "tyflow: check needs --program or --file\n");
      rc = 2;
      return;
    }
    if (opt_file->count() && !slurp(file, program, rc)) return;
    CStr tree, err;
    tyflow_status st = tyflow_check(lang.get(), program.c_str(),
                                    want_tree ? 1 : 0, &tree.p, &err.p);
    if (st != TYFLOW_OK) {
      rc = complain("check failed", err);
      return;
    }
    if (tree) std::fputs(tree.p, stdout);
  });

  auto* rules = app.add_subcommand("translate-rules",
                                   "Print the synthesis form of every rule");
  rules->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  rules->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    CStr text;
    if (tyflow_language_rules(lang.get(), &text.p) != TYFLOW_OK) {
      rc = complain("cannot print rules", CStr{});
      return;
    }
    std::fputs(text.p, stdout);
  });

  auto* extract =
      app.add_subcommand("extract", "Corpus to task-record dataset (JSONL)");
  extract->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  extract->add_option("--corpus", corpus, "Corpus JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  extract->add_option("-o,--out", out_path, "Output path (- for stdout)")
      ->required();
  extract->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 256));
  extract->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    std::string text;
    if (!slurp(corpus, text, rc)) return;
    CStr dataset, skipped, err;
    if (tyflow_extract(lang.get(), text.c_str(), jobs, &dataset.p, &skipped.p,
                       &err.p) != TYFLOW_OK) {
      rc = complain("extract failed", err);
      return;
    }
    if (!spill(out_path, dataset.str(), rc)) return;
    if (skipped && skipped.p[0]) {
      std::fprintf(stderr, "skipped entries:\n%s", skipped.p);
      rc = 1;
    }
  });

  auto* replay =
      app.add_subcommand("replay", "Rebuild a program from decision tokens");
  replay->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  replay->add_option("--tokens", tokens_path, "Whitespace-separated token file")
      ->required()
      ->check(CLI::ExistingFile);
  replay->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    std::string text;
    if (!slurp(tokens_path, text, rc)) return;
    CStr prog, detail, err;
    size_t consumed = 0;
    if (tyflow_replay(lang.get(), text.c_str(), &prog.p, &consumed, &detail.p,
                      &err.p) != TYFLOW_OK) {
      rc = complain("replay stopped at token " + std::to_string(consumed), err);
      return;
    }
    std::printf("%s\n", prog.p);
  });

  auto* synth = app.add_subcommand("synth", "Beam-search programs");
  synth->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  synth->add_option("--prompt", prompt, "Prompt passed to the policy");
  synth->add_option("--policy", policy, "uniform or ngram:MODEL");
  synth->add_option("--beam", beam, "Beam width")->check(CLI::Range(1, 4096));
  synth->add_option("--max-tokens", max_tokens, "Token budget")
      ->check(CLI::Range(1, 65536));
  synth->add_option("--seed", seed, "Recorded in the report (TYFLOW_SEED)");
  synth->add_flag("--no-refill", no_refill,
                  "Do not refill beam slots after completions");
  synth->add_option("-o,--out", out_path, "Report path (default stdout)");
  synth->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    std::string model;
    const char* model_arg = nullptr;
    if (policy.rfind("ngram:", 0) == 0) {
      if (!slurp(policy.substr(6), model, rc)) return;
      model_arg = model.c_str();
    } else if (policy != "uniform") {
      std::fprintf(stderr, "tyflow: --policy must be uniform or ngram:MODEL\n");
      rc = 2;
      return;
    }
    CStr report, err;
    if (tyflow_synth(lang.get(), prompt.c_str(), model_arg, beam, max_tokens,
                     no_refill ? 0 : 1, seed, &report.p, &err.p) != TYFLOW_OK) {
      rc = complain("synth failed", err);
      return;
    }
    spill(out_path, report.str(), rc);
  });

  auto* enumerate =
      app.add_subcommand("enumerate", "Every program within the token budget");
  enumerate->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  enumerate->add_option("--max-tokens", max_tokens, "Token budget")
      ->check(CLI::Range(1, 65536));
  enumerate->add_flag("--no-type-pruning", no_pruning,
                      "Ablation: defer unification/constraint failures");
  enumerate->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    CStr jsonl, err;
    std::uint64_t programs = 0, explored = 0;
    if (tyflow_enumerate(lang.get(), max_tokens, no_pruning ? 0 : 1, &jsonl.p,
                         &programs, &explored, &err.p) != TYFLOW_OK) {
      rc = complain("enumerate failed", err);
      return;
    }
    std::fputs(jsonl.p, stdout);
    std::printf("{\"programs\":%llu,\"explored\":%llu}\n",
                static_cast<unsigned long long>(programs),
                static_cast<unsigned long long>(explored));
  });

  auto* roundtrip = app.add_subcommand(
      "roundtrip", "Check + extract + replay every corpus entry");
  roundtrip->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  roundtrip->add_option("--corpus", corpus, "Corpus JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  roundtrip->add_option("--jobs", jobs, "Worker threads")
      ->check(CLI::Range(1, 256));
  roundtrip->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    std::string text;
    if (!slurp(corpus, text, rc)) return;
    CStr table, err;
    tyflow_status st =
        tyflow_roundtrip(lang.get(), text.c_str(), jobs, &table.p, &err.p);
    if (table) std::fputs(table.p, stdout);
    if (st != TYFLOW_OK) rc = complain("round trip failed", err);
  });

  auto* train =
      app.add_subcommand("train-ngram", "Fit an n-gram policy on a corpus");
  train->add_option("--lang", lang_spec, "Definition file or builtin name")
      ->required();
  train->add_option("--corpus", corpus, "Corpus JSONL file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--order", order, "Context length n")
      ->check(CLI::Range(1, 16));
  train->add_flag("--goal-conditioned", goal_conditioned,
                  "Condition contexts on the open goal");
  train->add_option("-o,--out", out_path, "Model path (- for stdout)")
      ->required();
  train->callback([&] {
    auto lang = load_language(lang_spec, rc);
    if (!lang) return;
    std::string text;
    if (!slurp(corpus, text, rc)) return;
    CStr model, err;
    if (tyflow_train_ngram(lang.get(), text.c_str(), order,
                           goal_conditioned ? 1 : 0, &model.p,
                           &err.p) != TYFLOW_OK) {
      rc = complain("training failed", err);
      return;
    }
    spill(out_path, model.str(), rc);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return rc;
}
