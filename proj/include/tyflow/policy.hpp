#pragma once

#include "tyflow/dataset.hpp"

namespace tyflow {

// Scores a decision point: one log-weight per offered token, exp-summing to
// one. `prompt` is the task text for policies that condition on it; the
// bundled policies ignore it and read state off the session (decision
// prefix via history(), current goal via frame_goal()).
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::vector<double> score(const std::string& prompt,
                                    const SynthSession& s,
                                    std::span<const Token> legal) = 0;
};

class UniformPolicy : public Policy {
 public:
  std::vector<double> score(const std::string&, const SynthSession&,
                            std::span<const Token> legal) override;
};

// Counts of token n-grams over training decision sequences, begin-padded
// with "<s>"; queries add-one smooth over the offered legal set, so the
// result is a proper distribution no matter what was (or wasn't) seen.
// The goal-conditioned variant prefixes the context with the goal's
// predicate and the expected fill sort ("G:typed S:Type ..."), the hook a
// stronger conditional model would widen.
class NGramModel : public Policy {
 public:
  struct Options {
    int order = 2;                  // >= 1; order - 1 context tokens
    bool goal_conditioned = false;
  };

  NGramModel();
  explicit NGramModel(Options opts);

  int order() const { return opts_.order; }
  bool goal_conditioned() const { return opts_.goal_conditioned; }

  // Replays each record through an engine session so training contexts are
  // built exactly the way score() builds them. Faults on records that do
  // not replay (validate first when the data is untrusted).
  void train(const std::shared_ptr<const Language>& lang,
             std::span<const TaskRecord> records);

  std::vector<double> score(const std::string&, const SynthSession& s,
                            std::span<const Token> legal) override;

  // Flat count file: "# ngram order=N cond=0|1" header, then one
  // "<context...> <token> <count>" line per n-gram, sorted.
  std::string save() const;
  static NGramModel load(const std::string& text);

  const std::map<std::string, std::map<std::string, std::uint64_t>>& counts()
      const {
    return counts_;
  }

 private:
  std::string context_key(const SynthSession& s) const;

  Options opts_;
  std::map<std::string, std::map<std::string, std::uint64_t>> counts_;
};

// Oracle adapter: samples each decision from a policy's distribution.
class PolicySampleOracle : public Oracle {
 public:
  PolicySampleOracle(Policy& policy, std::uint64_t seed,
                     std::string prompt = "")
      : policy_(&policy), rng_(seed), prompt_(std::move(prompt)) {}

  std::optional<Token> pick(const SynthSession& s,
                            std::span<const Token> legal) override;

 private:
  Policy* policy_;
  std::mt19937_64 rng_;
  std::string prompt_;
};

struct BeamOptions {
  int width = 4;
  SynthOptions synth{};
  // On: the beam is topped back up to `width` every step. Off: slots whose
  // branch completed or died stay empty, so the beam only narrows.
  bool refill = true;
  int max_steps = 1024;
  // Reserved for stochastic policies; the driver itself is deterministic.
  std::uint64_t seed = 0;
};

struct BeamCandidate {
  TermPtr program;
  double log_weight = 0.0;
  std::vector<Token> tokens;
};

struct BeamResult {
  // Weight-descending; ties in rank-lexicographic order of the decision
  // prefix (the canonical order enumerate_all walks in).
  std::vector<BeamCandidate> completed;
  std::uint64_t expanded = 0;  // feeds performed
  int steps = 0;
};

// Token-synchronous beam over engine sessions. Each step ranks the scored
// expansions of every live branch and hands out slots down the ranking; an
// expansion that completes the goal moves to the output pool instead of
// taking a slot (with refill on, the next-ranked expansion takes it).
// Every output is a legal completion, so every returned program
// type-checks. The goal must be unary.
BeamResult beam_search(std::shared_ptr<const Language> lang,
                       const Judgment& goal, Policy& policy,
                       const std::string& prompt = "", BeamOptions opts = {});
BeamResult beam_search_root(std::shared_ptr<const Language> lang,
                            Policy& policy, const std::string& prompt = "",
                            BeamOptions opts = {});

}  // namespace tyflow
