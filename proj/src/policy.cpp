#include "tyflow/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace tyflow {

std::vector<double> UniformPolicy::score(const std::string&,
                                         const SynthSession&,
                                         std::span<const Token> legal) {
  return std::vector<double>(legal.size(),
                             -std::log(static_cast<double>(legal.size())));
}

NGramModel::NGramModel() : NGramModel(Options{}) {}

NGramModel::NGramModel(Options opts) : opts_(opts) {
  if (opts_.order < 1) throw Fault("ngram: order must be >= 1");
}

std::string NGramModel::context_key(const SynthSession& s) const {
  std::vector<std::string> parts;
  if (opts_.goal_conditioned) {
    parts.push_back("G:" + s.language().pred(s.frame_goal().pred).name);
    parts.push_back(s.site() == SiteKind::Fill
                        ? "S:" + s.language().sort(s.fill_hole()->sort()).name
                        : "S:-");
  }
  const auto& hist = s.history();
  size_t need = static_cast<size_t>(opts_.order - 1);
  for (size_t i = hist.size() < need ? need - hist.size() : 0; i > 0; --i)
    parts.push_back("<s>");
  for (size_t i = hist.size() < need ? 0 : hist.size() - need; i < hist.size();
       ++i)
    parts.push_back(print_token(s.language(), hist[i]));

  std::string key;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) key += ' ';
    key += parts[i];
  }
  return key;
}

void NGramModel::train(const std::shared_ptr<const Language>& lang,
                       std::span<const TaskRecord> records) {
  for (const TaskRecord& rec : records) {
    SynthSession s = SynthSession::for_root(lang, {});
    for (const std::string& text : rec.tokens) {
      std::optional<Token> tok = parse_token(*lang, text);
      if (!tok)
        throw Fault("ngram train: record " + rec.id + " token \"" + text +
                    "\" does not parse");
      counts_[context_key(s)][text] += 1;
      if (!s.feed(*tok).ok())
        throw Fault("ngram train: record " + rec.id + " does not replay");
    }
  }
}

std::vector<double> NGramModel::score(const std::string&,
                                      const SynthSession& s,
                                      std::span<const Token> legal) {
  std::vector<std::uint64_t> c(legal.size(), 0);
  std::uint64_t total = 0;
  if (auto it = counts_.find(context_key(s)); it != counts_.end()) {
    for (size_t i = 0; i < legal.size(); ++i) {
      if (auto jt = it->second.find(print_token(s.language(), legal[i]));
          jt != it->second.end()) {
        c[i] = jt->second;
        total += jt->second;
      }
    }
  }
  // Add-one over the legal set: a proper distribution even for unseen
  // contexts, where it degrades to uniform.
  std::vector<double> out(legal.size());
  double denom = std::log(static_cast<double>(total + legal.size()));
  for (size_t i = 0; i < legal.size(); ++i)
    out[i] = std::log(static_cast<double>(c[i] + 1)) - denom;
  return out;
}

std::string NGramModel::save() const {
  std::string out = "# ngram order=" + std::to_string(opts_.order) +
                    " cond=" + (opts_.goal_conditioned ? "1" : "0") + "\n";
  for (const auto& [ctx, nexts] : counts_)
    for (const auto& [tok, n] : nexts) {
      if (!ctx.empty()) {
        out += ctx;
        out += ' ';
      }
      out += tok + ' ' + std::to_string(n) + '\n';
    }
  return out;
}

NGramModel NGramModel::load(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw Fault("ngram load: empty input");
  Options opts;
  int cond = 0;
  if (std::sscanf(line.c_str(), "# ngram order=%d cond=%d", &opts.order,
                  &cond) != 2)
    throw Fault("ngram load: bad header \"" + line + "\"");
  opts.goal_conditioned = cond != 0;
  NGramModel model(opts);

  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::vector<std::string> parts;
    for (std::string f; fields >> f;) parts.push_back(f);
    if (parts.size() < 2)
      throw Fault("ngram load: line " + std::to_string(lineno) + " malformed");
    std::uint64_t n = 0;
    try {
      size_t used = 0;
      n = std::stoull(parts.back(), &used);
      if (used != parts.back().size()) throw std::invalid_argument("");
    } catch (const std::exception&) {
      throw Fault("ngram load: line " + std::to_string(lineno) +
                  " has a bad count \"" + parts.back() + "\"");
    }
    std::string tok = parts[parts.size() - 2];
    std::string ctx;
    for (size_t i = 0; i + 2 < parts.size(); ++i) {
      if (i) ctx += ' ';
      ctx += parts[i];
    }
    model.counts_[ctx][tok] += n;
  }
  return model;
}

std::optional<Token> PolicySampleOracle::pick(const SynthSession& s,
                                              std::span<const Token> legal) {
  if (legal.empty()) return std::nullopt;
  std::vector<double> w = policy_->score(prompt_, s, legal);
  if (w.size() != legal.size())
    throw Fault("policy returned " + std::to_string(w.size()) +
                " scores for " + std::to_string(legal.size()) + " tokens");
  double mx = *std::max_element(w.begin(), w.end());
  double total = 0;
  for (double& x : w) {
    x = std::exp(x - mx);
    total += x;
  }
  // Portable unit draw: 53 bits of the engine's output.
  double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53 * total;
  for (size_t i = 0; i < w.size(); ++i) {
    u -= w[i];
    if (u < 0) return legal[i];
  }
  return legal.back();
}

namespace {

// Ties everywhere break on the token-rank-lexicographic order of the whole
// decision prefix - the same canonical order enumerate_all walks in.
struct BeamItem {
  SynthSession s;
  double w;
  std::vector<std::uint64_t> ranks;
};

struct Harvested {
  BeamCandidate cand;
  std::vector<std::uint64_t> ranks;
};

}  // namespace

BeamResult beam_search(std::shared_ptr<const Language> lang,
                       const Judgment& goal, Policy& policy,
                       const std::string& prompt, BeamOptions opts) {
  if (opts.width < 1) throw Fault("beam_search: width must be >= 1");
  if (goal.args.size() != 1)
    throw Fault("beam_search: goal must be unary to extract programs");

  BeamResult result;
  std::vector<Harvested> pool;
  std::vector<BeamItem> beam;
  beam.push_back({SynthSession(lang, goal, opts.synth), 0.0, {}});
  int capacity = opts.width;

  struct Exp {
    size_t item;
    Token tok;
    std::uint64_t rank;
    double w;
  };

  while (!beam.empty() && capacity > 0 && result.steps < opts.max_steps) {
    std::vector<Exp> exps;
    int died = 0;
    for (size_t i = 0; i < beam.size(); ++i) {
      std::vector<Token> legal = beam[i].s.legal_tokens();
      if (legal.empty()) {
        ++died;
        continue;
      }
      std::vector<double> sc = policy.score(prompt, beam[i].s, legal);
      if (sc.size() != legal.size())
        throw Fault("beam_search: policy score arity mismatch");
      for (size_t k = 0; k < legal.size(); ++k)
        exps.push_back(
            {i, legal[k], token_rank(*lang, legal[k]), beam[i].w + sc[k]});
    }
    if (exps.empty()) break;

    std::stable_sort(exps.begin(), exps.end(), [&](const Exp& a, const Exp& b) {
      if (a.w != b.w) return a.w > b.w;
      const auto& pa = beam[a.item].ranks;
      const auto& pb = beam[b.item].ranks;
      if (pa != pb)
        return std::lexicographical_compare(pa.begin(), pa.end(), pb.begin(),
                                            pb.end());
      return a.rank < b.rank;
    });

    // Walk the ranking, handing out slots. A completing expansion goes to
    // the output pool; with refill on it hands its slot to the next one.
    std::vector<BeamItem> survivors;
    int harvested = 0;
    int slots = opts.refill ? capacity : capacity - died;
    for (const Exp& e : exps) {
      int used = static_cast<int>(survivors.size()) + (opts.refill ? 0 : harvested);
      if (used >= slots) break;
      SynthSession next = beam[e.item].s;
      FeedResult fr = next.feed(e.tok);
      ++result.expanded;
      if (!fr.ok()) throw Fault("beam_search: legal token was rejected");
      std::vector<std::uint64_t> ranks = beam[e.item].ranks;
      ranks.push_back(e.rank);
      if (fr.status == FeedStatus::Complete) {
        pool.push_back({BeamCandidate{next.program(), e.w, next.history()},
                        std::move(ranks)});
        ++harvested;
      } else {
        survivors.push_back({std::move(next), e.w, std::move(ranks)});
      }
    }

    if (!opts.refill) capacity = std::max(0, slots - harvested);
    beam = std::move(survivors);
    ++result.steps;
  }

  std::stable_sort(pool.begin(), pool.end(),
                   [](const Harvested& a, const Harvested& b) {
                     if (a.cand.log_weight != b.cand.log_weight)
                       return a.cand.log_weight > b.cand.log_weight;
                     return std::lexicographical_compare(
                         a.ranks.begin(), a.ranks.end(), b.ranks.begin(),
                         b.ranks.end());
                   });
  result.completed.reserve(pool.size());
  for (Harvested& h : pool) result.completed.push_back(std::move(h.cand));
  return result;
}

BeamResult beam_search_root(std::shared_ptr<const Language> lang,
                            Policy& policy, const std::string& prompt,
                            BeamOptions opts) {
  const PredicateDecl& root = lang->pred(lang->root_pred());
  if (root.params.size() != 1)
    throw Fault("beam_search: root predicate is not unary");
  Judgment goal{lang->root_pred(), {fresh_var(root.params[0], "prog")}};
  return beam_search(std::move(lang), goal, policy, prompt, opts);
}

}  // namespace tyflow
