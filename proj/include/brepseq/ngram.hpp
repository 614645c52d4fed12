#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <vector>

#include "brepseq/grammar.hpp"
#include "brepseq/util.hpp"
#include "brepseq/vocab.hpp"

namespace brepseq {

/// Counts following one context, sorted by token, with running totals for range sums.
struct ContextCounts {
  std::vector<int> tokens;
  std::vector<std::int64_t> counts;
  std::vector<std::int64_t> prefix;  // prefix[i] = sum counts[0..i)
  std::int64_t total = 0;

  std::int64_t range_sum(int begin, int end) const {
    const auto lo = std::lower_bound(tokens.begin(), tokens.end(), begin) - tokens.begin();
    const auto hi = std::lower_bound(tokens.begin(), tokens.end(), end) - tokens.begin();
    return prefix[hi] - prefix[lo];
  }
  std::int64_t count(int token) const {
    const auto it = std::lower_bound(tokens.begin(), tokens.end(), token);
    return it != tokens.end() && *it == token ? counts[it - tokens.begin()] : 0;
  }
};

/// Interpolated additive smoothing:
///   P_k(w | h) = (c(h, w) + beta * P_{k-1}(w | h')) / (c(h) + beta),  beta = alpha * |V|,  P_0 = 1/|V|.
/// With a uniform lower order this is plain add-alpha smoothing.
class NGramModel {
 public:
  static constexpr int kMaxOrder = 5;
  static constexpr int kPad = 0x7fff;

  NGramModel() = default;
  NGramModel(int order, double alpha, VocabLayout layout) : order_(order), alpha_(alpha), layout_(layout) {
    if (order < 1 || order > kMaxOrder) throw Error(ErrorKind::kPrecondition, "n-gram order must be in 1.." + std::to_string(kMaxOrder));
    if (!(alpha > 0)) throw Error(ErrorKind::kPrecondition, "smoothing constant must be positive");
    if (layout.size() >= kPad) throw Error(ErrorKind::kCapacity, "vocabulary too large for the n-gram context packing");
    tables_.resize(order);
  }

  int order() const { return order_; }
  double alpha() const { return alpha_; }
  const VocabLayout& layout() const { return layout_; }
  int vocab_size() const { return layout_.size(); }

  /// Adds one sequence; contexts before the first token are padded.
  void add(const std::vector<int>& seq) {
    for (std::size_t t = 0; t < seq.size(); ++t) {
      if (seq[t] < 0 || seq[t] >= vocab_size()) throw Error(ErrorKind::kRange, "token outside vocabulary in n-gram corpus");
      for (int k = 0; k < order_; ++k) pending_[{k, context_key(seq, t, k)}][seq[t]] += 1;
    }
    dirty_ = true;
  }

  /// Freezes pending counts into lookup tables.
  void finalize() {
    if (!dirty_) return;
    for (auto& t : tables_) t.clear();
    for (const auto& [key, counts] : pending_) {
      ContextCounts cc;
      cc.prefix.push_back(0);
      for (const auto& [tok, c] : counts) {
        cc.tokens.push_back(tok);
        cc.counts.push_back(c);
        cc.prefix.push_back(cc.prefix.back() + c);
      }
      cc.total = cc.prefix.back();
      tables_[key.first].emplace(key.second, std::move(cc));
    }
    dirty_ = false;
  }

  /// Context key of the k tokens preceding position t.
  static std::uint64_t context_key(const std::vector<int>& seq, std::size_t t, int k) {
    std::uint64_t key = 0;
    for (int i = k; i >= 1; --i) {
      const int tok = t >= static_cast<std::size_t>(i) ? seq[t - i] : kPad;
      key = (key << 15) | static_cast<std::uint64_t>(tok);
    }
    return key;
  }

  const ContextCounts* lookup(int k, std::uint64_t key) const {
    const auto it = tables_[k].find(key);
    return it == tables_[k].end() ? nullptr : &it->second;
  }

  /// Smoothed conditional P(w | history) with history = seq[0..t).
  double probability(const std::vector<int>& seq, std::size_t t, int w) const {
    double p = 1.0 / vocab_size();
    const double beta = alpha_ * vocab_size();
    for (int k = 0; k < order_; ++k) {
      const ContextCounts* cc = lookup(k, context_key(seq, t, k));
      const double c = cc ? static_cast<double>(cc->count(w)) : 0.0;
      const double total = cc ? static_cast<double>(cc->total) : 0.0;
      p = (c + beta * p) / (total + beta);
    }
    return p;
  }

  /// Mass of the mask under P(. | history).
  double mask_mass(const std::vector<int>& seq, std::size_t t, const TokenMask& mask) const {
    double s = static_cast<double>(mask.size()) / vocab_size();
    const double beta = alpha_ * vocab_size();
    for (int k = 0; k < order_; ++k) {
      const ContextCounts* cc = lookup(k, context_key(seq, t, k));
      std::int64_t c = 0;
      if (cc) {
        for (const TokenRange& r : mask.ranges) c += cc->range_sum(r.begin, r.end);
      }
      s = (static_cast<double>(c) + beta * s) / ((cc ? static_cast<double>(cc->total) : 0.0) + beta);
    }
    return s;
  }

  const std::vector<std::unordered_map<std::uint64_t, ContextCounts>>& tables() const { return tables_; }

  /// Rebuilds from serialized tables (order k, key, token, count).
  void set_count(int k, std::uint64_t key, int token, std::int64_t count) {
    pending_[{k, key}][token] = count;
    dirty_ = true;
  }

 private:
  int order_ = 4;
  double alpha_ = 0.1;
  VocabLayout layout_;
  std::vector<std::unordered_map<std::uint64_t, ContextCounts>> tables_;
  std::map<std::pair<int, std::uint64_t>, std::map<int, std::int64_t>> pending_;
  bool dirty_ = false;
};

inline NGramModel fit_ngram(const std::vector<std::vector<int>>& corpus, int order, double alpha, const VocabLayout& layout) {
  if (corpus.empty()) throw Error(ErrorKind::kPrecondition, "n-gram corpus is empty");
  NGramModel m(order, alpha, layout);
  for (const auto& s : corpus) m.add(s);
  m.finalize();
  return m;
}

struct SamplerConfig {
  std::uint64_t seed = 0;
  double temperature = 1.0;
  int max_length = 3072;
  /// Optional cap below the layout's pointer capacity; <= 0 means the layout's.
  int max_vertices = 0;
  bool greedy = false;

  void check() const {
    if (!(temperature > 0)) throw Error(ErrorKind::kPrecondition, "temperature must be positive");
    if (max_length < 2) throw Error(ErrorKind::kPrecondition, "max length must allow <start> and <end>");
  }
};

struct SampledSequence {
  std::vector<int> tokens;
  std::uint64_t seed = 0;
  /// Hit max length before <end> was sampled.
  bool truncated = false;
  /// Closed with a forced <end> after truncation.
  bool forced_end = false;
  /// False only for truncated sequences that could not be closed.
  bool parseable = true;
};

namespace detail {

inline TokenMask sampler_mask(const GrammarState& s, const VocabLayout& v, const SamplerConfig& cfg) {
  TokenMask m = validity_mask(s, v);
  if (cfg.max_vertices > 0 && s.phase == GrammarState::Phase::kAfterVertex && s.component_vertices >= cfg.max_vertices) {
    std::erase_if(m.ranges, [&](const TokenRange& r) { return r.begin == 0 && r.end == v.coord_bins; });
  }
  if (m.empty()) throw Error(ErrorKind::kGrammar, "validity mask is empty");
  return m;
}

/// Exact draw from P(. | history) restricted to the mask, descending the interpolation levels.
inline int draw_masked(const NGramModel& model, const std::vector<int>& seq, const TokenMask& mask, Rng& rng) {
  const int n = model.order();
  const double beta = model.alpha() * model.vocab_size();
  std::vector<const ContextCounts*> ctx(n);
  std::vector<double> mass(n + 1), count_mass(n, 0.0);
  mass[0] = static_cast<double>(mask.size()) / model.vocab_size();
  for (int k = 0; k < n; ++k) {
    ctx[k] = model.lookup(k, NGramModel::context_key(seq, seq.size(), k));
    if (ctx[k]) {
      for (const TokenRange& r : mask.ranges) count_mass[k] += static_cast<double>(ctx[k]->range_sum(r.begin, r.end));
    }
    mass[k + 1] = (count_mass[k] + beta * mass[k]) / ((ctx[k] ? static_cast<double>(ctx[k]->total) : 0.0) + beta);
  }
  for (int k = n - 1; k >= 0; --k) {
    const double from_counts = count_mass[k];
    const double from_lower = beta * mass[k];
    if (from_counts > 0 && rng.uniform() * (from_counts + from_lower) < from_counts) {
      // Pick proportional to counts inside the mask.
      auto target = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(from_counts)));
      for (const TokenRange& r : mask.ranges) {
        const ContextCounts& cc = *ctx[k];
        auto i = std::lower_bound(cc.tokens.begin(), cc.tokens.end(), r.begin) - cc.tokens.begin();
        for (; i < static_cast<std::ptrdiff_t>(cc.tokens.size()) && cc.tokens[i] < r.end; ++i) {
          if (target < cc.counts[i]) return cc.tokens[i];
          target -= cc.counts[i];
        }
      }
    }
  }
  // Uniform over the mask.
  auto target = static_cast<int>(rng.below(mask.size()));
  for (const TokenRange& r : mask.ranges) {
    if (target < r.end - r.begin) return r.begin + target;
    target -= r.end - r.begin;
  }
  throw Error(ErrorKind::kGrammar, "masked draw fell outside the mask");
}

/// Dense path for temperature != 1 and greedy decoding.
inline int draw_dense(const NGramModel& model, const std::vector<int>& seq, const TokenMask& mask, const SamplerConfig& cfg, Rng& rng) {
  const std::vector<int> toks = mask.tokens();
  std::vector<double> w(toks.size());
  for (std::size_t i = 0; i < toks.size(); ++i) w[i] = model.probability(seq, seq.size(), toks[i]);
  if (cfg.greedy) return toks[std::max_element(w.begin(), w.end()) - w.begin()];
  double total = 0.0;
  for (double& x : w) total += (x = std::pow(x, 1.0 / cfg.temperature));
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < toks.size(); ++i) {
    if (u < w[i]) return toks[i];
    u -= w[i];
  }
  return toks.back();
}

}  // namespace detail

/// Continues `prefix` (already grammatical, state `s`) until <end> or max length.
inline SampledSequence continue_sequence(const NGramModel& model, std::vector<int> prefix, GrammarState s, const SamplerConfig& cfg) {
  cfg.check();
  const VocabLayout& v = model.layout();
  SampledSequence out;
  out.seed = cfg.seed;
  Rng rng(cfg.seed);
  const bool dense = cfg.greedy || cfg.temperature != 1.0;
  while (s.phase != GrammarState::Phase::kDone) {
    if (static_cast<int>(prefix.size()) >= cfg.max_length - 1) {
      out.truncated = true;
      if (s.phase == GrammarState::Phase::kAfterVertex) {
        prefix.push_back(v.end_token());
        s = step(s, v.end_token(), v);
        out.forced_end = true;
      } else {
        out.parseable = false;
      }
      break;
    }
    const TokenMask mask = detail::sampler_mask(s, v, cfg);
    // forced tokens do not consume randomness, so a <start> prefix is the same as none
    const int tok = mask.size() == 1 ? mask.ranges[0].begin
                    : dense ? detail::draw_dense(model, prefix, mask, cfg, rng) : detail::draw_masked(model, prefix, mask, rng);
    s = step(s, tok, v);
    prefix.push_back(tok);
  }
  out.tokens = std::move(prefix);
  return out;
}

inline SampledSequence sample_sequence(const NGramModel& model, const SamplerConfig& cfg) {
  return continue_sequence(model, {}, GrammarState{}, cfg);
}

/// Grammar state after replaying `tokens`; throws GrammarError on the first bad token.
inline GrammarState replay(const std::vector<int>& tokens, const VocabLayout& v) {
  GrammarState s;
  for (int t : tokens) s = step(s, t, v);
  return s;
}

/// Prefix must be `<start>` alone or end with `<sep>` after complete components.
inline SampledSequence autocomplete(const NGramModel& model, const std::vector<int>& prefix, const SamplerConfig& cfg) {
  const GrammarState s = replay(prefix, model.layout());
  if (prefix.empty() || !s.at_component_boundary()) {
    throw Error(ErrorKind::kPrecondition, "autocomplete prefix must end at a component boundary (<start> or <sep>)");
  }
  return continue_sequence(model, prefix, s, cfg);
}

/// Per-sequence seed for batch index i.
inline std::uint64_t sequence_seed(std::uint64_t seed, std::uint64_t i) { return Fnv1a().str("seq").u64(seed).u64(i).value(); }

}  // namespace brepseq
