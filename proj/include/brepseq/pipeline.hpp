#pragma once

#include <string>
#include <vector>

#include "brepseq/metrics.hpp"
#include "brepseq/reconstruct.hpp"
#include "brepseq/rq.hpp"
#include "brepseq/tokenizer.hpp"

namespace brepseq {

/// Codebook training corpus: edge-frame descriptors (both directions of every edge) of a model set.
inline std::vector<std::vector<double>> collect_descriptors(const std::vector<BrepModel>& models, const TokenizerConfig& cfg = {}) {
  std::vector<std::vector<double>> out;
  for (const BrepModel& m : models) {
    auto d = codec_descriptors(build_records(m, cfg), cfg.sampling);
    out.insert(out.end(), std::make_move_iterator(d.begin()), std::make_move_iterator(d.end()));
  }
  return out;
}

struct RoundtripResult {
  TokenSequence tokens;
  Reconstruction reconstruction;
  RoundtripComparison comparison;
  bool ok = false;
};

/// tokenize -> parse -> reconstruct -> compare.
inline RoundtripResult roundtrip(const BrepModel& m, const Codebook& cb, const TokenizerConfig& cfg = {}) {
  RoundtripResult r;
  RecordTrace trace;
  r.tokens = tokenize(m, cb, cfg, &trace);
  const VertexRecordSet parsed = parse(r.tokens.tokens, layout_for(cb, cfg.max_pointers), &cb, cfg.sampling);
  r.reconstruction = reconstruct(parsed, cfg.sampling);
  r.comparison = compare_roundtrip(m, trace, r.reconstruction);
  r.ok = r.reconstruction.report.success && r.comparison.ok();
  return r;
}

/// Canonical duplicate key: the token sequence when the model tokenizes, else a geometry hash.
inline std::string canonical_key(const BrepModel& m, const Codebook& cb, const TokenizerConfig& cfg = {}) {
  try {
    const TokenSequence s = tokenize(m, cb, cfg);
    std::string key = "tok:";
    for (int t : s.tokens) key += std::to_string(t) + ",";
    return key;
  } catch (const std::exception&) {
    return geometry_key(m);
  }
}

}  // namespace brepseq
