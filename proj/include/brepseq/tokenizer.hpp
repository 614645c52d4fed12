#pragma once

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "brepseq/brep.hpp"
#include "brepseq/grammar.hpp"
#include "brepseq/rq.hpp"
#include "brepseq/validate.hpp"
#include "brepseq/vhp.hpp"
#include "brepseq/vocab.hpp"

namespace brepseq {

struct CanonicalOrder {
  /// Vertex ids per component, each in canonical order; components in canonical order.
  std::vector<std::vector<VertexId>> components;
  /// Flattened order (component-major).
  std::vector<VertexId> vertices;
};

namespace detail {

using OrderKey = std::tuple<int, int, int, double, double, double>;

inline OrderKey order_key(Point3 p) {
  return {quantize_coord(p.z), quantize_coord(p.y), quantize_coord(p.x), p.z, p.y, p.x};
}

}  // namespace detail

/// Vertices sorted by (z, y, x) inside each connected component; components by their minimum key.
/// Quantized keys decide first, full precision breaks ties.
inline CanonicalOrder canonical_order(const BrepModel& m) {
  auto comps = connected_components(m);
  std::vector<std::pair<detail::OrderKey, std::vector<VertexId>>> keyed;
  for (auto& comp : comps) {
    std::sort(comp.begin(), comp.end(), [&](VertexId a, VertexId b) {
      const auto ka = detail::order_key(m.vertices[a]), kb = detail::order_key(m.vertices[b]);
      return ka != kb ? ka < kb : a < b;
    });
    keyed.emplace_back(detail::order_key(m.vertices[comp.front()]), std::move(comp));
  }
  std::sort(keyed.begin(), keyed.end());
  CanonicalOrder out;
  std::vector<Point3> seen;
  for (auto& [key, comp] : keyed) {
    out.vertices.insert(out.vertices.end(), comp.begin(), comp.end());
    out.components.push_back(std::move(comp));
  }
  std::vector<VertexId> sorted = out.vertices;
  std::sort(sorted.begin(), sorted.end(), [&](VertexId a, VertexId b) {
    return std::tie(m.vertices[a].z, m.vertices[a].y, m.vertices[a].x) < std::tie(m.vertices[b].z, m.vertices[b].y, m.vertices[b].x);
  });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (m.vertices[sorted[i]] == m.vertices[sorted[i - 1]]) {
      throw Error(ErrorKind::kInvalidGeometry,
                  "duplicate vertices " + std::to_string(sorted[i - 1]) + " and " + std::to_string(sorted[i]));
    }
  }
  return out;
}

/// One undirected edge as emitted at its later endpoint: pointer to `from`, described at `to`.
struct EdgeRecord {
  int from = 0;  // component-local index, from <= to
  int to = 0;
  /// Descriptor of half-edge from -> to, then to -> from.
  std::vector<double> forward;
  std::vector<double> backward;
  std::vector<int> forward_codes;
  std::vector<int> backward_codes;
};

struct ComponentRecords {
  std::vector<Point3> vertices;
  std::vector<std::array<int, 3>> bins;
  /// In emission order.
  std::vector<EdgeRecord> edges;
};

/// Vertex-level content of a sequence, shared by tokenize (built from a model) and parse.
struct VertexRecordSet {
  std::vector<ComponentRecords> components;

  std::size_t vertex_count() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.vertices.size();
    return n;
  }
  std::size_t edge_count() const {
    std::size_t n = 0;
    for (const auto& c : components) n += c.edges.size();
    return n;
  }
};

/// Maps emitted records back to source elements.
struct RecordTrace {
  CanonicalOrder order;
  /// Per emitted edge (component-major, emission order): source half-edges {from->to, to->from}.
  std::vector<std::array<HalfEdgeId, 2>> half_edges;
};

struct TokenizerConfig {
  SamplingConfig sampling;
  int max_length = 3072;
  int max_pointers = 256;
};

/// Canonically ordered vertex records with exact (unquantized) descriptors.
inline VertexRecordSet build_records(const BrepModel& m, const TokenizerConfig& cfg, RecordTrace* trace = nullptr) {
  const CanonicalOrder order = canonical_order(m);
  const VhpExtraction vhp = extract_vhp(m, cfg.sampling);
  std::vector<int> local(m.vertices.size(), -1);
  for (const auto& comp : order.components) {
    for (std::size_t i = 0; i < comp.size(); ++i) local[comp[i]] = static_cast<int>(i);
  }
  std::vector<std::vector<EdgeId>> incident(m.vertices.size());
  for (EdgeId e = 0; e < static_cast<EdgeId>(m.edges.size()); ++e) {
    incident[m.edges[e].start].push_back(e);
    if (m.edges[e].end != m.edges[e].start) incident[m.edges[e].end].push_back(e);
  }

  VertexRecordSet out;
  if (trace) {
    trace->order = order;
    trace->half_edges.clear();
  }
  for (const auto& comp : order.components) {
    if (static_cast<int>(comp.size()) > cfg.max_pointers) {
      throw Error(ErrorKind::kCapacity, "component with " + std::to_string(comp.size()) + " vertices exceeds capacity " +
                                            std::to_string(cfg.max_pointers));
    }
    ComponentRecords rec;
    for (std::size_t j = 0; j < comp.size(); ++j) {
      const VertexId vj = comp[j];
      const Point3 p = m.vertices[vj];
      rec.vertices.push_back(p);
      rec.bins.push_back({quantize_coord(p.x), quantize_coord(p.y), quantize_coord(p.z)});

      struct Candidate {
        int from;
        detail::OrderKey mid;
        EdgeId edge;
      };
      std::vector<Candidate> cands;
      for (EdgeId e : incident[vj]) {
        const Edge& edge = m.edges[e];
        const VertexId other = edge.start == vj ? edge.end : edge.start;
        if (local[other] > static_cast<int>(j)) continue;
        const Point3 mid = evaluate(edge.curve, 0.5);
        cands.push_back({local[other], {0, 0, 0, mid.z, mid.y, mid.x}, e});
      }
      std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.from, a.mid, a.edge) < std::tie(b.from, b.mid, b.edge);
      });
      for (const Candidate& c : cands) {
        const Edge& edge = m.edges[c.edge];
        const VertexId vi = comp[c.from];
        // Half-edge leaving vi; for self-loops the forward half-edge comes first.
        const HalfEdgeId out_h = edge.start == vi ? edge.half_edges[0] : edge.half_edges[1];
        const HalfEdgeId back_h = m.half_edges[out_h].twin;
        EdgeRecord er;
        er.from = c.from;
        er.to = static_cast<int>(j);
        er.forward = flatten(vhp.records[out_h]);
        er.backward = flatten(vhp.records[back_h]);
        rec.edges.push_back(std::move(er));
        if (trace) trace->half_edges.push_back({out_h, back_h});
      }
    }
    out.components.push_back(std::move(rec));
  }
  return out;
}

/// Descriptors are quantized in an edge frame: each sample point minus its anchor on the chord
/// between the dequantized endpoints (patch row r at (r+1)/(N_c+1), next samples at the end
/// vertex), divided by the chord length. Quantization error then scales with the edge.
inline double chord_scale(Point3 a, Point3 b) { return std::max(distance(a, b), 1.0 / kCoordBins); }

namespace detail {

template <class F>
void for_each_anchor(const SamplingConfig& cfg, Point3 a, Point3 b, F&& f) {
  std::size_t i = 0;
  for (int r = 0; r < cfg.curve_samples; ++r) {
    const Point3 anchor = lerp(a, b, interior_parameter(r + 1, cfg.curve_samples));
    for (int c = 0; c < cfg.surface_samples; ++c) f(i++, anchor);
  }
  for (int k = 0; k < cfg.next_samples; ++k) f(i++, b);
}

inline void check_descriptor(const std::vector<double>& d, const SamplingConfig& cfg) {
  if (static_cast<int>(d.size()) != cfg.descriptor_length()) {
    throw Error(ErrorKind::kRange, "descriptor length " + std::to_string(d.size()) + " does not match the sampling layout");
  }
}

}  // namespace detail

inline std::vector<double> to_edge_frame(std::vector<double> d, Point3 a, Point3 b, const SamplingConfig& cfg) {
  detail::check_descriptor(d, cfg);
  const double s = chord_scale(a, b);
  detail::for_each_anchor(cfg, a, b, [&](std::size_t i, Point3 anchor) {
    for (int k = 0; k < 3; ++k) d[3 * i + k] = (d[3 * i + k] - anchor[k]) / s;
  });
  return d;
}

inline std::vector<double> from_edge_frame(std::vector<double> d, Point3 a, Point3 b, const SamplingConfig& cfg) {
  detail::check_descriptor(d, cfg);
  const double s = chord_scale(a, b);
  detail::for_each_anchor(cfg, a, b, [&](std::size_t i, Point3 anchor) {
    for (int k = 0; k < 3; ++k) d[3 * i + k] = d[3 * i + k] * s + anchor[k];
  });
  return d;
}

inline Point3 dequantize_bins(const std::array<int, 3>& b) { return {dequantize_coord(b[0]), dequantize_coord(b[1]), dequantize_coord(b[2])}; }

/// Edge-frame descriptors of every emitted edge (forward, backward), i.e. what the codebook sees.
inline std::vector<std::vector<double>> codec_descriptors(const VertexRecordSet& r, const SamplingConfig& cfg) {
  std::vector<std::vector<double>> out;
  for (const auto& c : r.components) {
    for (const auto& e : c.edges) {
      const Point3 a = dequantize_bins(c.bins[e.from]), b = dequantize_bins(c.bins[e.to]);
      out.push_back(to_edge_frame(e.forward, a, b, cfg));
      out.push_back(to_edge_frame(e.backward, b, a, cfg));
    }
  }
  return out;
}

struct TokenSequence {
  std::vector<int> tokens;
  std::string layout_hash;
  std::string codebook_id;
  Similarity transform;
};

inline VocabLayout layout_for(const Codebook& cb, int max_pointers = 256) {
  return VocabLayout{kCoordBins, max_pointers, cb.levels, cb.codes_per_level()};
}

/// Token count of a record set: 2 + sum over components of 3V + (1 + 2D)E, plus one <sep> between components.
inline std::size_t expected_token_count(const VertexRecordSet& r, int rq_levels) {
  std::size_t n = 2;
  for (std::size_t c = 0; c < r.components.size(); ++c) {
    n += 3 * r.components[c].vertices.size() + (1 + 2 * static_cast<std::size_t>(rq_levels)) * r.components[c].edges.size();
    if (c > 0) ++n;
  }
  return n;
}

/// Emits the token stream for a record set, quantizing descriptors with `cb`.
inline TokenSequence encode_records(VertexRecordSet& records, const Codebook& cb, const TokenizerConfig& cfg) {
  const VocabLayout layout = layout_for(cb, cfg.max_pointers);
  TokenSequence seq;
  seq.layout_hash = layout.hash();
  seq.codebook_id = cb.id();
  auto& t = seq.tokens;
  t.push_back(layout.start_token());
  for (std::size_t c = 0; c < records.components.size(); ++c) {
    if (c > 0) t.push_back(layout.sep_token());
    ComponentRecords& comp = records.components[c];
    std::size_t next_edge = 0;
    for (std::size_t j = 0; j < comp.vertices.size(); ++j) {
      for (int axis = 0; axis < 3; ++axis) t.push_back(layout.coord_token(comp.bins[j][axis]));
      while (next_edge < comp.edges.size() && comp.edges[next_edge].to == static_cast<int>(j)) {
        EdgeRecord& e = comp.edges[next_edge++];
        const Point3 a = dequantize_bins(comp.bins[e.from]), b = dequantize_bins(comp.bins[e.to]);
        e.forward_codes = rq_encode(to_edge_frame(e.forward, a, b, cfg.sampling), cb);
        e.backward_codes = rq_encode(to_edge_frame(e.backward, b, a, cfg.sampling), cb);
        t.push_back(layout.pointer_token(e.from));
        for (int l = 0; l < cb.levels; ++l) t.push_back(layout.rq_token(l, e.forward_codes[l]));
        for (int l = 0; l < cb.levels; ++l) t.push_back(layout.rq_token(l, e.backward_codes[l]));
      }
    }
  }
  t.push_back(layout.end_token());
  if (static_cast<int>(t.size()) > cfg.max_length) {
    throw Error(ErrorKind::kCapacity, "sequence of " + std::to_string(t.size()) + " tokens exceeds the maximum length " +
                                          std::to_string(cfg.max_length));
  }
  return seq;
}

/// Normalized, validated model -> tokens.
inline TokenSequence tokenize(const BrepModel& m, const Codebook& cb, const TokenizerConfig& cfg = {},
                              RecordTrace* trace = nullptr, VertexRecordSet* records_out = nullptr) {
  if (cb.dimension != cfg.sampling.descriptor_length()) {
    throw Error(ErrorKind::kPrecondition, "codebook dimension does not match the sampling configuration");
  }
  VertexRecordSet records = build_records(m, cfg, trace);
  TokenSequence seq = encode_records(records, cb, cfg);
  if (records_out) *records_out = std::move(records);
  return seq;
}

/// Inverse of encode_records. Descriptors are decoded when a codebook is supplied.
inline VertexRecordSet parse(const std::vector<int>& tokens, const VocabLayout& layout, const Codebook* cb = nullptr,
                             const SamplingConfig& sampling = {}) {
  if (cb && (cb->levels != layout.rq_levels || cb->codes_per_level() != layout.rq_entries)) {
    throw Error(ErrorKind::kPrecondition, "codebook does not match the vocabulary layout");
  }
  if (cb && cb->dimension != sampling.descriptor_length()) {
    throw Error(ErrorKind::kPrecondition, "codebook dimension does not match the sampling configuration");
  }
  VertexRecordSet out;
  if (tokens.size() == 2 && tokens[0] == layout.start_token() && tokens[1] == layout.end_token()) return out;

  GrammarState state;
  ComponentRecords comp;
  std::array<int, 3> bins{};
  EdgeRecord edge;
  for (std::size_t pos = 0; pos < tokens.size(); ++pos) {
    const int tok = tokens[pos];
    const GrammarState before = state;
    state = step(state, tok, layout);
    const TokenClass c = layout.classify(tok);
    switch (c.kind) {
      case TokenKind::kCoord: {
        const int axis = before.phase == GrammarState::Phase::kAfterVertex ? 0 : before.coord_index;
        bins[axis] = c.offset;
        if (axis == 2) {
          comp.bins.push_back(bins);
          comp.vertices.push_back({dequantize_coord(bins[0]), dequantize_coord(bins[1]), dequantize_coord(bins[2])});
        }
        break;
      }
      case TokenKind::kPointer:
        edge = EdgeRecord{};
        edge.from = c.offset;
        edge.to = static_cast<int>(comp.vertices.size()) - 1;
        break;
      case TokenKind::kRq:
        (before.rq_index < layout.rq_levels ? edge.forward_codes : edge.backward_codes).push_back(c.offset);
        if (state.phase == GrammarState::Phase::kAfterVertex) {
          if (cb) {
            const Point3 a = comp.vertices[edge.from], b = comp.vertices[edge.to];
            edge.forward = from_edge_frame(rq_decode(edge.forward_codes, *cb), a, b, sampling);
            edge.backward = from_edge_frame(rq_decode(edge.backward_codes, *cb), b, a, sampling);
          }
          comp.edges.push_back(std::move(edge));
          edge = EdgeRecord{};
        }
        break;
      case TokenKind::kSep:
      case TokenKind::kEnd:
        out.components.push_back(std::move(comp));
        comp = ComponentRecords{};
        break;
      case TokenKind::kStart:
        break;
    }
  }
  if (state.phase != GrammarState::Phase::kDone) {
    const std::string why = state.phase == GrammarState::Phase::kRq || state.phase == GrammarState::Phase::kCoord
                                ? "incomplete vertex at end of input"
                                : "missing <end>";
    throw GrammarError(tokens.size(), -1, expected_description(state),
                       "position " + std::to_string(tokens.size()) + ": " + why + " (expected " + expected_description(state) + ")");
  }
  return out;
}

}  // namespace brepseq
