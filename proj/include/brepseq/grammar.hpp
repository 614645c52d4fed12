#pragma once

#include <string>
#include <vector>

#include "brepseq/vocab.hpp"

namespace brepseq {

/// Half-open token id interval.
struct TokenRange {
  int begin = 0;
  int end = 0;
  friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

/// Allowed-token set as a sorted list of disjoint ranges.
struct TokenMask {
  std::vector<TokenRange> ranges;

  bool contains(int token) const {
    for (const TokenRange& r : ranges) {
      if (token >= r.begin && token < r.end) return true;
    }
    return false;
  }
  std::size_t size() const {
    std::size_t n = 0;
    for (const TokenRange& r : ranges) n += static_cast<std::size_t>(r.end - r.begin);
    return n;
  }
  bool empty() const { return size() == 0; }
  std::vector<int> tokens() const {
    std::vector<int> out;
    for (const TokenRange& r : ranges) {
      for (int t = r.begin; t < r.end; ++t) out.push_back(t);
    }
    return out;
  }
};

/// Position in the vertex grammar:
///   seq    := <start> comp (<sep> comp)* <end>
///   comp   := vertex+
///   vertex := coord coord coord (pointer rq{2D})*
/// Pointers within a vertex are non-decreasing and never exceed the vertex's own index.
struct GrammarState {
  enum class Phase { kBeforeStart, kCoord, kAfterVertex, kRq, kDone };

  Phase phase = Phase::kBeforeStart;
  int coord_index = 0;
  int rq_index = 0;
  /// Vertices seen in the current component, counting the one being described.
  int component_vertices = 0;
  /// Smallest pointer still allowed for the current vertex.
  int min_pointer = 0;
  int components = 0;
  int length = 0;

  bool at_component_boundary() const {
    return phase == Phase::kCoord && coord_index == 0 && component_vertices == 0;
  }
  friend bool operator==(const GrammarState&, const GrammarState&) = default;
};

inline const char* expected_description(const GrammarState& s) {
  switch (s.phase) {
    case GrammarState::Phase::kBeforeStart: return "<start>";
    case GrammarState::Phase::kCoord: return "coordinate";
    case GrammarState::Phase::kAfterVertex: return "coordinate, pointer, <sep> or <end>";
    case GrammarState::Phase::kRq: return "rq code";
    case GrammarState::Phase::kDone: return "nothing after <end>";
  }
  return "?";
}

inline TokenMask validity_mask(const GrammarState& s, const VocabLayout& v) {
  TokenMask m;
  switch (s.phase) {
    case GrammarState::Phase::kBeforeStart:
      m.ranges.push_back({v.start_token(), v.start_token() + 1});
      break;
    case GrammarState::Phase::kCoord:
      m.ranges.push_back({0, v.coord_bins});
      break;
    case GrammarState::Phase::kAfterVertex:
      if (s.component_vertices < v.max_pointers) m.ranges.push_back({0, v.coord_bins});
      if (s.min_pointer <= s.component_vertices - 1) {
        m.ranges.push_back({v.pointer_token(s.min_pointer), v.pointer_token(s.component_vertices)});
      }
      m.ranges.push_back({v.sep_token(), v.end_token() + 1});
      break;
    case GrammarState::Phase::kRq: {
      const int level = s.rq_index % v.rq_levels;
      m.ranges.push_back({v.rq_begin(level), v.rq_begin(level) + v.rq_entries});
      break;
    }
    case GrammarState::Phase::kDone:
      break;
  }
  return m;
}

class GrammarError : public Error {
 public:
  GrammarError(std::size_t position, int token, std::string expected, const std::string& what)
      : Error(ErrorKind::kGrammar, what), position_(position), token_(token), expected_(std::move(expected)) {}
  std::size_t position() const { return position_; }
  int token() const { return token_; }
  const std::string& expected() const { return expected_; }

 private:
  std::size_t position_;
  int token_;
  std::string expected_;
};

/// Transition on `token`; throws GrammarError for tokens outside validity_mask(s).
inline GrammarState step(GrammarState s, int token, const VocabLayout& v) {
  using Phase = GrammarState::Phase;
  auto fail = [&](const std::string& why) -> GrammarState {
    throw GrammarError(static_cast<std::size_t>(s.length), token, expected_description(s),
                       "token " + std::to_string(token) + " at position " + std::to_string(s.length) + ": " + why +
                           " (expected " + expected_description(s) + ")");
  };
  if (token < 0 || token >= v.size()) return fail("token outside vocabulary");
  const TokenClass c = v.classify(token);
  switch (s.phase) {
    case Phase::kBeforeStart:
      if (c.kind != TokenKind::kStart) return fail("sequence must begin with <start>");
      s.phase = Phase::kCoord;
      s.coord_index = 0;
      s.component_vertices = 0;
      break;
    case Phase::kCoord:
      if (c.kind == TokenKind::kSep || c.kind == TokenKind::kEnd) return fail("delimiter inside an incomplete vertex");
      if (c.kind != TokenKind::kCoord) return fail("incomplete vertex coordinates");
      if (s.coord_index == 2) {
        s.phase = Phase::kAfterVertex;
        ++s.component_vertices;
        s.min_pointer = 0;
      } else {
        ++s.coord_index;
      }
      break;
    case Phase::kAfterVertex:
      if (c.kind == TokenKind::kCoord) {
        if (s.component_vertices >= v.max_pointers) return fail("component exceeds the pointer capacity");
        s.phase = Phase::kCoord;
        s.coord_index = 1;
      } else if (c.kind == TokenKind::kPointer) {
        if (c.offset >= s.component_vertices) return fail("forward reference to vertex " + std::to_string(c.offset));
        if (c.offset < s.min_pointer) return fail("pointers of a vertex must be non-decreasing");
        s.min_pointer = c.offset;
        s.phase = Phase::kRq;
        s.rq_index = 0;
      } else if (c.kind == TokenKind::kSep) {
        ++s.components;
        s.phase = Phase::kCoord;
        s.coord_index = 0;
        s.component_vertices = 0;
      } else if (c.kind == TokenKind::kEnd) {
        ++s.components;
        s.phase = Phase::kDone;
      } else {
        return fail("unexpected token kind " + std::string(token_kind_name(c.kind)));
      }
      break;
    case Phase::kRq:
      if (c.kind == TokenKind::kSep || c.kind == TokenKind::kEnd) return fail("delimiter inside an incomplete rq group");
      if (c.kind != TokenKind::kRq) return fail("incomplete vertex: rq group truncated");
      if (c.level != s.rq_index % v.rq_levels) return fail("rq code from the wrong level");
      if (++s.rq_index == 2 * v.rq_levels) s.phase = Phase::kAfterVertex;
      break;
    case Phase::kDone:
      return fail("tokens after <end>");
  }
  ++s.length;
  return s;
}

}  // namespace brepseq
