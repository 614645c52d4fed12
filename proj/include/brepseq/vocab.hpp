#pragma once

#include <cstdint>
#include <string>

#include "brepseq/geometry.hpp"
#include "brepseq/util.hpp"

namespace brepseq {

enum class TokenKind { kCoord, kPointer, kRq, kStart, kSep, kEnd };

inline const char* token_kind_name(TokenKind k) {
  switch (k) {
    case TokenKind::kCoord: return "coordinate";
    case TokenKind::kPointer: return "pointer";
    case TokenKind::kRq: return "rq";
    case TokenKind::kStart: return "<start>";
    case TokenKind::kSep: return "<sep>";
    case TokenKind::kEnd: return "<end>";
  }
  return "unknown";
}

struct TokenClass {
  TokenKind kind;
  /// RQ level for kRq, else 0.
  int level = 0;
  /// Offset inside the kind's range.
  int offset = 0;
  friend bool operator==(const TokenClass&, const TokenClass&) = default;
};

/// Token id space: [coords | pointers | rq level 0 | ... | rq level D-1 | <start> <sep> <end>].
struct VocabLayout {
  int coord_bins = 128;
  int max_pointers = 256;
  int rq_levels = 4;
  /// Entries per RQ level, including the zero centroid.
  int rq_entries = 257;

  int pointer_begin() const { return coord_bins; }
  int rq_begin(int level) const { return coord_bins + max_pointers + level * rq_entries; }
  int start_token() const { return rq_begin(rq_levels); }
  int sep_token() const { return start_token() + 1; }
  int end_token() const { return start_token() + 2; }
  int size() const { return start_token() + 3; }

  int coord_token(int bin) const { return bin; }
  int pointer_token(int index) const { return pointer_begin() + index; }
  int rq_token(int level, int code) const { return rq_begin(level) + code; }

  TokenClass classify(int token) const {
    if (token < 0 || token >= size()) throw Error(ErrorKind::kRange, "token id " + std::to_string(token) + " outside vocabulary");
    if (token < coord_bins) return {TokenKind::kCoord, 0, token};
    if (token < rq_begin(0)) return {TokenKind::kPointer, 0, token - pointer_begin()};
    if (token < start_token()) {
      const int rel = token - rq_begin(0);
      return {TokenKind::kRq, rel / rq_entries, rel % rq_entries};
    }
    if (token == start_token()) return {TokenKind::kStart, 0, 0};
    if (token == sep_token()) return {TokenKind::kSep, 0, 0};
    return {TokenKind::kEnd, 0, 0};
  }

  int token(const TokenClass& c) const {
    switch (c.kind) {
      case TokenKind::kCoord: return coord_token(c.offset);
      case TokenKind::kPointer: return pointer_token(c.offset);
      case TokenKind::kRq: return rq_token(c.level, c.offset);
      case TokenKind::kStart: return start_token();
      case TokenKind::kSep: return sep_token();
      case TokenKind::kEnd: return end_token();
    }
    return -1;
  }

  std::string hash() const {
    return Fnv1a().str("vocab-v1").u64(coord_bins).u64(max_pointers).u64(rq_levels).u64(rq_entries).hex();
  }

  friend bool operator==(const VocabLayout&, const VocabLayout&) = default;
};

inline constexpr int kCoordBins = 128;

/// 7-bit coordinate bin of x in [0, 1).
inline int quantize_coord(double x) {
  if (!(x >= 0.0 && x < 1.0)) throw Error(ErrorKind::kRange, "coordinate " + std::to_string(x) + " outside [0, 1)");
  const int k = static_cast<int>(std::floor(x * kCoordBins));
  return k > kCoordBins - 1 ? kCoordBins - 1 : k;
}

/// Bin center.
inline double dequantize_coord(int k) {
  if (k < 0 || k >= kCoordBins) throw Error(ErrorKind::kRange, "coordinate bin outside [0, 128)");
  return (k + 0.5) / kCoordBins;
}

}  // namespace brepseq
