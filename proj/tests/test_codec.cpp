#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <set>

#include "brepseq/corpus.hpp"
#include "brepseq/pipeline.hpp"

using namespace brepseq;

namespace {

BrepModel unit_cube() { return normalize(make_box({0, 0, 0}, {1, 1, 1})).first; }

// Small codebook over a handful of primitives; enough for layout and round-trip checks.
const Codebook& small_codebook() {
  static const Codebook cb = [] {
    std::vector<BrepModel> ms = {unit_cube(), normalize(make_box_with_hole({0, 0, 0}, {1, 1, 1}, 0.3, 0.3)).first,
                                 normalize(make_cylinder({0, 0, 0}, 0.5, 1.0)).first,
                                 normalize(make_l_bracket({0, 0, 0}, 1, 1, 1, 0.3, 0.4)).first};
    CodebookTraining t;
    t.levels = 4;
    t.entries = 16;
    t.seed = 1;
    return train_codebook(collect_descriptors(ms), t);
  }();
  return cb;
}

std::vector<int> grammar_run(const std::vector<int>& tokens, const VocabLayout& v) {
  // returns the index of each token whose predecessor mask rejected it
  std::vector<int> bad;
  GrammarState s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (!validity_mask(s, v).contains(tokens[i])) bad.push_back(static_cast<int>(i));
    s = step(s, tokens[i], v);
  }
  return bad;
}

void expect_grammar_error(const std::vector<int>& tokens, const VocabLayout& v, std::size_t position) {
  try {
    parse(tokens, v);
    FAIL() << "expected a grammar error";
  } catch (const GrammarError& e) {
    EXPECT_EQ(e.position(), position) << e.what();
    EXPECT_EQ(e.kind(), ErrorKind::kGrammar);
  }
}

}  // namespace

TEST(Quantize, Examples) {
  EXPECT_EQ(quantize_coord(0.0), 0);
  EXPECT_DOUBLE_EQ(dequantize_coord(0), 0.00390625);
  EXPECT_EQ(quantize_coord(0.999), 127);
  EXPECT_EQ(quantize_coord(0.25), 32);
  EXPECT_DOUBLE_EQ(std::abs(0.25 - dequantize_coord(32)), 0.00390625);
  for (double x = 0.0; x < 1.0; x += 0.000731) EXPECT_LE(std::abs(x - dequantize_coord(quantize_coord(x))), 1.0 / 256);
  EXPECT_THROW(quantize_coord(1.0), Error);
  EXPECT_THROW(quantize_coord(-1e-12), Error);
  EXPECT_THROW(dequantize_coord(128), Error);
}

TEST(Vocab, RangesPartitionIds) {
  const VocabLayout v{128, 256, 4, 257};
  std::map<TokenKind, int> counts;
  for (int t = 0; t < v.size(); ++t) {
    const TokenClass c = v.classify(t);
    EXPECT_EQ(v.token(c), t);
    ++counts[c.kind];
  }
  EXPECT_EQ(counts[TokenKind::kCoord], 128);
  EXPECT_EQ(counts[TokenKind::kPointer], 256);
  EXPECT_EQ(counts[TokenKind::kRq], 4 * 257);
  EXPECT_EQ(counts[TokenKind::kStart] + counts[TokenKind::kSep] + counts[TokenKind::kEnd], 3);
  EXPECT_THROW(v.classify(v.size()), Error);
  EXPECT_NE(v.hash(), (VocabLayout{128, 256, 4, 65}).hash());
}

TEST(CanonicalOrder, CubeCorners) {
  const BrepModel m = unit_cube();
  const CanonicalOrder o = canonical_order(m);
  ASSERT_EQ(o.vertices.size(), 8u);
  EXPECT_EQ(m.vertices[o.vertices.front()], (Point3{0, 0, 0}));
  const Point3 last = m.vertices[o.vertices.back()];
  EXPECT_EQ(last.x, last.y);
  EXPECT_EQ(last.y, last.z);
  EXPECT_GT(last.x, 0.99);
  // (z, y, x) ascending
  for (std::size_t i = 1; i < o.vertices.size(); ++i) {
    const Point3 a = m.vertices[o.vertices[i - 1]], b = m.vertices[o.vertices[i]];
    EXPECT_LT(std::tie(a.z, a.y, a.x), std::tie(b.z, b.y, b.x));
  }
}

TEST(CanonicalOrder, GroundComponentFirst) {
  const BrepModel lifted = make_box({0, 0, 0.5}, {0.4, 0.4, 0.9});
  const BrepModel ground = make_box({0.5, 0.5, 0}, {0.9, 0.9, 0.4});
  const BrepModel m = merge_models({lifted, ground});
  const CanonicalOrder o = canonical_order(m);
  ASSERT_EQ(o.components.size(), 2u);
  for (VertexId v : o.components[0]) EXPECT_LE(m.vertices[v].z, 0.4);
}

TEST(CanonicalOrder, LexicographicTiebreak) {
  // keys written (z, y, x): same z, smaller y first
  BrepModel m;
  m.vertices = {{0.1, 0.2, 0.5}, {0.9, 0.1, 0.5}};
  const CanonicalOrder o = canonical_order(m);
  EXPECT_EQ(o.vertices, (std::vector<VertexId>{1, 0}));
  // same bins: full precision decides
  m.vertices = {{0.5, 0.5, 0.5 + 1e-4}, {0.5, 0.5, 0.5}};
  EXPECT_EQ(canonical_order(m).vertices, (std::vector<VertexId>{1, 0}));
  m.vertices = {{0.5, 0.5, 0.5}, {0.5, 0.5, 0.5}};
  EXPECT_THROW(canonical_order(m), Error);
}

TEST(Codebook, RepeatedDescriptor) {
  const std::vector<double> d = {0.1, 0.7, -0.3, 1.0};
  const std::vector<std::vector<double>> corpus(10, d);
  const Codebook cb = train_codebook(corpus, {1, 2, 0, 25, 0});
  const auto codes = rq_encode(d, cb);
  EXPECT_EQ(rq_squared_error(d, cb), 0.0);
  const auto dec = rq_decode(codes, cb);
  for (std::size_t k = 0; k < d.size(); ++k) EXPECT_DOUBLE_EQ(dec[k], d[k]);
}

TEST(Codebook, TwoClusterMeans) {
  // two tight clusters around a and b; k-means must find their means
  const std::vector<double> a = {0.2, 0.2, 0.8}, b = {0.9, 0.1, 0.3};
  std::vector<std::vector<double>> corpus;
  std::vector<double> ma(3, 0.0), mb(3, 0.0);
  Rng rng(9);
  for (int i = 0; i < 40; ++i) {
    auto pa = a, pb = b;
    for (int k = 0; k < 3; ++k) {
      pa[k] += rng.uniform(-1e-3, 1e-3);
      pb[k] += rng.uniform(-1e-3, 1e-3);
      ma[k] += pa[k] / 40;
      mb[k] += pb[k] / 40;
    }
    corpus.push_back(pa);
    corpus.push_back(pb);
  }
  const Codebook cb = train_codebook(corpus, {1, 2, 4, 50, 0});
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < 2; ++c) centers.push_back(rq_decode(std::vector<int>{c}, cb));
  std::sort(centers.begin(), centers.end());
  for (int k = 0; k < 3; ++k) {
    EXPECT_NEAR(centers[0][k], ma[k], 1e-6);
    EXPECT_NEAR(centers[1][k], mb[k], 1e-6);
  }
}

TEST(Codebook, ZeroCentroidAndMonotonicity) {
  Rng rng(2);
  std::vector<std::vector<double>> corpus(300, std::vector<double>(12));
  for (auto& d : corpus) {
    for (double& x : d) x = rng.uniform();
  }
  const Codebook cb = train_codebook(corpus, {4, 16, 3, 25, 0});
  for (int l = 0; l < cb.levels; ++l) {
    for (double x : cb.centroid(l, cb.zero_code())) EXPECT_EQ(x, 0.0);
  }
  // descriptor at the mean: all levels pick the zero centroid
  const auto codes = rq_encode(cb.mean, cb);
  for (int c : codes) EXPECT_EQ(c, cb.zero_code());
  EXPECT_EQ(rq_decode(codes, cb), cb.mean);
  // a level-1 centroid decodes exactly
  const std::vector<double> c0 = rq_decode(std::vector<int>{3}, cb);
  EXPECT_LT(rq_squared_error(c0, cb), 1e-24);
  double prev_mean = INFINITY;
  for (int used = 1; used <= 4; ++used) {
    double mean = 0.0;
    for (const auto& d : corpus) mean += rq_squared_error(d, cb, used) / corpus.size();
    EXPECT_LE(mean, prev_mean);
    prev_mean = mean;
  }
  for (int i = 0; i < 50; ++i) {
    std::vector<double> d(12);
    for (double& x : d) x = rng.uniform(-0.5, 1.5);
    for (int used = 2; used <= 4; ++used) EXPECT_LE(rq_squared_error(d, cb, used), rq_squared_error(d, cb, used - 1));
  }
  EXPECT_THROW(rq_decode(std::vector<int>{cb.codes_per_level()}, cb), Error);
  EXPECT_THROW(train_codebook(corpus, {1, 301, 0, 25, 0}), Error);
}

TEST(Codebook, DeterministicForSeed) {
  Rng rng(4);
  std::vector<std::vector<double>> corpus(200, std::vector<double>(6));
  for (auto& d : corpus) {
    for (double& x : d) x = rng.uniform();
  }
  EXPECT_EQ(train_codebook(corpus, {2, 8, 5, 25, 0}).id(), train_codebook(corpus, {2, 8, 5, 25, 0}).id());
  EXPECT_NE(train_codebook(corpus, {2, 8, 5, 25, 0}).id(), train_codebook(corpus, {2, 8, 6, 25, 0}).id());
}

TEST(Tokenize, SingleEdgeCount) {
  const SamplingConfig s;
  const Codebook& cb = small_codebook();
  VertexRecordSet r;
  ComponentRecords c;
  c.vertices = {{0.1, 0.1, 0.1}, {0.5, 0.1, 0.1}};
  for (const Point3& p : c.vertices) c.bins.push_back({quantize_coord(p.x), quantize_coord(p.y), quantize_coord(p.z)});
  EdgeRecord e;
  e.from = 0;
  e.to = 1;
  e.forward.assign(s.descriptor_length(), 0.1);
  e.backward.assign(s.descriptor_length(), 0.1);
  c.edges.push_back(e);
  r.components.push_back(c);
  const TokenSequence t = encode_records(r, cb, {});
  EXPECT_EQ(t.tokens.size(), 17u);
  EXPECT_EQ(expected_token_count(r, 4), 17u);
  EXPECT_TRUE(grammar_run(t.tokens, layout_for(cb)).empty());
}

TEST(Tokenize, CubeAndTwoCubes) {
  const Codebook& cb = small_codebook();
  const VocabLayout v = layout_for(cb);
  const TokenSequence cube = tokenize(unit_cube(), cb);
  EXPECT_EQ(cube.tokens.size(), 134u);
  EXPECT_EQ(cube.tokens.front(), v.start_token());
  EXPECT_EQ(cube.tokens.back(), v.end_token());
  EXPECT_TRUE(grammar_run(cube.tokens, v).empty());

  const BrepModel two = normalize(merge_models({make_box({0, 0, 0}, {1, 1, 1}), make_box({2, 0, 0}, {3, 1, 1})})).first;
  const TokenSequence t = tokenize(two, cb);
  EXPECT_EQ(t.tokens.size(), 267u);
  EXPECT_EQ(std::count(t.tokens.begin(), t.tokens.end(), v.sep_token()), 1);
  // pointer indices reset: no pointer reaches 8
  for (int tok : t.tokens) {
    const TokenClass c = v.classify(tok);
    if (c.kind == TokenKind::kPointer) {
      EXPECT_LT(c.offset, 8);
    }
  }
  EXPECT_TRUE(grammar_run(t.tokens, v).empty());
}

TEST(Tokenize, CapacityErrors) {
  const Codebook& cb = small_codebook();
  TokenizerConfig cfg;
  cfg.max_pointers = 7;
  try {
    tokenize(unit_cube(), cb, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
  }
  cfg = {};
  cfg.max_length = 133;
  try {
    tokenize(unit_cube(), cb, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
  }
}

TEST(Parse, CubeSkeletonIsomorphic) {
  const Codebook& cb = small_codebook();
  const BrepModel m = unit_cube();
  RecordTrace trace;
  VertexRecordSet src;
  const TokenSequence t = tokenize(m, cb, {}, &trace, &src);
  const VertexRecordSet r = parse(t.tokens, layout_for(cb), &cb);
  ASSERT_EQ(r.components.size(), 1u);
  const auto& order = trace.order.components[0];
  ASSERT_EQ(r.components[0].vertices.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    for (int a = 0; a < 3; ++a) EXPECT_LE(std::abs(r.components[0].vertices[i][a] - m.vertices[order[i]][a]), 1.0 / 256);
  }
  // canonical index pairs map to exactly the source edge set
  std::multiset<std::pair<VertexId, VertexId>> got, want;
  for (const EdgeRecord& e : r.components[0].edges) got.insert(std::minmax(order[e.from], order[e.to]));
  for (const Edge& e : m.edges) want.insert(std::minmax(e.start, e.end));
  EXPECT_EQ(got, want);
  // decoded descriptors differ from the source by exactly the RQ error in the edge frame
  const SamplingConfig s;
  for (std::size_t k = 0; k < r.components[0].edges.size(); ++k) {
    const EdgeRecord& e = r.components[0].edges[k];
    const EdgeRecord& o = src.components[0].edges[k];
    const Point3 a = dequantize_bins(src.components[0].bins[o.from]), b = dequantize_bins(src.components[0].bins[o.to]);
    const auto exact = to_edge_frame(o.forward, a, b, s);
    const auto dec = to_edge_frame(e.forward, a, b, s);
    double err = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) err += (exact[i] - dec[i]) * (exact[i] - dec[i]);
    EXPECT_NEAR(err, rq_squared_error(exact, cb), 1e-9);
  }
}

TEST(Parse, EmptyAndSelfLoop) {
  const VocabLayout v{128, 256, 4, 17};
  EXPECT_EQ(parse({v.start_token(), v.end_token()}, v).vertex_count(), 0u);
  std::vector<int> t = {v.start_token(), 1, 2, 3, v.pointer_token(0)};
  for (int k = 0; k < 8; ++k) t.push_back(v.rq_token(k % 4, 0));
  t.push_back(v.end_token());
  const VertexRecordSet r = parse(t, v);
  ASSERT_EQ(r.components.size(), 1u);
  ASSERT_EQ(r.components[0].edges.size(), 1u);
  EXPECT_EQ(r.components[0].edges[0].from, 0);
  EXPECT_EQ(r.components[0].edges[0].to, 0);
}

TEST(Parse, GrammarErrors) {
  const VocabLayout v{128, 256, 4, 17};
  const int s = v.start_token(), e = v.end_token(), sep = v.sep_token();
  // forward reference: vertex 0 pointing at index 1
  expect_grammar_error({s, 1, 2, 3, v.pointer_token(1)}, v, 4);
  // truncated rq group
  expect_grammar_error({s, 1, 2, 3, v.pointer_token(0), v.rq_token(0, 1), v.rq_token(1, 1), e}, v, 7);
  // delimiter mid-group
  expect_grammar_error({s, 1, 2, 3, v.pointer_token(0), v.rq_token(0, 1), sep}, v, 6);
  // rq from the wrong level
  expect_grammar_error({s, 1, 2, 3, v.pointer_token(0), v.rq_token(1, 1)}, v, 5);
  // incomplete vertex
  expect_grammar_error({s, 1, 2, e}, v, 3);
  // missing <end>
  expect_grammar_error({s, 1, 2, 3}, v, 4);
  // no <start>
  expect_grammar_error({1, 2, 3}, v, 0);
  // decreasing pointers within a vertex
  std::vector<int> t = {s, 1, 2, 3, 4, 5, 6, v.pointer_token(0)};
  for (int k = 0; k < 8; ++k) t.push_back(v.rq_token(k % 4, 0));
  t.push_back(v.pointer_token(1));
  for (int k = 0; k < 8; ++k) t.push_back(v.rq_token(k % 4, 0));
  t.push_back(v.pointer_token(0));
  expect_grammar_error(t, v, t.size() - 1);
}

TEST(Mask, Examples) {
  const VocabLayout v{128, 256, 4, 17};
  GrammarState st = step({}, v.start_token(), v);
  EXPECT_EQ(validity_mask(st, v).tokens(), [] {
    std::vector<int> c(128);
    for (int i = 0; i < 128; ++i) c[i] = i;
    return c;
  }());
  // 3 of 8 rq tokens emitted
  for (int t : {5, 6, 7}) st = step(st, t, v);
  GrammarState after = st;
  st = step(st, v.pointer_token(0), v);
  for (int k = 0; k < 3; ++k) st = step(st, v.rq_token(k, 2), v);
  const TokenMask mid = validity_mask(st, v);
  ASSERT_EQ(mid.ranges.size(), 1u);
  EXPECT_EQ(mid.ranges[0], (TokenRange{v.rq_begin(3), v.rq_begin(3) + 17}));
  EXPECT_FALSE(mid.contains(v.sep_token()));
  EXPECT_FALSE(mid.contains(v.end_token()));
  // complete vertex, one-vertex component
  const TokenMask m = validity_mask(after, v);
  EXPECT_EQ(m.size(), 128u + 1u + 2u);
  EXPECT_TRUE(m.contains(v.pointer_token(0)));
  EXPECT_FALSE(m.contains(v.pointer_token(1)));
  EXPECT_TRUE(m.contains(v.sep_token()));
  EXPECT_TRUE(m.contains(v.end_token()));
  EXPECT_FALSE(m.contains(v.start_token()));
}

TEST(Mask, ExactlyTheStepDomain) {
  const Codebook& cb = small_codebook();
  const VocabLayout v = layout_for(cb);
  const TokenSequence t = tokenize(normalize(make_box_with_hole({0, 0, 0}, {1, 1, 1}, 0.3, 0.3)).first, cb);
  GrammarState st;
  // every reachable state along a real sequence, probed with every vocabulary id
  for (std::size_t i = 0; i <= t.tokens.size(); i += (i < 40 ? 1 : 17)) {
    GrammarState s;
    for (std::size_t k = 0; k < i && k < t.tokens.size(); ++k) s = step(s, t.tokens[k], v);
    const TokenMask mask = validity_mask(s, v);
    for (int tok = 0; tok < v.size(); ++tok) {
      bool ok = true;
      try {
        step(s, tok, v);
      } catch (const GrammarError&) {
        ok = false;
      }
      EXPECT_EQ(ok, mask.contains(tok)) << "state " << i << " token " << tok;
    }
  }
}
