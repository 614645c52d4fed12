#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "brepseq/brep_ops.hpp"
#include "brepseq/corpus.hpp"
#include "brepseq/vhp.hpp"

using namespace brepseq;

namespace {

// Face whose every vertex satisfies pred.
template <class Pred>
FaceId find_face(const BrepModel& m, Pred pred) {
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    bool all = true;
    for (HalfEdgeId h : m.loops[m.faces[f].outer].half_edges) all = all && pred(m.vertices[m.half_edges[h].origin]);
    if (all) return f;
  }
  return kNoId;
}

HalfEdgeId find_half_edge(const BrepModel& m, FaceId f, Point3 from, Point3 to) {
  for (HalfEdgeId h : m.loops[m.faces[f].outer].half_edges) {
    if (m.vertices[m.half_edges[h].origin] == from && m.vertices[m.destination(h)] == to) return h;
  }
  return kNoId;
}

// Straight-edge distance in 3D; equals the chart distance on planar faces.
double edge_distance(const BrepModel& m, HalfEdgeId h, Point3 p) {
  const auto& seg = std::get<LineSegment>(m.edges[m.half_edges[h].edge].curve);
  return std::sqrt(squared_distance_to_segment(p, seg.start, seg.end));
}

std::vector<HalfEdgeId> face_half_edges(const BrepModel& m, FaceId f) {
  std::vector<HalfEdgeId> out = m.loops[m.faces[f].outer].half_edges;
  for (LoopId l : m.faces[f].inner) out.insert(out.end(), m.loops[l].half_edges.begin(), m.loops[l].half_edges.end());
  return out;
}

// Brute-force nearest-segment check of every labeled grid cell of a planar face.
void check_voronoi_brute_force(const BrepModel& m, FaceId f, const SamplingConfig& cfg) {
  const VoronoiCellMap map = voronoi_assign(m, f, cfg);
  const auto hs = face_half_edges(m, f);
  int labeled = 0;
  for (int j = 0; j < map.resolution; ++j) {
    for (int i = 0; i < map.resolution; ++i) {
      const HalfEdgeId got = map.at(i, j);
      if (got == kNoId) continue;
      ++labeled;
      EXPECT_NE(std::find(hs.begin(), hs.end(), got), hs.end());
      const Point3 p = evaluate(m.faces[f].surface, map.cell_center(i, j));
      HalfEdgeId best = kNoId;
      double best_d = INFINITY;
      for (HalfEdgeId h : hs) {
        const double d = edge_distance(m, h, p);
        if (d < best_d - 1e-12 || (std::abs(d - best_d) <= 1e-12 && h < best)) {
          best_d = d;
          best = h;
        }
      }
      EXPECT_LE(edge_distance(m, got, p), best_d + 1e-12) << "cell " << i << "," << j;
      if (std::abs(edge_distance(m, got, p) - best_d) > 1e-12) {
        EXPECT_EQ(got, best);
      }
    }
  }
  EXPECT_GT(labeled, 0);
}

}  // namespace

TEST(Vhp, SquareFacePcurves) {
  const BrepModel m = make_box({0, 0, 0}, {1, 1, 1});
  const FaceId f = find_face(m, [](Point3 p) { return p.z == 1.0; });
  ASSERT_NE(f, kNoId);
  const auto polys = boundary_pcurves(m, f, 32);
  ASSERT_EQ(polys.size(), 4u);
  for (const UvPolyline& p : polys) {
    // collinear chords collapse to the two endpoints; each is axis-aligned
    ASSERT_EQ(p.points.size(), 2u);
    const Vec2 d = p.points[1] - p.points[0];
    EXPECT_TRUE(std::abs(d.u) < 1e-12 || std::abs(d.v) < 1e-12);
    EXPECT_NEAR(norm(d), 1.0, 1e-12);
  }
}

TEST(Vhp, CylinderSeamPcurves) {
  const BrepModel m = make_cylinder({0, 0, 0}, 0.5, 1.0);
  const FaceId f = 0;
  ASSERT_TRUE(std::holds_alternative<CylinderPatch>(m.faces[f].surface.shape));
  const auto polys = boundary_pcurves(m, f, 32);
  ASSERT_EQ(polys.size(), 4u);
  int horizontal = 0, vertical = 0;
  for (const UvPolyline& p : polys) {
    double du = 0, dv = 0;
    for (const Vec2& q : p.points) {
      du = std::max(du, std::abs(q.u - p.points[0].u));
      dv = std::max(dv, std::abs(q.v - p.points[0].v));
    }
    if (dv < 1e-12) ++horizontal;
    if (du < 1e-12) ++vertical;
  }
  EXPECT_EQ(horizontal, 2);
  EXPECT_EQ(vertical, 2);
}

TEST(Vhp, HoleFacePcurveCount) {
  const BrepModel m = make_box_with_hole({0, 0, 0}, {1, 1, 1}, 0.3, 0.3);
  const FaceId f = find_face(m, [](Point3 p) { return p.z == 1.0; });
  ASSERT_NE(f, kNoId);
  EXPECT_EQ(boundary_pcurves(m, f).size(), 8u);
}

TEST(Vhp, SquareVoronoiDiagonals) {
  const BrepModel m = make_box({0, 0, 0}, {1, 1, 1});
  const FaceId f = find_face(m, [](Point3 p) { return p.z == 1.0; });
  SamplingConfig cfg;
  const VoronoiCellMap map = voronoi_assign(m, f, cfg);
  // analytic: a point (x, y) belongs to the side at min(x, 1-x, y, 1-y)
  for (int j = 0; j < map.resolution; ++j) {
    for (int i = 0; i < map.resolution; ++i) {
      const Point3 p = evaluate(m.faces[f].surface, map.cell_center(i, j));
      const double d[4] = {p.y, 1 - p.x, 1 - p.y, p.x};
      const Point3 from[4] = {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
      const int side = static_cast<int>(std::min_element(d, d + 4) - d);
      EXPECT_EQ(map.at(i, j), find_half_edge(m, f, from[side], from[(side + 1) % 4]));
    }
  }
  check_voronoi_brute_force(m, f, cfg);
}

TEST(Vhp, RectangleAndHoleBruteForce) {
  SamplingConfig cfg;
  cfg.uv_grid_resolution = 48;
  const BrepModel rect = make_box({0, 0, 0}, {2, 1, 1});
  for (FaceId f = 0; f < static_cast<FaceId>(rect.faces.size()); ++f) check_voronoi_brute_force(rect, f, cfg);
  const BrepModel hole = make_box_with_hole({0, 0, 0}, {1, 1, 1}, 0.3, 0.3);
  for (FaceId f = 0; f < static_cast<FaceId>(hole.faces.size()); ++f) check_voronoi_brute_force(hole, f, cfg);
  // band around the hole: the inner half-edges own some cells, and the hole itself is unlabeled
  const FaceId top = find_face(hole, [](Point3 p) { return p.z == 1.0; });
  const VoronoiCellMap map = voronoi_assign(hole, top, cfg);
  const auto& inner = hole.loops[hole.faces[top].inner.at(0)].half_edges;
  int inner_cells = 0, unlabeled = 0;
  for (HalfEdgeId h : map.labels) {
    if (h == kNoId) ++unlabeled;
    if (std::find(inner.begin(), inner.end(), h) != inner.end()) ++inner_cells;
  }
  EXPECT_GT(inner_cells, 0);
  EXPECT_GT(unlabeled, 0);
}

TEST(Vhp, SquareBottomEdgePatch) {
  const BrepModel m = make_box({0, 0, 0}, {1, 1, 1});
  const FaceId f = find_face(m, [](Point3 p) { return p.z == 1.0; });
  const HalfEdgeId h = find_half_edge(m, f, {0, 0, 1}, {1, 0, 1});
  ASSERT_NE(h, kNoId);
  SamplingConfig cfg;
  const FacePartition part(m, f, cfg);
  const HalfPatch p = sample_half_patch(m, part, h, cfg);
  ASSERT_EQ(p.samples.size(), 24u);
  for (int r = 0; r < 6; ++r) {
    const double x = (r + 1) / 7.0;
    // walk ends on the diagonal cell boundary: depth min(x, 1 - x)
    const double depth = std::min(x, 1 - x);
    for (int c = 0; c < 4; ++c) {
      EXPECT_NEAR(p.at(r, c).x, x, 1e-12);
      EXPECT_NEAR(p.at(r, c).y, depth * c / 3.0, 1e-9);
      EXPECT_EQ(p.at(r, c).z, 1.0);
    }
  }
}

TEST(Vhp, CylinderPatchClimbsIsoparametric) {
  const BrepModel m = make_cylinder({0, 0, 0}, 0.5, 1.0);
  SamplingConfig cfg;
  const FacePartition part(m, 0, cfg);
  const HalfEdgeId bottom = m.loops[m.faces[0].outer].half_edges[0];
  ASSERT_TRUE(std::holds_alternative<CircularArc>(m.edges[m.half_edges[bottom].edge].curve));
  const HalfPatch p = sample_half_patch(m, part, bottom, cfg);
  for (int r = 0; r < cfg.curve_samples; ++r) {
    const double angle = std::atan2(p.at(r, 0).y, p.at(r, 0).x);
    EXPECT_NEAR(p.at(r, 0).z, 0.0, 1e-15);
    for (int c = 1; c < cfg.surface_samples; ++c) {
      EXPECT_NEAR(std::atan2(p.at(r, c).y, p.at(r, c).x), angle, 1e-9);
      EXPECT_NEAR(std::hypot(p.at(r, c).x, p.at(r, c).y), 0.5, 1e-12);
      EXPECT_GT(p.at(r, c).z, p.at(r, c - 1).z);
    }
  }
}

TEST(Vhp, ThinFaceCollapsesOntoCurve) {
  const BrepModel m = make_box({0, 0, 0}, {1, 1, 2e-7});
  const VhpExtraction x = extract_vhp(m);
  for (const VhpRecord& r : x.records) {
    // side faces have depth at most half their 2e-7 height
    const bool thin_face = std::abs(unit_normal(m.faces[m.face_of(r.half_edge)].surface, {0, 0}).z) < 0.5;
    if (!thin_face) continue;
    for (int row = 0; row < r.patch.rows; ++row) {
      for (int c = 1; c < r.patch.cols; ++c) EXPECT_LE(distance(r.patch.at(row, c), r.patch.at(row, 0)), 1e-6);
    }
  }
}

TEST(Vhp, NextPointerSamples) {
  const BrepModel m = make_box({0, 0, 0}, {1, 1, 1});
  const FaceId f = find_face(m, [](Point3 p) { return p.z == 1.0; });
  const HalfEdgeId h = find_half_edge(m, f, {0, 0, 1}, {1, 0, 1});
  const auto nx = sample_next_pointers(m, h, SamplingConfig{});
  ASSERT_EQ(nx.size(), 4u);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_EQ(nx[k - 1].x, 1.0);
    EXPECT_NEAR(nx[k - 1].y, k / 7.0, 1e-15);
  }
  // two-half-edge cap loop: successor samples start at the shared vertex
  const BrepModel cyl = make_cylinder({0, 0, 0}, 0.5, 1.0);
  const FaceId cap = 2;
  ASSERT_EQ(cyl.loops[cyl.faces[cap].outer].half_edges.size(), 2u);
  for (HalfEdgeId g : cyl.loops[cyl.faces[cap].outer].half_edges) {
    const auto s = sample_next_pointers(cyl, g, SamplingConfig{});
    const Point3 shared = cyl.vertices[cyl.destination(g)];
    for (std::size_t k = 1; k < s.size(); ++k) EXPECT_LT(distance(s[k - 1], shared), distance(s[k], shared));
  }
}

TEST(Vhp, ExtractCounts) {
  const SamplingConfig cfg;
  EXPECT_EQ(cfg.descriptor_length(), 85);
  const VhpExtraction cube = extract_vhp(make_box({0, 0, 0}, {1, 1, 1}), cfg);
  ASSERT_EQ(cube.records.size(), 24u);
  for (const VhpRecord& r : cube.records) {
    EXPECT_EQ(r.label, 1);
    EXPECT_EQ(flatten(r).size(), 85u);
  }
  const VhpExtraction hole = extract_vhp(make_box_with_hole({0, 0, 0}, {1, 1, 1}, 0.3, 0.3), cfg);
  ASSERT_EQ(hole.records.size(), 48u);
  // labels follow the owning loop: the two 4-edge rings on the caps; their twins run along the hole walls' outer loops
  EXPECT_EQ(std::count_if(hole.records.begin(), hole.records.end(), [](const VhpRecord& r) { return r.label == 0; }), 8);
}

TEST(Vhp, RecordInvariants) {
  const SamplingConfig cfg;
  CorpusSpec spec;
  spec.counts = {2, 2, 2, 2, 2};
  spec.components_max = 2;
  spec.seed = 5;
  auto models = synth_corpus(spec);
  std::vector<BrepModel> extra = {make_cylinder({0, 0, 0}, 0.5, 1.0)};
  for (const auto& cm : models) extra.push_back(cm.model);
  for (const BrepModel& m : extra) {
    const VhpExtraction x = extract_vhp(m, cfg);
    ASSERT_EQ(x.records.size(), 2 * m.edges.size());
    for (HalfEdgeId h = 0; h < static_cast<HalfEdgeId>(x.records.size()); ++h) {
      const VhpRecord& r = x.records[h];
      const SurfaceGeom& s = m.faces[m.face_of(h)].surface;
      for (const Point3& p : r.patch.samples) EXPECT_LE(distance(p, evaluate(s, inverse_evaluate(s, p))), 1e-6);
      // column 0 is the exact curve sample
      const auto on_curve = sample_half_edge(m, h, cfg.curve_samples);
      for (int row = 0; row < cfg.curve_samples; ++row) EXPECT_EQ(r.patch.at(row, 0), on_curve[row]);
      // twin rows reversed
      const VhpRecord& t = x.records[m.half_edges[h].twin];
      for (int row = 0; row < cfg.curve_samples; ++row) EXPECT_EQ(r.patch.at(row, 0), t.patch.at(cfg.curve_samples - 1 - row, 0));
      // next samples are a prefix of the successor's samples
      const auto succ = sample_half_edge(m, m.next(h), cfg.curve_samples);
      for (int k = 0; k < cfg.next_samples; ++k) EXPECT_EQ(r.next_samples[k], succ[k]);
    }
  }
}

TEST(Vhp, RejectsBadConfig) {
  SamplingConfig cfg;
  cfg.next_samples = 7;
  EXPECT_THROW(extract_vhp(make_box({0, 0, 0}, {1, 1, 1}), cfg), Error);
}
