#pragma once

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

#include "brepseq/brep.hpp"

namespace brepseq {

/// Parameter of the i-th of n interior samples, i in 1..n.
inline double interior_parameter(int i, int n) { return static_cast<double>(i) / static_cast<double>(n + 1); }

/// Samples an edge's curve. Interior samples sit at k/(n+1), k = 1..n; with endpoints at k/(n-1), k = 0..n-1.
inline std::vector<Point3> sample_curve(const BrepModel& m, EdgeId edge, int n, bool include_endpoints) {
  if (n < 1) throw Error(ErrorKind::kPrecondition, "sample count must be at least 1");
  const Edge& e = m.edges.at(edge);
  if (approximate_length(e.curve, 64) <= kStructuralTolerance) {
    throw Error(ErrorKind::kInvalidGeometry, "degenerate zero-length curve on edge " + std::to_string(edge));
  }
  std::vector<Point3> out;
  out.reserve(n);
  if (include_endpoints) {
    if (n == 1) return {evaluate(e.curve, 0.0)};
    for (int k = 0; k < n; ++k) out.push_back(evaluate(e.curve, static_cast<double>(k) / (n - 1)));
  } else {
    for (int k = 1; k <= n; ++k) out.push_back(evaluate(e.curve, interior_parameter(k, n)));
  }
  return out;
}

/// Interior samples of a half-edge ordered along its direction. Reverse half-edges reuse the exact
/// forward parameters in reverse order, so twins see bit-identical points.
inline std::vector<Point3> sample_half_edge(const BrepModel& m, HalfEdgeId h, int n) {
  const HalfEdge& he = m.half_edges.at(h);
  const CurveGeom& c = m.edges.at(he.edge).curve;
  std::vector<Point3> out;
  out.reserve(n);
  for (int k = 1; k <= n; ++k) out.push_back(evaluate(c, interior_parameter(he.forward ? k : n + 1 - k, n)));
  return out;
}

struct SurfaceSample {
  Point3 point;
  Vec3 normal;
};

/// Point and outward unit normal of a face's surface at (u, v).
inline SurfaceSample eval_surface(const BrepModel& m, FaceId face, double u, double v) {
  const SurfaceGeom& s = m.faces.at(face).surface;
  if (!s.domain.contains({u, v}, 1e-9)) throw Error(ErrorKind::kRange, "parameters outside the face domain");
  return {evaluate(s, {u, v}), unit_normal(s, {u, v})};
}

struct BoundingBox {
  Point3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity()};
  Point3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            -std::numeric_limits<double>::infinity()};

  void extend(Point3 p) {
    for (int a = 0; a < 3; ++a) {
      lo[a] = std::min(lo[a], p[a]);
      hi[a] = std::max(hi[a], p[a]);
    }
  }
  double extent(int axis) const { return hi[axis] - lo[axis]; }
};

/// Bounding box of vertices and densely sampled edge curves.
inline BoundingBox bounding_box(const BrepModel& m) {
  BoundingBox box;
  for (const Point3& p : m.vertices) box.extend(p);
  for (const Edge& e : m.edges) {
    for (int i = 1; i < 64; ++i) box.extend(evaluate(e.curve, i / 64.0));
  }
  return box;
}

/// Margin that keeps normalized coordinates strictly below 1.
inline constexpr double kNormalizeMargin = 1.0 / 256.0;

inline BrepModel apply_similarity(const BrepModel& m, const Similarity& t) {
  BrepModel out = m;
  for (Point3& p : out.vertices) p = t.apply(p);
  for (Edge& e : out.edges) e.curve = transformed(e.curve, t);
  for (Face& f : out.faces) f.surface = transformed(f.surface, t);
  return out;
}

/// Maps the longest bounding-box side onto [0, 1 - 1/256]; the other axes are centered on 0.5.
inline std::pair<BrepModel, Similarity> normalize(const BrepModel& m) {
  if (m.vertices.empty()) throw Error(ErrorKind::kInvalidGeometry, "cannot normalize an empty model");
  const BoundingBox box = bounding_box(m);
  const double longest = std::max({box.extent(0), box.extent(1), box.extent(2)});
  if (!(longest > 0.0) || !std::isfinite(longest)) {
    throw Error(ErrorKind::kInvalidGeometry, "model has a zero-extent bounding box");
  }
  Similarity t;
  t.scale = (1.0 - kNormalizeMargin) / longest;
  for (int a = 0; a < 3; ++a) {
    if (box.extent(a) >= longest * (1.0 - 1e-12)) {
      t.offset[a] = -box.lo[a] * t.scale;
    } else {
      t.offset[a] = 0.5 - 0.5 * (box.lo[a] + box.hi[a]) * t.scale;
    }
  }
  return {apply_similarity(m, t), t};
}

}  // namespace brepseq
