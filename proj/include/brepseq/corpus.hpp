#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <cmath>
#include <string>
#include <vector>

#include "brepseq/brep.hpp"
#include "brepseq/brep_ops.hpp"
#include "brepseq/util.hpp"
#include "brepseq/validate.hpp"

namespace brepseq {

/// Extrusion of a counter-clockwise polygon (seen from +z) between z0 and z1, with optional
/// counter-clockwise through-holes.
inline BrepModel make_prism(const std::vector<Vec2>& polygon, double z0, double z1, const std::vector<std::vector<Vec2>>& holes = {}) {
  if (polygon.size() < 3 || !(z1 > z0)) throw Error(ErrorKind::kInvalidGeometry, "prism needs a polygon of >= 3 points and positive height");
  BrepBuilder b;
  struct Ring {
    std::vector<VertexId> bottom, top;
  };
  auto add_ring = [&](const std::vector<Vec2>& pts) {
    Ring r;
    for (const Vec2& p : pts) r.bottom.push_back(b.add_vertex({p.u, p.v, z0}));
    for (const Vec2& p : pts) r.top.push_back(b.add_vertex({p.u, p.v, z1}));
    return r;
  };
  auto walls = [&](const Ring& r) {
    const std::size_t n = r.bottom.size();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      b.add_planar_face({r.bottom[i], r.bottom[j], r.top[j], r.top[i]});
    }
  };
  const Ring outer = add_ring(polygon);
  std::vector<Ring> inner;
  for (const auto& h : holes) {
    // Holes are walked clockwise so their walls face into the hole.
    std::vector<Vec2> cw(h.rbegin(), h.rend());
    inner.push_back(add_ring(cw));
  }
  std::vector<VertexId> bottom(outer.bottom.rbegin(), outer.bottom.rend());
  std::vector<std::vector<VertexId>> bottom_holes, top_holes;
  for (const Ring& r : inner) {
    bottom_holes.emplace_back(r.bottom.rbegin(), r.bottom.rend());
    top_holes.push_back(r.top);
  }
  b.add_planar_face(bottom, bottom_holes);
  b.add_planar_face(outer.top, top_holes);
  walls(outer);
  for (const Ring& r : inner) walls(r);
  return b.build();
}

inline BrepModel make_box(Point3 lo, Point3 hi) {
  return make_prism({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}, lo.z, hi.z);
}

inline std::vector<Vec2> regular_polygon(Vec2 center, double radius, int n, double rotation = 0.0) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double a = rotation + 2.0 * kPi * i / n;
    pts.push_back({center.u + radius * std::cos(a), center.v + radius * std::sin(a)});
  }
  return pts;
}

inline BrepModel make_ngon_prism(Point3 base, double radius, int n, double height, double rotation = 0.0) {
  if (n < 3) throw Error(ErrorKind::kInvalidGeometry, "n-gon prism needs n >= 3");
  return make_prism(regular_polygon({base.x, base.y}, radius, n, rotation), base.z, base.z + height);
}

/// L-shaped extrusion: a w x d footprint with a (w - tw) x (d - td) notch removed at the far corner.
inline BrepModel make_l_bracket(Point3 lo, double w, double d, double h, double tw, double td) {
  if (!(tw > 0 && tw < w && td > 0 && td < d && h > 0)) throw Error(ErrorKind::kInvalidGeometry, "L-bracket thickness must lie inside the footprint");
  const double x = lo.x, y = lo.y;
  return make_prism({{x, y}, {x + w, y}, {x + w, y + td}, {x + tw, y + td}, {x + tw, y + d}, {x, y + d}}, lo.z, lo.z + h);
}

/// Box with a rectangular hole through z; `inset` is the wall thickness on each side.
inline BrepModel make_box_with_hole(Point3 lo, Point3 hi, double inset_x, double inset_y) {
  if (!(2 * inset_x < hi.x - lo.x && 2 * inset_y < hi.y - lo.y && inset_x > 0 && inset_y > 0)) {
    throw Error(ErrorKind::kInvalidGeometry, "hole does not fit inside the box");
  }
  const double x0 = lo.x + inset_x, x1 = hi.x - inset_x, y0 = lo.y + inset_y, y1 = hi.y - inset_y;
  return make_prism({{lo.x, lo.y}, {hi.x, lo.y}, {hi.x, hi.y}, {lo.x, hi.y}}, lo.z, hi.z, {{{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}});
}

/// Cylinder along +z cut by two seams (angles 0 and pi) into two half-cylinder faces.
inline BrepModel make_cylinder(Point3 base, double radius, double height) {
  if (!(radius > 0 && height > 0)) throw Error(ErrorKind::kInvalidGeometry, "cylinder needs positive radius and height");
  BrepBuilder b;
  const Vec3 x{1, 0, 0}, y{0, 1, 0}, z{0, 0, 1};
  const Point3 top = base + z * height;
  const VertexId b0 = b.add_vertex(base + x * radius), bp = b.add_vertex(base - x * radius);
  const VertexId t0 = b.add_vertex(top + x * radius), tp = b.add_vertex(top - x * radius);
  const EdgeId bottom_front = b.add_edge(b0, bp, CircularArc{base, radius, x, y, kPi});
  const EdgeId bottom_back = b.add_edge(bp, b0, CircularArc{base, radius, -x, -y, kPi});
  const EdgeId top_front = b.add_edge(t0, tp, CircularArc{top, radius, x, y, kPi});
  const EdgeId top_back = b.add_edge(tp, t0, CircularArc{top, radius, -x, -y, kPi});
  const EdgeId seam0 = b.line(b0, t0), seam_pi = b.line(bp, tp);
  const CylinderPatch lateral{base, z, x, radius};
  b.add_face(SurfaceGeom{lateral, {0, kPi, 0, height}, false},
             {{bottom_front, true}, {seam_pi, true}, {top_front, false}, {seam0, false}});
  b.add_face(SurfaceGeom{lateral, {kPi, 2 * kPi, 0, height}, false},
             {{bottom_back, true}, {seam0, true}, {top_back, false}, {seam_pi, false}});
  b.add_face(SurfaceGeom{Plane{base, x, -y}, {}, false}, {{bottom_front, false}, {bottom_back, false}});
  b.add_face(SurfaceGeom{Plane{top, x, y}, {}, false}, {{top_front, true}, {top_back, true}});
  return b.build();
}

/// Disjoint union; ids of later parts are shifted.
inline BrepModel merge_models(const std::vector<BrepModel>& parts) {
  BrepModel m;
  for (const BrepModel& p : parts) {
    const int vo = static_cast<int>(m.vertices.size()), eo = static_cast<int>(m.edges.size());
    const int ho = static_cast<int>(m.half_edges.size()), lo = static_cast<int>(m.loops.size());
    const int fo = static_cast<int>(m.faces.size());
    auto shift = [](int id, int o) { return id == kNoId ? kNoId : id + o; };
    m.vertices.insert(m.vertices.end(), p.vertices.begin(), p.vertices.end());
    for (Edge e : p.edges) {
      e.start += vo;
      e.end += vo;
      for (auto& h : e.half_edges) h = shift(h, ho);
      m.edges.push_back(std::move(e));
    }
    for (HalfEdge h : p.half_edges) {
      h.origin = shift(h.origin, vo);
      h.twin = shift(h.twin, ho);
      h.loop = shift(h.loop, lo);
      h.edge = shift(h.edge, eo);
      m.half_edges.push_back(h);
    }
    for (Loop l : p.loops) {
      for (auto& h : l.half_edges) h = shift(h, ho);
      l.face = shift(l.face, fo);
      m.loops.push_back(std::move(l));
    }
    for (Face f : p.faces) {
      f.outer = shift(f.outer, lo);
      for (auto& l : f.inner) l = shift(l, lo);
      m.faces.push_back(std::move(f));
    }
  }
  m.shells = face_shells(m);
  return m;
}

enum class PrimitiveFamily { kBox, kPrism, kCylinder, kBoxWithHole, kLBracket };

inline constexpr std::array<PrimitiveFamily, 5> kAllFamilies = {PrimitiveFamily::kBox, PrimitiveFamily::kPrism, PrimitiveFamily::kCylinder,
                                                                PrimitiveFamily::kBoxWithHole, PrimitiveFamily::kLBracket};

inline const char* family_name(PrimitiveFamily f) {
  switch (f) {
    case PrimitiveFamily::kBox: return "box";
    case PrimitiveFamily::kPrism: return "prism";
    case PrimitiveFamily::kCylinder: return "cylinder";
    case PrimitiveFamily::kBoxWithHole: return "box_with_hole";
    case PrimitiveFamily::kLBracket: return "l_bracket";
  }
  return "?";
}

inline PrimitiveFamily family_from_name(const std::string& s) {
  for (PrimitiveFamily f : kAllFamilies) {
    if (s == family_name(f)) return f;
  }
  throw Error(ErrorKind::kFormat, "unknown primitive family '" + s + "'");
}

struct CorpusSpec {
  /// Models per family; a model's first component is of its family, the rest are drawn from
  /// families with a nonzero count.
  std::array<int, 5> counts{10, 10, 10, 10, 10};
  double size_min = 0.6;
  double size_max = 2.0;
  int prism_sides_min = 3;
  int prism_sides_max = 8;
  int components_min = 1;
  int components_max = 5;
  /// Minimum gap between component bounding boxes, model units.
  double gap = 0.15;
  int placement_retries = 200;
  std::uint64_t seed = 0;

  int total() const {
    int n = 0;
    for (int c : counts) n += c;
    return n;
  }
  void check() const {
    for (int c : counts) {
      if (c < 0) throw Error(ErrorKind::kPrecondition, "family counts must be non-negative");
    }
    if (!(size_min > 0 && size_max >= size_min)) throw Error(ErrorKind::kPrecondition, "size range must be positive");
    if (prism_sides_min < 3 || prism_sides_max < prism_sides_min) throw Error(ErrorKind::kPrecondition, "prism sides must satisfy 3 <= min <= max");
    if (components_min < 1 || components_max < components_min) throw Error(ErrorKind::kPrecondition, "component range must satisfy 1 <= min <= max");
    if (!(gap > 0) || placement_retries < 1) throw Error(ErrorKind::kPrecondition, "gap and retries must be positive");
  }
};

/// One primitive at the origin corner of its own bounding box.
inline BrepModel random_primitive(PrimitiveFamily f, const CorpusSpec& spec, Rng& rng) {
  auto size = [&] { return rng.uniform(spec.size_min, spec.size_max); };
  switch (f) {
    case PrimitiveFamily::kBox:
      return make_box({0, 0, 0}, {size(), size(), size()});
    case PrimitiveFamily::kPrism: {
      const int n = rng.integer(spec.prism_sides_min, spec.prism_sides_max);
      const double r = 0.5 * size();
      return make_ngon_prism({0, 0, 0}, r, n, size(), rng.uniform(0.0, 2.0 * kPi / n));
    }
    case PrimitiveFamily::kCylinder:
      return make_cylinder({0, 0, 0}, 0.5 * size(), size());
    case PrimitiveFamily::kBoxWithHole: {
      const double w = size(), d = size();
      return make_box_with_hole({0, 0, 0}, {w, d, size()}, w * rng.uniform(0.2, 0.35), d * rng.uniform(0.2, 0.35));
    }
    case PrimitiveFamily::kLBracket: {
      const double w = size(), d = size();
      return make_l_bracket({0, 0, 0}, w, d, size(), w * rng.uniform(0.3, 0.6), d * rng.uniform(0.3, 0.6));
    }
  }
  throw Error(ErrorKind::kPrecondition, "unknown family");
}

namespace detail {

inline bool boxes_overlap(const BoundingBox& a, const BoundingBox& b, double gap) {
  for (int k = 0; k < 3; ++k) {
    if (a.hi[k] + gap <= b.lo[k] || b.hi[k] + gap <= a.lo[k]) return false;
  }
  return true;
}

}  // namespace detail

/// Places parts at random positions with pairwise disjoint (gapped) bounding boxes.
inline BrepModel place_components(std::vector<BrepModel> parts, double gap, int retries, Rng& rng) {
  double extent = 0.0;
  for (const BrepModel& p : parts) {
    const BoundingBox bb = bounding_box(p);
    extent += std::max({bb.hi.x - bb.lo.x, bb.hi.y - bb.lo.y, bb.hi.z - bb.lo.z}) + gap;
  }
  const double world = extent;
  std::vector<BoundingBox> placed;
  for (BrepModel& p : parts) {
    const BoundingBox bb = bounding_box(p);
    bool ok = false;
    for (int attempt = 0; attempt < retries && !ok; ++attempt) {
      const Vec3 shift{rng.uniform(0, world) - bb.lo.x, rng.uniform(0, world) - bb.lo.y, rng.uniform(0, world) - bb.lo.z};
      const BoundingBox moved{bb.lo + shift, bb.hi + shift};
      ok = std::none_of(placed.begin(), placed.end(), [&](const BoundingBox& o) { return detail::boxes_overlap(o, moved, gap); });
      if (ok) {
        p = apply_similarity(p, Similarity{1.0, shift});
        placed.push_back(moved);
      }
    }
    if (!ok) throw Error(ErrorKind::kInfeasible, "could not place component without overlap after " + std::to_string(retries) + " retries");
  }
  return merge_models(parts);
}

struct CorpusModel {
  std::string name;
  PrimitiveFamily family = PrimitiveFamily::kBox;
  int components = 1;
  BrepModel model;
  /// Normalization applied to the generated geometry.
  Similarity transform;
};

/// Deterministic per seed; models are normalized and validated watertight.
inline std::vector<CorpusModel> synth_corpus(const CorpusSpec& spec) {
  spec.check();
  std::vector<PrimitiveFamily> pool;
  for (std::size_t i = 0; i < kAllFamilies.size(); ++i) {
    if (spec.counts[i] > 0) pool.push_back(kAllFamilies[i]);
  }
  Rng rng(spec.seed);
  std::vector<CorpusModel> out;
  for (std::size_t fi = 0; fi < kAllFamilies.size(); ++fi) {
    for (int i = 0; i < spec.counts[fi]; ++i) {
      CorpusModel cm;
      cm.family = kAllFamilies[fi];
      cm.components = rng.integer(spec.components_min, spec.components_max);
      std::vector<BrepModel> parts;
      parts.push_back(random_primitive(cm.family, spec, rng));
      for (int c = 1; c < cm.components; ++c) parts.push_back(random_primitive(pool[rng.below(pool.size())], spec, rng));
      auto [normalized_model, t] = normalize(place_components(std::move(parts), spec.gap, spec.placement_retries, rng));
      cm.model = std::move(normalized_model);
      cm.transform = t;
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s_%04d", family_name(cm.family), i);
      cm.name = buf;
      const ValidationReport rep = validate(cm.model);
      if (!rep.watertight) throw Error(ErrorKind::kInvalidGeometry, "generated model " + cm.name + " is not watertight");
      out.push_back(std::move(cm));
    }
  }
  return out;
}

/// Multi-prism models with exactly `vertices` vertices split over a random number of components.
inline std::vector<BrepModel> pair_count_batch(int models, int vertices, int components_min, int components_max, std::uint64_t seed) {
  if (vertices % 2 != 0 || vertices < 6 * components_max) throw Error(ErrorKind::kPrecondition, "vertex budget must be even and fit 3-gon prisms");
  Rng rng(seed);
  std::vector<BrepModel> out;
  for (int i = 0; i < models; ++i) {
    const int k = rng.integer(components_min, components_max);
    // Split vertices/2 sides into k parts of at least 3.
    std::vector<int> sides(k, 3);
    for (int rest = vertices / 2 - 3 * k; rest > 0; --rest) ++sides[rng.below(k)];
    std::vector<BrepModel> parts;
    for (int n : sides) parts.push_back(make_ngon_prism({0, 0, 0}, rng.uniform(0.5, 1.0), n, rng.uniform(0.3, 1.0), rng.uniform(0, kPi)));
    out.push_back(normalize(place_components(std::move(parts), 0.1, 200, rng)).first);
  }
  return out;
}

}  // namespace brepseq
