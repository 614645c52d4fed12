#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "brepseq/curve.hpp"
#include "brepseq/geometry.hpp"
#include "brepseq/surface.hpp"

namespace brepseq {

// Element ids are dense indices into the model's tables.
using VertexId = int;
using EdgeId = int;
using HalfEdgeId = int;
using LoopId = int;
using FaceId = int;

inline constexpr int kNoId = -1;

struct Edge {
  CurveGeom curve;
  VertexId start = kNoId;
  VertexId end = kNoId;
  /// [0] runs along the curve (start -> end), [1] against it.
  std::array<HalfEdgeId, 2> half_edges{kNoId, kNoId};
};

struct HalfEdge {
  VertexId origin = kNoId;
  HalfEdgeId twin = kNoId;
  LoopId loop = kNoId;
  EdgeId edge = kNoId;
  bool forward = true;
};

enum class LoopKind { kOuter, kInner };

struct Loop {
  std::vector<HalfEdgeId> half_edges;
  LoopKind kind = LoopKind::kOuter;
  FaceId face = kNoId;
};

struct Face {
  SurfaceGeom surface;
  LoopId outer = kNoId;
  std::vector<LoopId> inner;
};

/// Half-edge solid model. Immutable once built; all operations take it by const reference.
struct BrepModel {
  std::vector<Point3> vertices;
  std::vector<Edge> edges;
  std::vector<HalfEdge> half_edges;
  std::vector<Loop> loops;
  std::vector<Face> faces;
  /// Face ids grouped per closed shell.
  std::vector<std::vector<FaceId>> shells;

  VertexId destination(HalfEdgeId h) const {
    const HalfEdge& he = half_edges.at(h);
    const Edge& e = edges.at(he.edge);
    return he.forward ? e.end : e.start;
  }

  /// Successor within the owning loop, derived from the loop's ordered cycle.
  HalfEdgeId next(HalfEdgeId h) const {
    const Loop& l = loops.at(half_edges.at(h).loop);
    const auto it = std::find(l.half_edges.begin(), l.half_edges.end(), h);
    if (it == l.half_edges.end()) return kNoId;
    const auto pos = static_cast<std::size_t>(it - l.half_edges.begin());
    return l.half_edges[(pos + 1) % l.half_edges.size()];
  }

  /// Full next map for all half-edges (kNoId where the loop tables are inconsistent).
  std::vector<HalfEdgeId> next_map() const {
    std::vector<HalfEdgeId> out(half_edges.size(), kNoId);
    for (const Loop& l : loops) {
      for (std::size_t k = 0; k < l.half_edges.size(); ++k) {
        const HalfEdgeId h = l.half_edges[k];
        if (h >= 0 && h < static_cast<int>(out.size())) out[h] = l.half_edges[(k + 1) % l.half_edges.size()];
      }
    }
    return out;
  }

  FaceId face_of(HalfEdgeId h) const { return loops.at(half_edges.at(h).loop).face; }

  std::size_t inner_loop_count() const {
    return static_cast<std::size_t>(std::count_if(loops.begin(), loops.end(),
                                                  [](const Loop& l) { return l.kind == LoopKind::kInner; }));
  }
};

namespace detail {

struct DisjointSets {
  std::vector<int> parent;
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

}  // namespace detail

/// Faces grouped by twin adjacency. Skips dangling references.
inline std::vector<std::vector<FaceId>> face_shells(const BrepModel& m) {
  detail::DisjointSets sets(m.faces.size());
  const int nh = static_cast<int>(m.half_edges.size());
  auto face_of = [&](HalfEdgeId h) -> FaceId {
    if (h < 0 || h >= nh) return kNoId;
    const LoopId l = m.half_edges[h].loop;
    if (l < 0 || l >= static_cast<int>(m.loops.size())) return kNoId;
    const FaceId f = m.loops[l].face;
    return (f >= 0 && f < static_cast<int>(m.faces.size())) ? f : kNoId;
  };
  for (HalfEdgeId h = 0; h < nh; ++h) {
    const FaceId a = face_of(h);
    const FaceId b = face_of(m.half_edges[h].twin);
    if (a != kNoId && b != kNoId) sets.unite(a, b);
  }
  std::map<int, std::vector<FaceId>> groups;
  for (FaceId f = 0; f < static_cast<int>(m.faces.size()); ++f) groups[sets.find(f)].push_back(f);
  std::vector<std::vector<FaceId>> out;
  for (auto& [root, faces] : groups) out.push_back(std::move(faces));
  return out;
}

/// Assembles a BrepModel from vertices, edges and face loops given as oriented edge uses.
class BrepBuilder {
 public:
  struct EdgeUse {
    EdgeId edge;
    bool forward;
  };

  VertexId add_vertex(Point3 p) {
    vertices_.push_back(p);
    return static_cast<VertexId>(vertices_.size() - 1);
  }

  /// Adds an edge whose curve runs from `a` to `b`; endpoints must match within tolerance.
  EdgeId add_edge(VertexId a, VertexId b, CurveGeom curve) {
    check_vertex(a);
    check_vertex(b);
    if (distance(start_point(curve), vertices_[a]) > kEndpointTolerance ||
        distance(end_point(curve), vertices_[b]) > kEndpointTolerance) {
      throw Error(ErrorKind::kInvalidGeometry, "edge curve endpoints do not match its vertices");
    }
    edges_.push_back(Edge{std::move(curve), a, b, {kNoId, kNoId}});
    return static_cast<EdgeId>(edges_.size() - 1);
  }

  /// Straight edge between a and b, created on first request and shared afterwards.
  EdgeId line(VertexId a, VertexId b) {
    const auto key = std::minmax(a, b);
    if (auto it = lines_.find(key); it != lines_.end()) return it->second;
    const EdgeId e = add_edge(a, b, LineSegment{vertices_.at(a), vertices_.at(b)});
    lines_.emplace(key, e);
    return e;
  }

  /// Edge uses for a closed vertex cycle made of straight edges.
  std::vector<EdgeUse> polygon_uses(const std::vector<VertexId>& cycle) {
    std::vector<EdgeUse> uses;
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const VertexId a = cycle[i];
      const VertexId b = cycle[(i + 1) % cycle.size()];
      const EdgeId e = line(a, b);
      uses.push_back({e, edges_[e].start == a});
    }
    return uses;
  }

  FaceId add_face(SurfaceGeom surface, std::vector<EdgeUse> outer, std::vector<std::vector<EdgeUse>> inners = {}) {
    PendingFace f{std::move(surface), std::move(outer), std::move(inners)};
    faces_.push_back(std::move(f));
    return static_cast<FaceId>(faces_.size() - 1);
  }

  /// Planar polygonal face; the outer cycle is counter-clockwise seen from outside the solid.
  FaceId add_planar_face(const std::vector<VertexId>& outer, const std::vector<std::vector<VertexId>>& holes = {}) {
    const Vec3 n = newell_normal(outer);
    const Point3 o = vertices_.at(outer[0]);
    const Vec3 u = normalized(vertices_.at(outer[1]) - o);
    const Vec3 v = cross(n, u);
    SurfaceGeom s{Plane{o, u, v}, {}, false};
    std::vector<std::vector<EdgeUse>> inner_uses;
    for (const auto& h : holes) inner_uses.push_back(polygon_uses(h));
    return add_face(std::move(s), polygon_uses(outer), std::move(inner_uses));
  }

  const std::vector<Point3>& vertices() const { return vertices_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }

  /// Creates half-edges and loops. Planar faces get their domain from the boundary extent.
  BrepModel build() const {
    BrepModel m;
    m.vertices = vertices_;
    m.edges = edges_;
    m.half_edges.reserve(edges_.size() * 2);
    for (EdgeId e = 0; e < static_cast<EdgeId>(edges_.size()); ++e) {
      const auto hf = static_cast<HalfEdgeId>(m.half_edges.size());
      m.half_edges.push_back(HalfEdge{edges_[e].start, hf + 1, kNoId, e, true});
      m.half_edges.push_back(HalfEdge{edges_[e].end, hf, kNoId, e, false});
      m.edges[e].half_edges = {hf, hf + 1};
    }
    auto make_loop = [&](const std::vector<EdgeUse>& uses, LoopKind kind, FaceId f) {
      const auto lid = static_cast<LoopId>(m.loops.size());
      Loop loop;
      loop.kind = kind;
      loop.face = f;
      for (const EdgeUse& u : uses) {
        const HalfEdgeId h = m.edges.at(u.edge).half_edges[u.forward ? 0 : 1];
        if (m.half_edges[h].loop != kNoId) {
          throw Error(ErrorKind::kInvalidGeometry, "half-edge of edge " + std::to_string(u.edge) + " used twice");
        }
        m.half_edges[h].loop = lid;
        loop.half_edges.push_back(h);
      }
      for (std::size_t k = 0; k < loop.half_edges.size(); ++k) {
        const HalfEdgeId h = loop.half_edges[k];
        const HalfEdgeId nx = loop.half_edges[(k + 1) % loop.half_edges.size()];
        if (m.destination(h) != m.half_edges[nx].origin) {
          throw Error(ErrorKind::kInvalidGeometry, "loop is not a closed half-edge cycle");
        }
      }
      m.loops.push_back(std::move(loop));
      return lid;
    };
    for (FaceId f = 0; f < static_cast<FaceId>(faces_.size()); ++f) {
      const PendingFace& pf = faces_[f];
      Face face;
      face.surface = pf.surface;
      face.outer = make_loop(pf.outer, LoopKind::kOuter, f);
      for (const auto& in : pf.inners) face.inner.push_back(make_loop(in, LoopKind::kInner, f));
      m.faces.push_back(std::move(face));
    }
    for (HalfEdgeId h = 0; h < static_cast<HalfEdgeId>(m.half_edges.size()); ++h) {
      if (m.half_edges[h].loop == kNoId) {
        throw Error(ErrorKind::kInvalidGeometry, "edge " + std::to_string(m.half_edges[h].edge) + " is not closed by two faces");
      }
    }
    for (Face& face : m.faces) {
      if (std::holds_alternative<Plane>(face.surface.shape)) face.surface.domain = boundary_domain(m, face);
    }
    m.shells = face_shells(m);
    return m;
  }

  /// Bounding rectangle of a face's boundary in its own parameter space.
  static ParamDomain boundary_domain(const BrepModel& m, const Face& face) {
    ParamDomain d{INFINITY, -INFINITY, INFINITY, -INFINITY};
    auto visit_loop = [&](LoopId l) {
      for (HalfEdgeId h : m.loops[l].half_edges) {
        const CurveGeom& c = m.edges[m.half_edges[h].edge].curve;
        for (int i = 0; i <= 64; ++i) {
          const Vec2 uv = inverse_evaluate(face.surface, evaluate(c, i / 64.0));
          d.u0 = std::min(d.u0, uv.u);
          d.u1 = std::max(d.u1, uv.u);
          d.v0 = std::min(d.v0, uv.v);
          d.v1 = std::max(d.v1, uv.v);
        }
      }
    };
    visit_loop(face.outer);
    for (LoopId l : face.inner) visit_loop(l);
    return d;
  }

 private:
  static constexpr double kEndpointTolerance = 1e-9;

  struct PendingFace {
    SurfaceGeom surface;
    std::vector<EdgeUse> outer;
    std::vector<std::vector<EdgeUse>> inners;
  };

  void check_vertex(VertexId v) const {
    if (v < 0 || v >= static_cast<VertexId>(vertices_.size())) throw Error(ErrorKind::kPrecondition, "unknown vertex id");
  }

  Vec3 newell_normal(const std::vector<VertexId>& cycle) const {
    Vec3 n{};
    for (std::size_t i = 0; i < cycle.size(); ++i) {
      const Point3 a = vertices_.at(cycle[i]);
      const Point3 b = vertices_.at(cycle[(i + 1) % cycle.size()]);
      n.x += (a.y - b.y) * (a.z + b.z);
      n.y += (a.z - b.z) * (a.x + b.x);
      n.z += (a.x - b.x) * (a.y + b.y);
    }
    return normalized(n);
  }

  std::vector<Point3> vertices_;
  std::vector<Edge> edges_;
  std::vector<PendingFace> faces_;
  std::map<std::pair<VertexId, VertexId>, EdgeId> lines_;
};

}  // namespace brepseq
