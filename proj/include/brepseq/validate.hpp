#pragma once

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "brepseq/brep.hpp"

namespace brepseq {

enum class DefectKind {
  kDanglingReference,
  kTwinConsistency,
  kLoopClosure,
  kManifold,
  kFaceStructure,
  kGeometry,
  kIsolatedVertex,
  kEulerResidual,
};

inline const char* defect_kind_name(DefectKind k) {
  switch (k) {
    case DefectKind::kDanglingReference: return "dangling-reference";
    case DefectKind::kTwinConsistency: return "twin-consistency";
    case DefectKind::kLoopClosure: return "loop-closure";
    case DefectKind::kManifold: return "manifold";
    case DefectKind::kFaceStructure: return "face-structure";
    case DefectKind::kGeometry: return "geometry";
    case DefectKind::kIsolatedVertex: return "isolated-vertex";
    case DefectKind::kEulerResidual: return "euler-residual";
  }
  return "unknown";
}

struct Defect {
  DefectKind kind;
  /// Index of the offending element in the table named by `element`.
  int location = kNoId;
  std::string element;
  std::string message;
};

/// Per-shell Euler characteristics: V - E + F - H = 2(1 - G).
struct ShellEuler {
  int vertices = 0;
  int edges = 0;
  int faces = 0;
  int inner_loops = 0;
  /// Half-integral when the residual is odd; integral_genus is false then.
  double genus = 0.0;
  bool integral_genus = true;

  int residual() const { return vertices - edges + faces - inner_loops - 2 * (1 - static_cast<int>(std::lround(genus))); }
  friend bool operator==(const ShellEuler&, const ShellEuler&) = default;
};

struct ValidationReport {
  bool twin_consistent = true;
  bool loops_closed = true;
  bool manifold = true;
  bool watertight = true;
  std::vector<ShellEuler> shells;
  std::vector<Defect> defects;
};

namespace detail {

inline bool in_range(int id, std::size_t n) { return id >= 0 && id < static_cast<int>(n); }

inline ShellEuler shell_counts(const BrepModel& m, const std::vector<FaceId>& faces) {
  std::set<VertexId> verts;
  std::set<EdgeId> edges;
  ShellEuler s;
  s.faces = static_cast<int>(faces.size());
  for (FaceId f : faces) {
    const Face& face = m.faces[f];
    s.inner_loops += static_cast<int>(face.inner.size());
    auto add_loop = [&](LoopId l) {
      if (!in_range(l, m.loops.size())) return;
      for (HalfEdgeId h : m.loops[l].half_edges) {
        if (!in_range(h, m.half_edges.size())) continue;
        const HalfEdge& he = m.half_edges[h];
        if (in_range(he.origin, m.vertices.size())) verts.insert(he.origin);
        if (in_range(he.edge, m.edges.size())) edges.insert(he.edge);
      }
    };
    add_loop(face.outer);
    for (LoopId l : face.inner) add_loop(l);
  }
  s.vertices = static_cast<int>(verts.size());
  s.edges = static_cast<int>(edges.size());
  const int chi = s.vertices - s.edges + s.faces - s.inner_loops;
  s.genus = (2.0 - chi) / 2.0;
  s.integral_genus = (chi % 2 == 0) && s.genus >= 0.0;
  return s;
}

}  // namespace detail

/// Per-shell (V, E, F, H, genus). Shells are recomputed from twin adjacency.
inline std::vector<ShellEuler> euler_report(const BrepModel& m) {
  std::vector<ShellEuler> out;
  for (const auto& shell : face_shells(m)) out.push_back(detail::shell_counts(m, shell));
  return out;
}

/// Reports every violated structural invariant; never throws on malformed tables.
inline ValidationReport validate(const BrepModel& m) {
  using detail::in_range;
  ValidationReport r;
  auto defect = [&](DefectKind k, int loc, const char* element, std::string msg) {
    r.defects.push_back({k, loc, element, std::move(msg)});
    switch (k) {
      case DefectKind::kTwinConsistency: r.twin_consistent = false; break;
      case DefectKind::kLoopClosure: r.loops_closed = false; break;
      case DefectKind::kManifold: r.manifold = false; break;
      default: break;
    }
  };

  const std::size_t nv = m.vertices.size(), ne = m.edges.size(), nh = m.half_edges.size(), nl = m.loops.size(),
                    nf = m.faces.size();
  bool references_ok = true;

  for (VertexId v = 0; v < static_cast<int>(nv); ++v) {
    if (!is_finite(m.vertices[v])) defect(DefectKind::kGeometry, v, "vertex", "non-finite coordinates");
  }

  for (EdgeId e = 0; e < static_cast<int>(ne); ++e) {
    const Edge& edge = m.edges[e];
    if (!in_range(edge.start, nv) || !in_range(edge.end, nv)) {
      defect(DefectKind::kDanglingReference, e, "edge", "edge references a missing vertex");
      references_ok = false;
      continue;
    }
    for (int side = 0; side < 2; ++side) {
      const HalfEdgeId h = edge.half_edges[side];
      if (!in_range(h, nh) || m.half_edges[h].edge != e || m.half_edges[h].forward != (side == 0)) {
        defect(DefectKind::kManifold, e, "edge", "edge is not referenced by exactly two oriented half-edges");
      }
    }
    if (distance(start_point(edge.curve), m.vertices[edge.start]) > kStructuralTolerance ||
        distance(end_point(edge.curve), m.vertices[edge.end]) > kStructuralTolerance) {
      defect(DefectKind::kGeometry, e, "edge", "curve endpoints do not coincide with edge vertices");
    }
  }

  std::vector<int> loop_membership(nh, 0);
  for (HalfEdgeId h = 0; h < static_cast<int>(nh); ++h) {
    const HalfEdge& he = m.half_edges[h];
    if (!in_range(he.edge, ne) || !in_range(he.origin, nv) || !in_range(he.loop, nl)) {
      defect(DefectKind::kDanglingReference, h, "half-edge", "half-edge references a missing element");
      references_ok = false;
      continue;
    }
    const Edge& edge = m.edges[he.edge];
    const VertexId expected_origin = he.forward ? edge.start : edge.end;
    if (he.origin != expected_origin) defect(DefectKind::kManifold, h, "half-edge", "origin disagrees with edge direction");
    if (!in_range(he.twin, nh) || he.twin == h) {
      defect(DefectKind::kTwinConsistency, h, "half-edge", "twin is missing or the half-edge itself");
      continue;
    }
    const HalfEdge& tw = m.half_edges[he.twin];
    if (tw.twin != h) defect(DefectKind::kTwinConsistency, h, "half-edge", "twin(twin(h)) != h");
    if (tw.edge != he.edge) defect(DefectKind::kTwinConsistency, h, "half-edge", "twin lies on a different edge");
    if (in_range(tw.origin, nv) && tw.origin != m.destination(h)) {
      defect(DefectKind::kTwinConsistency, h, "half-edge", "origin(twin(h)) != destination(h)");
    }
  }

  std::vector<int> face_membership(nl, 0);
  for (LoopId l = 0; l < static_cast<int>(nl); ++l) {
    const Loop& loop = m.loops[l];
    if (loop.half_edges.empty()) {
      defect(DefectKind::kLoopClosure, l, "loop", "empty loop");
      continue;
    }
    bool ok = true;
    for (HalfEdgeId h : loop.half_edges) {
      if (!in_range(h, nh) || !in_range(m.half_edges[h].edge, ne)) {
        ok = false;
        break;
      }
      ++loop_membership[h];
      if (m.half_edges[h].loop != l) defect(DefectKind::kLoopClosure, h, "half-edge", "loop back-reference mismatch");
    }
    if (!ok) {
      defect(DefectKind::kDanglingReference, l, "loop", "loop references a missing half-edge");
      references_ok = false;
      continue;
    }
    for (std::size_t k = 0; k < loop.half_edges.size(); ++k) {
      const HalfEdgeId h = loop.half_edges[k];
      const HalfEdgeId nx = loop.half_edges[(k + 1) % loop.half_edges.size()];
      if (m.destination(h) != m.half_edges[nx].origin) {
        defect(DefectKind::kLoopClosure, l, "loop", "successive half-edges do not connect");
        break;
      }
    }
    if (!in_range(loop.face, nf)) {
      defect(DefectKind::kDanglingReference, l, "loop", "loop references a missing face");
      references_ok = false;
    }
  }
  for (HalfEdgeId h = 0; h < static_cast<int>(nh); ++h) {
    if (loop_membership[h] != 1) defect(DefectKind::kLoopClosure, h, "half-edge", "half-edge is not in exactly one loop");
  }

  for (FaceId f = 0; f < static_cast<int>(nf); ++f) {
    const Face& face = m.faces[f];
    if (!in_range(face.outer, nl)) {
      defect(DefectKind::kFaceStructure, f, "face", "face has no outer loop");
      references_ok = false;
      continue;
    }
    ++face_membership[face.outer];
    if (m.loops[face.outer].kind != LoopKind::kOuter) defect(DefectKind::kFaceStructure, f, "face", "outer loop is labeled inner");
    if (m.loops[face.outer].face != f) defect(DefectKind::kFaceStructure, f, "face", "outer loop back-reference mismatch");
    for (LoopId l : face.inner) {
      if (!in_range(l, nl)) {
        defect(DefectKind::kDanglingReference, f, "face", "face references a missing inner loop");
        references_ok = false;
        continue;
      }
      ++face_membership[l];
      if (m.loops[l].kind != LoopKind::kInner) defect(DefectKind::kFaceStructure, l, "loop", "inner loop is labeled outer");
      if (m.loops[l].face != f) defect(DefectKind::kFaceStructure, l, "loop", "inner loop back-reference mismatch");
    }
  }
  for (LoopId l = 0; l < static_cast<int>(nl); ++l) {
    if (face_membership[l] != 1) defect(DefectKind::kFaceStructure, l, "loop", "loop is not in exactly one face");
  }

  std::vector<bool> used(nv, false);
  for (const HalfEdge& he : m.half_edges) {
    if (in_range(he.origin, nv)) used[he.origin] = true;
  }
  for (VertexId v = 0; v < static_cast<int>(nv); ++v) {
    if (!used[v]) defect(DefectKind::kIsolatedVertex, v, "vertex", "vertex is not on any edge");
  }

  if (references_ok) {
    r.shells = euler_report(m);
    for (std::size_t s = 0; s < r.shells.size(); ++s) {
      if (!r.shells[s].integral_genus) {
        defect(DefectKind::kEulerResidual, static_cast<int>(s), "shell", "Euler characteristic gives a non-integral genus");
      }
    }
    if (nf == 0) defect(DefectKind::kFaceStructure, kNoId, "model", "model has no faces");
  }

  r.watertight = r.defects.empty();
  return r;
}

/// Vertex partition under the undirected vertex-edge graph; components sorted by smallest id.
inline std::vector<std::vector<VertexId>> connected_components(const BrepModel& m) {
  detail::DisjointSets sets(m.vertices.size());
  for (const Edge& e : m.edges) {
    if (detail::in_range(e.start, m.vertices.size()) && detail::in_range(e.end, m.vertices.size())) sets.unite(e.start, e.end);
  }
  std::map<int, std::vector<VertexId>> groups;
  for (VertexId v = 0; v < static_cast<int>(m.vertices.size()); ++v) groups[sets.find(v)].push_back(v);
  std::vector<std::vector<VertexId>> out;
  for (auto& [root, vs] : groups) out.push_back(std::move(vs));
  return out;
}

/// Number of vertex pairs that share a connected component.
inline long long intra_component_pairs(const BrepModel& m) {
  long long pairs = 0;
  for (const auto& c : connected_components(m)) {
    const auto n = static_cast<long long>(c.size());
    pairs += n * (n - 1) / 2;
  }
  return pairs;
}

}  // namespace brepseq
