#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "brepseq/brep.hpp"
#include "brepseq/hungarian.hpp"
#include "brepseq/tokenizer.hpp"
#include "brepseq/validate.hpp"
#include "brepseq/vhp.hpp"

namespace brepseq {

/// Half-edge recovered from a decoded descriptor. Draft 2k runs from -> to along emitted edge k,
/// draft 2k+1 is its twin.
struct HalfEdgeDraft {
  VertexId origin = kNoId;
  VertexId destination = kNoId;
  EdgeId edge = kNoId;
  HalfEdgeId twin = kNoId;
  /// N_c interior on-curve samples ordered along the draft.
  std::vector<Point3> curve;
  /// N_c x (N_s - 1) interior surface samples, row-major.
  std::vector<Point3> surface;
  /// N_n next-pointer samples.
  std::vector<Point3> next;
  int label = 1;
};

struct DraftSet {
  std::vector<Point3> vertices;
  std::vector<HalfEdgeDraft> drafts;
};

/// [origin, curve samples..., destination].
inline std::vector<Point3> curve_with_endpoints(const DraftSet& set, const HalfEdgeDraft& d) {
  std::vector<Point3> out;
  out.reserve(d.curve.size() + 2);
  out.push_back(set.vertices[d.origin]);
  out.insert(out.end(), d.curve.begin(), d.curve.end());
  out.push_back(set.vertices[d.destination]);
  return out;
}

namespace detail {

inline HalfEdgeDraft unflatten(const std::vector<double>& desc, const SamplingConfig& cfg) {
  if (static_cast<int>(desc.size()) != cfg.descriptor_length()) {
    throw Error(ErrorKind::kRange, "descriptor length " + std::to_string(desc.size()) + " does not match the sampling layout (" +
                                       std::to_string(cfg.descriptor_length()) + ")");
  }
  const int nc = cfg.curve_samples, ns = cfg.surface_samples, nn = cfg.next_samples;
  auto point = [&](std::size_t i) { return Point3{desc[3 * i], desc[3 * i + 1], desc[3 * i + 2]}; };
  HalfEdgeDraft d;
  for (int r = 0; r < nc; ++r) {
    for (int c = 0; c < ns; ++c) {
      const Point3 p = point(static_cast<std::size_t>(r) * ns + c);
      (c == 0 ? d.curve : d.surface).push_back(p);
    }
  }
  for (int k = 0; k < nn; ++k) d.next.push_back(point(static_cast<std::size_t>(nc) * ns + k));
  d.label = desc.back() >= 0.5 ? 1 : 0;
  return d;
}

}  // namespace detail

/// Builds twin drafts per decoded edge and averages the twins' on-curve samples so they agree exactly.
inline DraftSet materialize_half_edges(const VertexRecordSet& records, const SamplingConfig& cfg) {
  DraftSet set;
  int base = 0;
  for (const ComponentRecords& comp : records.components) {
    set.vertices.insert(set.vertices.end(), comp.vertices.begin(), comp.vertices.end());
    for (const EdgeRecord& e : comp.edges) {
      HalfEdgeDraft fwd = detail::unflatten(e.forward, cfg);
      HalfEdgeDraft bwd = detail::unflatten(e.backward, cfg);
      const auto id = static_cast<HalfEdgeId>(set.drafts.size());
      const auto edge = static_cast<EdgeId>(id / 2);
      fwd.origin = bwd.destination = base + e.from;
      fwd.destination = bwd.origin = base + e.to;
      fwd.edge = bwd.edge = edge;
      fwd.twin = id + 1;
      bwd.twin = id;
      const std::size_t nc = fwd.curve.size();
      for (std::size_t k = 0; k < nc; ++k) {
        const Point3 avg = (fwd.curve[k] + bwd.curve[nc - 1 - k]) * 0.5;
        fwd.curve[k] = avg;
      }
      for (std::size_t k = 0; k < nc; ++k) bwd.curve[k] = fwd.curve[nc - 1 - k];
      set.drafts.push_back(std::move(fwd));
      set.drafts.push_back(std::move(bwd));
    }
    base += static_cast<int>(comp.vertices.size());
  }
  return set;
}

/// Sum over aligned pairs of Euclidean distances between next-pointer samples of `in` and the
/// first N_n on-curve samples of `out`.
inline double next_pointer_distance(const HalfEdgeDraft& in, const HalfEdgeDraft& out) {
  double d = 0.0;
  const std::size_t n = std::min(in.next.size(), out.curve.size());
  for (std::size_t k = 0; k < n; ++k) d += distance(in.next[k], out.curve[k]);
  return d;
}

struct VertexStar {
  VertexId vertex = kNoId;
  std::vector<HalfEdgeId> incoming;
  std::vector<HalfEdgeId> outgoing;
};

inline std::vector<VertexStar> vertex_stars(const DraftSet& set) {
  std::vector<VertexStar> stars(set.vertices.size());
  for (VertexId v = 0; v < static_cast<VertexId>(stars.size()); ++v) stars[v].vertex = v;
  for (HalfEdgeId h = 0; h < static_cast<HalfEdgeId>(set.drafts.size()); ++h) {
    stars[set.drafts[h].destination].incoming.push_back(h);
    stars[set.drafts[h].origin].outgoing.push_back(h);
  }
  return stars;
}

inline AssignmentProblem make_assignment_problem(const DraftSet& set, const VertexStar& star, bool forbid_twins = true) {
  AssignmentProblem p;
  p.size = static_cast<int>(star.incoming.size());
  p.cost.resize(static_cast<std::size_t>(p.size) * p.size);
  p.forbidden.assign(p.cost.size(), false);
  for (int i = 0; i < p.size; ++i) {
    for (int j = 0; j < p.size; ++j) {
      const HalfEdgeDraft& in = set.drafts[star.incoming[i]];
      p.cost[static_cast<std::size_t>(i) * p.size + j] = next_pointer_distance(in, set.drafts[star.outgoing[j]]);
      p.forbidden[static_cast<std::size_t>(i) * p.size + j] = forbid_twins && in.twin == star.outgoing[j];
    }
  }
  return p;
}

struct NextAssignment {
  std::vector<HalfEdgeId> next;
  double total_cost = 0.0;
  std::vector<VertexId> infeasible_vertices;
  std::vector<VertexId> elevated_cost_vertices;
};

/// Mean per-sample distance above which a vertex's matching is reported as suspicious.
inline constexpr double kElevatedCostPerSample = 0.05;

/// Solves the constrained matching at every vertex. Infeasible stars fall back to allowing twins.
inline NextAssignment assign_next_pointers(const DraftSet& set) {
  NextAssignment out;
  out.next.assign(set.drafts.size(), kNoId);
  for (const VertexStar& star : vertex_stars(set)) {
    if (star.incoming.empty()) continue;
    if (star.incoming.size() != star.outgoing.size()) {
      out.infeasible_vertices.push_back(star.vertex);
      continue;
    }
    Assignment a = solve_assignment(make_assignment_problem(set, star));
    if (!a.feasible) {
      out.infeasible_vertices.push_back(star.vertex);
      a = solve_assignment(make_assignment_problem(set, star, false));
    }
    bool elevated = false;
    for (std::size_t i = 0; i < star.incoming.size(); ++i) {
      const HalfEdgeId in = star.incoming[i];
      const HalfEdgeId o = star.outgoing[a.permutation[i]];
      out.next[in] = o;
      const auto samples = static_cast<double>(std::max<std::size_t>(1, set.drafts[in].next.size()));
      if (next_pointer_distance(set.drafts[in], set.drafts[o]) / samples > kElevatedCostPerSample) elevated = true;
    }
    if (elevated) out.elevated_cost_vertices.push_back(star.vertex);
    out.total_cost += a.cost;
  }
  return out;
}

struct LoopDraft {
  std::vector<HalfEdgeId> half_edges;
  int outer_votes = 0;
  int inner_votes = 0;
  LoopKind kind = LoopKind::kOuter;
};

/// Orbits of the next map. Entries without a successor end their orbit.
inline std::vector<LoopDraft> trace_loops(const std::vector<HalfEdgeId>& next) {
  std::vector<LoopDraft> loops;
  std::vector<bool> seen(next.size(), false);
  for (HalfEdgeId start = 0; start < static_cast<HalfEdgeId>(next.size()); ++start) {
    if (seen[start]) continue;
    LoopDraft loop;
    HalfEdgeId h = start;
    while (h != kNoId && !seen[h]) {
      seen[h] = true;
      loop.half_edges.push_back(h);
      h = next[h];
    }
    loops.push_back(std::move(loop));
  }
  return loops;
}

/// Majority vote of member labels; ties go to outer.
inline void classify_loops(std::vector<LoopDraft>& loops, const DraftSet& set) {
  for (LoopDraft& l : loops) {
    l.outer_votes = l.inner_votes = 0;
    for (HalfEdgeId h : l.half_edges) (set.drafts[h].label == 1 ? l.outer_votes : l.inner_votes)++;
    l.kind = l.inner_votes > l.outer_votes ? LoopKind::kInner : LoopKind::kOuter;
  }
}

inline LoopKind classify_votes(int outer, int inner) { return inner > outer ? LoopKind::kInner : LoopKind::kOuter; }

/// Threshold below which a face is kept planar.
inline constexpr double kPlanarRmsThreshold = 1e-5;

struct FaceFit {
  SurfaceGeom surface;
  /// RMS distance of all fitted samples to the accepted surface.
  double rms = 0.0;
  /// RMS distance to the best plane (always computed).
  double plane_rms = 0.0;
  bool planar = true;
  bool underdetermined = false;
  /// Closed boundary polyline used for trimmed distances.
  std::vector<Point3> boundary;
};

namespace detail {

inline Vec3 newell(const std::vector<Point3>& poly) {
  Vec3 n{};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point3 a = poly[i], b = poly[(i + 1) % poly.size()];
    n.x += (a.y - b.y) * (a.z + b.z);
    n.y += (a.z - b.z) * (a.x + b.x);
    n.z += (a.x - b.x) * (a.y + b.y);
  }
  return n;
}

inline Vec3 to_vec(const Eigen::Vector3d& v) { return {v.x(), v.y(), v.z()}; }

}  // namespace detail

/// Plane by least squares; falls back to a bicubic patch when the plane residual exceeds the threshold.
/// `polygon` (with the dequantized vertices) only orients and trims; the fit uses decoded samples.
inline FaceFit fit_face(const std::vector<Point3>& polygon, const std::vector<Point3>& boundary, const std::vector<Point3>& interior) {
  FaceFit fit;
  fit.boundary = polygon;
  std::vector<Point3> all = boundary;
  all.insert(all.end(), interior.begin(), interior.end());
  if (all.size() < 3) throw Error(ErrorKind::kPrecondition, "face fit needs at least three samples");

  Point3 centroid{};
  for (const Point3& p : all) centroid += p;
  centroid = centroid / static_cast<double>(all.size());
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const Point3& p : all) {
    const Eigen::Vector3d d(p.x - centroid.x, p.y - centroid.y, p.z - centroid.z);
    cov += d * d.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
  Vec3 normal = detail::to_vec(eig.eigenvectors().col(0));
  Vec3 e1 = detail::to_vec(eig.eigenvectors().col(2));
  const Vec3 hint = detail::newell(polygon);
  if (dot(normal, hint) < 0.0) normal = -normal;
  e1 = normalized(e1 - normal * dot(e1, normal));
  const Vec3 e2 = cross(normal, e1);

  double sq = 0.0;
  double smin = INFINITY, smax = -INFINITY, tmin = INFINITY, tmax = -INFINITY;
  for (const Point3& p : all) {
    const Vec3 d = p - centroid;
    sq += dot(d, normal) * dot(d, normal);
    smin = std::min(smin, dot(d, e1));
    smax = std::max(smax, dot(d, e1));
    tmin = std::min(tmin, dot(d, e2));
    tmax = std::max(tmax, dot(d, e2));
  }
  fit.plane_rms = std::sqrt(sq / static_cast<double>(all.size()));
  const double pad = 1e-9;
  auto make_plane = [&] {
    return SurfaceGeom{Plane{centroid, e1, e2}, ParamDomain{smin - pad, smax + pad, tmin - pad, tmax + pad}, false};
  };
  fit.surface = make_plane();
  fit.rms = fit.plane_rms;
  if (fit.plane_rms <= kPlanarRmsThreshold) return fit;
  if (all.size() < 16 || !(smax - smin > 1e-12) || !(tmax - tmin > 1e-12)) {
    fit.underdetermined = true;
    return fit;
  }

  // Bicubic over the plane's projection, boundary samples weighted up, ridge toward the flat net.
  const double ws = smax - smin, wt = tmax - tmin;
  const int n = static_cast<int>(all.size());
  Eigen::MatrixXd a(n, 16);
  Eigen::MatrixXd x(n, 3);
  Eigen::VectorXd w(n);
  for (int r = 0; r < n; ++r) {
    const Vec3 d = all[r] - centroid;
    const auto bu = detail::bernstein3((dot(d, e1) - smin) / ws);
    const auto bv = detail::bernstein3((dot(d, e2) - tmin) / wt);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) a(r, i * 4 + j) = bu[i] * bv[j];
    }
    x.row(r) << all[r].x, all[r].y, all[r].z;
    w(r) = r < static_cast<int>(boundary.size()) ? 10.0 : 1.0;
  }
  Eigen::MatrixXd flat(16, 3);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Point3 c = centroid + e1 * (smin + ws * i / 3.0) + e2 * (tmin + wt * j / 3.0);
      flat.row(i * 4 + j) << c.x, c.y, c.z;
    }
  }
  const Eigen::MatrixXd atw = a.transpose() * w.asDiagonal();
  Eigen::MatrixXd normal_eq = atw * a;
  const double ridge = 1e-8 * normal_eq.trace() / 16.0;
  normal_eq.diagonal().array() += ridge;
  const Eigen::MatrixXd delta = normal_eq.ldlt().solve(atw * (x - a * flat));
  const Eigen::MatrixXd control = flat + delta;

  BicubicPatch patch;
  for (int k = 0; k < 16; ++k) patch.control[k] = {control(k, 0), control(k, 1), control(k, 2)};
  SurfaceGeom bicubic{patch, ParamDomain{0, 1, 0, 1}, false};
  double bsq = 0.0;
  for (const Point3& p : all) bsq += squared_distance(evaluate(bicubic, inverse_evaluate(bicubic, p)), p);
  const double brms = std::sqrt(bsq / n);
  if (brms < fit.plane_rms) {
    fit.surface = bicubic;
    fit.rms = brms;
    fit.planar = false;
  }
  return fit;
}

/// Distance from p to the trimmed face: planar faces clip to their boundary polygon.
inline double distance_to_face(const FaceFit& face, Point3 p) {
  if (const auto* pl = std::get_if<Plane>(&face.surface.shape)) {
    const Vec3 nrm = normalized(cross(pl->u_axis, pl->v_axis));
    const double h = dot(p - pl->origin, nrm);
    const Point3 proj = p - nrm * h;
    // Even-odd containment in the plane frame.
    auto frame = [&](Point3 q) { return Vec2{dot(q - pl->origin, pl->u_axis), dot(q - pl->origin, pl->v_axis)}; };
    const Vec2 q = frame(proj);
    bool inside = false;
    double edge_d2 = INFINITY;
    const auto& b = face.boundary;
    for (std::size_t i = 0; i < b.size(); ++i) {
      const Point3 a3 = b[i] - nrm * dot(b[i] - pl->origin, nrm);
      const Point3 b3 = b[(i + 1) % b.size()] - nrm * dot(b[(i + 1) % b.size()] - pl->origin, nrm);
      edge_d2 = std::min(edge_d2, squared_distance_to_segment(proj, a3, b3));
      const Vec2 a = frame(a3), c = frame(b3);
      if ((a.v > q.v) != (c.v > q.v)) {
        const double xu = a.u + (q.v - a.v) * (c.u - a.u) / (c.v - a.v);
        if (q.u < xu) inside = !inside;
      }
    }
    return inside || b.size() < 3 ? std::abs(h) : std::sqrt(h * h + edge_d2);
  }
  return distance(evaluate(face.surface, inverse_evaluate(face.surface, p)), p);
}

/// Parent face per inner loop: argmin over faces of the mean sample-to-face distance.
inline std::vector<int> attach_inner_loops(const std::vector<std::vector<Point3>>& inner_samples, const std::vector<FaceFit>& faces) {
  if (faces.empty() && !inner_samples.empty()) throw Error(ErrorKind::kPrecondition, "inner loops present but no faces to attach them to");
  std::vector<int> out;
  for (const auto& samples : inner_samples) {
    int best = 0;
    double best_mean = INFINITY;
    for (std::size_t f = 0; f < faces.size(); ++f) {
      double sum = 0.0;
      for (const Point3& p : samples) sum += distance_to_face(faces[f], p);
      const double mean = samples.empty() ? 0.0 : sum / static_cast<double>(samples.size());
      if (mean < best_mean) {
        best_mean = mean;
        best = static_cast<int>(f);
      }
    }
    out.push_back(best);
  }
  return out;
}

struct ReconstructionReport {
  bool success = false;
  double total_cost = 0.0;
  std::vector<VertexId> infeasible_vertices;
  std::vector<VertexId> elevated_cost_vertices;
  int loops = 0;
  int outer_loops = 0;
  int inner_loops = 0;
  int faces_built = 0;
  int inner_attached = 0;
  int planar_faces = 0;
  int underdetermined_faces = 0;
  std::vector<std::string> errors;
  ValidationReport validation;
};

struct Reconstruction {
  BrepModel model;
  ReconstructionReport report;
  /// Draft-level next map (draft ids equal half-edge ids of the model).
  std::vector<HalfEdgeId> next;
};

/// materialize -> per-vertex assignment -> trace -> classify -> fit outers -> attach inners -> validate.
/// Stage failures leave a partial model and are recorded in the report.
inline Reconstruction reconstruct(const VertexRecordSet& records, const SamplingConfig& cfg = {}) {
  Reconstruction out;
  ReconstructionReport& rep = out.report;
  BrepModel& m = out.model;
  DraftSet set;
  try {
    set = materialize_half_edges(records, cfg);
  } catch (const std::exception& e) {
    rep.errors.push_back(std::string("materialize: ") + e.what());
    rep.validation = validate(m);
    return out;
  }

  m.vertices = set.vertices;
  for (HalfEdgeId h = 0; h + 1 < static_cast<HalfEdgeId>(set.drafts.size()); h += 2) {
    const HalfEdgeDraft& d = set.drafts[h];
    Edge e;
    e.curve = Polyline{curve_with_endpoints(set, d)};
    e.start = d.origin;
    e.end = d.destination;
    e.half_edges = {h, h + 1};
    m.edges.push_back(std::move(e));
    m.half_edges.push_back(HalfEdge{d.origin, h + 1, kNoId, d.edge, true});
    m.half_edges.push_back(HalfEdge{d.destination, h, kNoId, d.edge, false});
  }

  try {
    NextAssignment na = assign_next_pointers(set);
    out.next = na.next;
    rep.total_cost = na.total_cost;
    rep.infeasible_vertices = na.infeasible_vertices;
    rep.elevated_cost_vertices = na.elevated_cost_vertices;

    std::vector<LoopDraft> loops = trace_loops(na.next);
    classify_loops(loops, set);
    rep.loops = static_cast<int>(loops.size());

    std::vector<FaceFit> fits;
    std::vector<LoopId> fit_loop;
    std::vector<LoopId> inner_ids;
    std::vector<std::vector<Point3>> inner_samples;
    for (const LoopDraft& ld : loops) {
      const auto lid = static_cast<LoopId>(m.loops.size());
      Loop loop;
      loop.half_edges = ld.half_edges;
      loop.kind = ld.kind;
      for (HalfEdgeId h : ld.half_edges) m.half_edges[h].loop = lid;
      m.loops.push_back(std::move(loop));
      if (ld.kind == LoopKind::kInner) {
        ++rep.inner_loops;
        std::vector<Point3> samples;
        for (HalfEdgeId h : ld.half_edges) samples.insert(samples.end(), set.drafts[h].curve.begin(), set.drafts[h].curve.end());
        inner_ids.push_back(lid);
        inner_samples.push_back(std::move(samples));
        continue;
      }
      ++rep.outer_loops;
      std::vector<Point3> polygon, boundary, interior;
      for (HalfEdgeId h : ld.half_edges) {
        const auto pts = curve_with_endpoints(set, set.drafts[h]);
        polygon.insert(polygon.end(), pts.begin(), pts.end() - 1);
        boundary.insert(boundary.end(), set.drafts[h].curve.begin(), set.drafts[h].curve.end());
        interior.insert(interior.end(), set.drafts[h].surface.begin(), set.drafts[h].surface.end());
      }
      try {
        fits.push_back(fit_face(polygon, boundary, interior));
        fit_loop.push_back(lid);
      } catch (const std::exception& e) {
        rep.errors.push_back(std::string("fit_face: ") + e.what());
      }
    }

    for (std::size_t f = 0; f < fits.size(); ++f) {
      const auto fid = static_cast<FaceId>(m.faces.size());
      Face face;
      face.surface = fits[f].surface;
      face.outer = fit_loop[f];
      m.loops[fit_loop[f]].face = fid;
      m.faces.push_back(std::move(face));
      if (fits[f].planar) ++rep.planar_faces;
      if (fits[f].underdetermined) ++rep.underdetermined_faces;
    }
    rep.faces_built = static_cast<int>(m.faces.size());

    if (!inner_ids.empty()) {
      const std::vector<int> parent = attach_inner_loops(inner_samples, fits);
      for (std::size_t i = 0; i < inner_ids.size(); ++i) {
        m.faces[parent[i]].inner.push_back(inner_ids[i]);
        m.loops[inner_ids[i]].face = parent[i];
        ++rep.inner_attached;
      }
    }
    for (Face& face : m.faces) {
      if (std::holds_alternative<Plane>(face.surface.shape)) {
        const ParamDomain b = BrepBuilder::boundary_domain(m, face);
        ParamDomain& d = face.surface.domain;
        d = {std::min(d.u0, b.u0), std::max(d.u1, b.u1), std::min(d.v0, b.v0), std::max(d.v1, b.v1)};
      }
    }
    m.shells = face_shells(m);
  } catch (const std::exception& e) {
    rep.errors.push_back(e.what());
  }

  rep.validation = validate(m);
  // a twin-fallback vertex means a dangling edge folded into a face, never a valid solid
  rep.success = rep.validation.watertight && rep.errors.empty() && rep.infeasible_vertices.empty();
  return out;
}

struct RoundtripComparison {
  bool euler_match = false;
  bool multigraph_match = false;
  bool next_map_match = false;
  bool loop_kinds_match = false;
  double max_vertex_error = 0.0;
  std::vector<std::string> mismatches;

  bool ok(double vertex_tolerance = 1.0 / 256.0 + 1e-9) const {
    return euler_match && multigraph_match && next_map_match && loop_kinds_match && max_vertex_error <= vertex_tolerance;
  }
};

/// Compares a reconstruction against its source through the record trace produced at tokenization.
inline RoundtripComparison compare_roundtrip(const BrepModel& source, const RecordTrace& trace, const Reconstruction& rec) {
  RoundtripComparison c;
  const BrepModel& r = rec.model;

  auto tuples = [](const std::vector<ShellEuler>& shells) {
    std::vector<std::tuple<int, int, int, int, double>> t;
    for (const auto& s : shells) t.emplace_back(s.vertices, s.edges, s.faces, s.inner_loops, s.genus);
    std::sort(t.begin(), t.end());
    return t;
  };
  c.euler_match = tuples(euler_report(source)) == tuples(euler_report(r));
  if (!c.euler_match) c.mismatches.push_back("per-shell (V, E, F, H, genus) differ");

  std::vector<int> canon(source.vertices.size(), -1);
  for (std::size_t i = 0; i < trace.order.vertices.size(); ++i) canon[trace.order.vertices[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> src_edges, rec_edges;
  for (const Edge& e : source.edges) src_edges.push_back(std::minmax(canon[e.start], canon[e.end]));
  for (const Edge& e : r.edges) rec_edges.push_back(std::minmax(e.start, e.end));
  std::sort(src_edges.begin(), src_edges.end());
  std::sort(rec_edges.begin(), rec_edges.end());
  c.multigraph_match = src_edges == rec_edges && r.vertices.size() == source.vertices.size();
  if (!c.multigraph_match) c.mismatches.push_back("vertex-edge multigraph differs under canonical order");

  if (r.vertices.size() == trace.order.vertices.size()) {
    for (std::size_t i = 0; i < r.vertices.size(); ++i) {
      const Point3 d = r.vertices[i] - source.vertices[trace.order.vertices[i]];
      c.max_vertex_error = std::max({c.max_vertex_error, std::abs(d.x), std::abs(d.y), std::abs(d.z)});
    }
  } else {
    c.max_vertex_error = INFINITY;
  }

  std::map<HalfEdgeId, HalfEdgeId> draft_of;
  for (std::size_t k = 0; k < trace.half_edges.size(); ++k) {
    draft_of[trace.half_edges[k][0]] = static_cast<HalfEdgeId>(2 * k);
    draft_of[trace.half_edges[k][1]] = static_cast<HalfEdgeId>(2 * k + 1);
  }
  c.next_map_match = rec.next.size() == 2 * trace.half_edges.size();
  c.loop_kinds_match = c.next_map_match && r.half_edges.size() == rec.next.size();
  const auto src_next = source.next_map();
  for (std::size_t k = 0; k < trace.half_edges.size() && c.next_map_match; ++k) {
    for (int side = 0; side < 2; ++side) {
      const HalfEdgeId src = trace.half_edges[k][side];
      const auto d = static_cast<HalfEdgeId>(2 * k + side);
      if (draft_of.at(src_next[src]) != rec.next[d]) c.next_map_match = false;
      const LoopId rl = r.half_edges[d].loop;
      if (rl == kNoId || r.loops[rl].kind != source.loops[source.half_edges[src].loop].kind) c.loop_kinds_match = false;
    }
  }
  if (!c.next_map_match) c.mismatches.push_back("recovered next map differs from the source");
  if (!c.loop_kinds_match) c.mismatches.push_back("loop kinds differ from the source");
  return c;
}

}  // namespace brepseq
