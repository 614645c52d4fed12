#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "brepseq/brep.hpp"
#include "brepseq/brep_ops.hpp"

namespace brepseq {

struct SamplingConfig {
  int curve_samples = 6;       // N_c
  int surface_samples = 4;     // N_s (column 0 is the on-curve point)
  int next_samples = 4;        // N_n
  int uv_grid_resolution = 64; // per axis, for VoronoiCellMap
  int pcurve_segments = 32;    // chords per half-edge before simplification

  /// Scalars per half-edge record: (N_c + 1) * N_s * 3 + 1 when N_n == N_s.
  int descriptor_length() const { return (curve_samples * surface_samples + next_samples) * 3 + 1; }

  void check() const {
    if (curve_samples < 1 || surface_samples < 1 || next_samples < 1 || next_samples > curve_samples ||
        uv_grid_resolution < 2 || pcurve_segments < 1) {
      throw Error(ErrorKind::kPrecondition, "invalid sampling configuration");
    }
  }
  friend bool operator==(const SamplingConfig&, const SamplingConfig&) = default;
};

/// Image of a half-edge in its face's parameter domain, ordered along the half-edge.
struct UvPolyline {
  HalfEdgeId half_edge = kNoId;
  std::vector<Vec2> points;
};

/// Affine map from a face's parameter rectangle to a metric chart whose axis lengths match the
/// arclength of the iso-curves through the domain center.
struct FaceChart {
  ParamDomain domain;
  double scale_u = 1.0;
  double scale_v = 1.0;

  Vec2 to_metric(Vec2 p) const { return {(p.u - domain.u0) * scale_u, (p.v - domain.v0) * scale_v}; }
  Vec2 to_param(Vec2 q) const { return {domain.u0 + q.u / scale_u, domain.v0 + q.v / scale_v}; }
  double metric_width() const { return domain.width() * scale_u; }
  double metric_height() const { return domain.height() * scale_v; }
  double metric_diagonal() const { return std::hypot(metric_width(), metric_height()); }
};

inline FaceChart make_chart(const SurfaceGeom& s) {
  const ParamDomain& d = s.domain;
  if (!(d.width() > 0.0) || !(d.height() > 0.0)) throw Error(ErrorKind::kInvalidGeometry, "face has an empty parameter domain");
  const Vec2 c = d.center();
  constexpr int kSteps = 64;
  double lu = 0.0, lv = 0.0;
  Point3 pu = evaluate(s, {d.u0, c.v});
  Point3 pv = evaluate(s, {c.u, d.v0});
  for (int i = 1; i <= kSteps; ++i) {
    const double t = static_cast<double>(i) / kSteps;
    const Point3 qu = evaluate(s, {d.u0 + d.width() * t, c.v});
    const Point3 qv = evaluate(s, {c.u, d.v0 + d.height() * t});
    lu += distance(pu, qu);
    lv += distance(pv, qv);
    pu = qu;
    pv = qv;
  }
  FaceChart chart{d, 1.0, 1.0};
  // Collapsed iso-curves (poles) fall back to the raw parameter length.
  chart.scale_u = lu > 1e-12 ? lu / d.width() : 1.0;
  chart.scale_v = lv > 1e-12 ? lv / d.height() : 1.0;
  return chart;
}

namespace detail {

/// Drops interior points that are collinear with their neighbours.
inline std::vector<std::size_t> simplify_collinear(const std::vector<Vec2>& metric, double tol) {
  std::vector<std::size_t> keep{0};
  for (std::size_t i = 1; i + 1 < metric.size(); ++i) {
    const Vec2 a = metric[keep.back()];
    const Vec2 b = metric[i + 1];
    const Vec2 ab = b - a;
    const double len = norm(ab);
    // Keep the point unless it lies on the chord from the last kept point to its successor.
    bool collinear = len > 0.0 && std::abs(cross(ab, metric[i] - a)) / len <= tol &&
                     dot(metric[i] - a, ab) >= 0.0 && dot(b - metric[i], ab) >= 0.0;
    if (collinear) {
      // The whole skipped run must stay on the new chord.
      for (std::size_t j = keep.back() + 1; j < i && collinear; ++j) {
        collinear = std::abs(cross(ab, metric[j] - a)) / len <= tol;
      }
    }
    if (!collinear) keep.push_back(i);
  }
  keep.push_back(metric.size() - 1);
  return keep;
}

}  // namespace detail

/// Parameter-space image of every half-edge bounding `face`: outer loop first, then inner loops.
inline std::vector<UvPolyline> boundary_pcurves(const BrepModel& m, FaceId face, int samples_per_halfedge = 32) {
  const Face& f = m.faces.at(face);
  const FaceChart chart = make_chart(f.surface);
  const double tol = 1e-6 * std::max(1.0, chart.metric_diagonal());
  std::vector<UvPolyline> out;
  auto add_loop = [&](LoopId l) {
    for (HalfEdgeId h : m.loops.at(l).half_edges) {
      const HalfEdge& he = m.half_edges[h];
      const CurveGeom& c = m.edges[he.edge].curve;
      std::vector<Vec2> uv;
      std::vector<Vec2> metric;
      for (int i = 0; i <= samples_per_halfedge; ++i) {
        const double t = static_cast<double>(he.forward ? i : samples_per_halfedge - i) / samples_per_halfedge;
        const Point3 p = evaluate(c, t);
        const Vec2 q = inverse_evaluate(f.surface, p);
        if (!f.surface.domain.contains(q, tol / std::min(chart.scale_u, chart.scale_v))) {
          throw Error(ErrorKind::kInvalidGeometry, "half-edge " + std::to_string(h) + " leaves the domain of face " +
                                                       std::to_string(face));
        }
        uv.push_back(f.surface.domain.clamp(q));
        metric.push_back(chart.to_metric(uv.back()));
      }
      UvPolyline poly{h, {}};
      for (std::size_t k : detail::simplify_collinear(metric, 1e-12 * std::max(1.0, chart.metric_diagonal()))) {
        poly.points.push_back(uv[k]);
      }
      out.push_back(std::move(poly));
    }
  };
  add_loop(f.outer);
  for (LoopId l : f.inner) add_loop(l);
  return out;
}

/// Nearest-boundary partition of one face, evaluated exactly on demand in the metric chart.
class FacePartition {
 public:
  FacePartition(const BrepModel& m, FaceId face, const SamplingConfig& cfg)
      : face_(face), surface_(&m.faces.at(face).surface), chart_(make_chart(*surface_)) {
    polylines_ = boundary_pcurves(m, face, cfg.pcurve_segments);
    const std::size_t outer_count = m.loops.at(m.faces[face].outer).half_edges.size();
    double signed_area = 0.0;
    for (std::size_t i = 0; i < polylines_.size(); ++i) {
      std::vector<Vec2> pts;
      for (Vec2 p : polylines_[i].points) pts.push_back(chart_.to_metric(p));
      if (i < outer_count) {
        for (std::size_t k = 0; k + 1 < pts.size(); ++k) signed_area += cross(pts[k], pts[k + 1]);
      }
      metric_.push_back(std::move(pts));
    }
    interior_left_ = signed_area >= 0.0;
    inside_tolerance_ = 1e-3 * chart_.metric_diagonal();
  }

  FaceId face() const { return face_; }
  const FaceChart& chart() const { return chart_; }
  const SurfaceGeom& surface() const { return *surface_; }
  const std::vector<UvPolyline>& polylines() const { return polylines_; }
  /// Interior lies to the left of every half-edge (in metric coordinates) iff true.
  bool interior_left() const { return interior_left_; }

  double distance_to(std::size_t poly, Vec2 q) const {
    const auto& pts = metric_[poly];
    double best = pts.size() == 1 ? dot(q - pts[0], q - pts[0]) : INFINITY;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) best = std::min(best, squared_distance_to_segment(q, pts[k], pts[k + 1]));
    return std::sqrt(best);
  }

  /// Index of the nearest polyline; ties go to the smallest half-edge id.
  std::size_t nearest(Vec2 q) const {
    std::size_t best = 0;
    double best_d = INFINITY;
    for (std::size_t i = 0; i < metric_.size(); ++i) {
      const double d = distance_to(i, q);
      if (d < best_d || (d == best_d && polylines_[i].half_edge < polylines_[best].half_edge)) {
        best_d = d;
        best = i;
      }
    }
    return best;
  }

  double boundary_distance(Vec2 q) const {
    double best = INFINITY;
    for (std::size_t i = 0; i < metric_.size(); ++i) best = std::min(best, distance_to(i, q));
    return best;
  }

  /// Even-odd containment over all loops, with a thin tolerance band around the boundary.
  bool inside(Vec2 q) const {
    if (q.u < -inside_tolerance_ || q.v < -inside_tolerance_ || q.u > chart_.metric_width() + inside_tolerance_ ||
        q.v > chart_.metric_height() + inside_tolerance_) {
      return false;
    }
    bool in = false;
    for (const auto& pts : metric_) {
      for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const Vec2 a = pts[k], b = pts[k + 1];
        if ((a.v > q.v) != (b.v > q.v)) {
          const double x = a.u + (q.v - a.v) * (b.u - a.u) / (b.v - a.v);
          if (q.u < x) in = !in;
        }
      }
    }
    return in || boundary_distance(q) <= inside_tolerance_;
  }

  /// Half-edge owning metric point q, or kNoId outside the trimmed region.
  HalfEdgeId label(Vec2 q) const { return inside(q) ? polylines_[nearest(q)].half_edge : kNoId; }

  std::size_t polyline_index(HalfEdgeId h) const {
    for (std::size_t i = 0; i < polylines_.size(); ++i) {
      if (polylines_[i].half_edge == h) return i;
    }
    throw Error(ErrorKind::kPrecondition, "half-edge does not bound this face");
  }

 private:
  FaceId face_;
  const SurfaceGeom* surface_;
  FaceChart chart_;
  std::vector<UvPolyline> polylines_;
  std::vector<std::vector<Vec2>> metric_;
  bool interior_left_ = true;
  double inside_tolerance_ = 0.0;
};

/// Grid of half-edge labels over a face's parameter rectangle; kNoId outside the trimmed region.
struct VoronoiCellMap {
  FaceId face = kNoId;
  int resolution = 0;
  ParamDomain domain;
  /// labels[j * resolution + i] for cell center ((i + 0.5) / res, (j + 0.5) / res) of the domain.
  std::vector<HalfEdgeId> labels;

  Vec2 cell_center(int i, int j) const {
    return {domain.u0 + domain.width() * (i + 0.5) / resolution, domain.v0 + domain.height() * (j + 0.5) / resolution};
  }
  HalfEdgeId at(int i, int j) const { return labels[static_cast<std::size_t>(j) * resolution + i]; }
};

inline VoronoiCellMap voronoi_assign(const FacePartition& part, const SamplingConfig& cfg) {
  VoronoiCellMap map;
  map.face = part.face();
  map.resolution = cfg.uv_grid_resolution;
  map.domain = part.chart().domain;
  map.labels.resize(static_cast<std::size_t>(map.resolution) * map.resolution, kNoId);
  for (int j = 0; j < map.resolution; ++j) {
    for (int i = 0; i < map.resolution; ++i) {
      map.labels[static_cast<std::size_t>(j) * map.resolution + i] = part.label(part.chart().to_metric(map.cell_center(i, j)));
    }
  }
  return map;
}

inline VoronoiCellMap voronoi_assign(const BrepModel& m, FaceId face, const SamplingConfig& cfg) {
  return voronoi_assign(FacePartition(m, face, cfg), cfg);
}

/// N_c x N_s samples; row c follows curve sample c, column 0 is on the curve.
struct HalfPatch {
  int rows = 0;
  int cols = 0;
  std::vector<Point3> samples;
  /// Metric depth of each row's walk into the face.
  std::vector<double> depths;
  bool collapsed = false;

  const Point3& at(int row, int col) const { return samples[static_cast<std::size_t>(row) * cols + col]; }
  Point3& at(int row, int col) { return samples[static_cast<std::size_t>(row) * cols + col]; }
};

inline HalfPatch sample_half_patch(const BrepModel& m, const FacePartition& part, HalfEdgeId h, const SamplingConfig& cfg) {
  const HalfEdge& he = m.half_edges.at(h);
  const CurveGeom& curve = m.edges.at(he.edge).curve;
  const FaceChart& chart = part.chart();
  const SurfaceGeom& surface = part.surface();
  const std::size_t own = part.polyline_index(h);
  const int nc = cfg.curve_samples, ns = cfg.surface_samples;
  const double diag = chart.metric_diagonal();

  HalfPatch patch;
  patch.rows = nc;
  patch.cols = ns;
  patch.samples.resize(static_cast<std::size_t>(nc) * ns);
  patch.depths.resize(nc, 0.0);

  auto metric_at = [&](double t) { return chart.to_metric(inverse_evaluate(surface, evaluate(curve, std::clamp(t, 0.0, 1.0)))); };
  auto in_cell = [&](Vec2 q) {
    if (q.u < 0.0 || q.v < 0.0 || q.u > chart.metric_width() || q.v > chart.metric_height()) return false;
    return part.inside(q) && part.nearest(q) == own;
  };

  for (int row = 0; row < nc; ++row) {
    const int index = he.forward ? row + 1 : nc - row;
    const double t = interior_parameter(index, nc);
    const Point3 p0 = evaluate(curve, t);
    patch.at(row, 0) = p0;
    if (ns == 1) continue;

    const Vec2 q0 = chart.to_metric(inverse_evaluate(surface, p0));
    constexpr double kDelta = 1e-4;
    Vec2 tangent = metric_at(t + kDelta) - metric_at(t - kDelta);
    if (!he.forward) tangent = tangent * -1.0;
    const double tl = norm(tangent);
    double depth = 0.0;
    Vec2 dir{0, 0};
    if (tl > 0.0) {
      tangent = tangent * (1.0 / tl);
      dir = part.interior_left() ? Vec2{-tangent.v, tangent.u} : Vec2{tangent.v, -tangent.u};
      // March to the first point outside the cell, then bisect the crossing.
      const double step = diag / 256.0;
      double good = 0.0, bad = -1.0;
      for (double s = step; s <= 2.0 * diag; s += step) {
        if (in_cell(q0 + dir * s)) {
          good = s;
        } else {
          bad = s;
          break;
        }
      }
      if (bad < 0.0) bad = good;
      for (int it = 0; it < 48 && bad - good > 1e-14 * diag; ++it) {
        const double mid = 0.5 * (good + bad);
        (in_cell(q0 + dir * mid) ? good : bad) = mid;
      }
      depth = good;
    }
    patch.depths[row] = depth;
    if (depth <= 1e-9 * std::max(diag, 1e-300)) {
      patch.collapsed = true;
      for (int col = 1; col < ns; ++col) patch.at(row, col) = p0;
      continue;
    }
    for (int col = 1; col < ns; ++col) {
      const Vec2 q = q0 + dir * (depth * col / (ns - 1));
      patch.at(row, col) = evaluate(surface, surface.domain.clamp(chart.to_param(q)));
    }
  }
  return patch;
}

/// The first N_n interior samples of next(h), ordered outward from the shared vertex.
inline std::vector<Point3> sample_next_pointers(const BrepModel& m, HalfEdgeId h, const SamplingConfig& cfg) {
  const HalfEdgeId nx = m.next(h);
  if (nx == kNoId) throw Error(ErrorKind::kPrecondition, "half-edge has no successor");
  auto samples = sample_half_edge(m, nx, cfg.curve_samples);
  samples.resize(cfg.next_samples);
  return samples;
}

struct VhpRecord {
  HalfEdgeId half_edge = kNoId;
  HalfPatch patch;
  std::vector<Point3> next_samples;
  /// 1 = outer loop, 0 = inner loop.
  int label = 1;
};

/// Flat descriptor: patch samples row-major, then next samples, then the label.
inline std::vector<double> flatten(const VhpRecord& r) {
  std::vector<double> out;
  out.reserve((r.patch.samples.size() + r.next_samples.size()) * 3 + 1);
  for (const Point3& p : r.patch.samples) out.insert(out.end(), {p.x, p.y, p.z});
  for (const Point3& p : r.next_samples) out.insert(out.end(), {p.x, p.y, p.z});
  out.push_back(static_cast<double>(r.label));
  return out;
}

struct VhpExtraction {
  /// Indexed by half-edge id.
  std::vector<VhpRecord> records;
  std::vector<std::string> warnings;
};

inline VhpExtraction extract_vhp(const BrepModel& m, const SamplingConfig& cfg = {}) {
  cfg.check();
  VhpExtraction out;
  out.records.resize(m.half_edges.size());
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    const FacePartition part(m, f, cfg);
    for (const UvPolyline& poly : part.polylines()) {
      const HalfEdgeId h = poly.half_edge;
      VhpRecord& r = out.records[h];
      r.half_edge = h;
      try {
        r.patch = sample_half_patch(m, part, h, cfg);
        r.next_samples = sample_next_pointers(m, h, cfg);
      } catch (const Error& e) {
        throw Error(e.kind(), "half-edge " + std::to_string(h) + ": " + e.what());
      }
      r.label = m.loops[m.half_edges[h].loop].kind == LoopKind::kOuter ? 1 : 0;
      if (r.patch.collapsed) out.warnings.push_back("half-edge " + std::to_string(h) + ": zero-depth half-patch");
    }
  }
  return out;
}

}  // namespace brepseq
