#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "brepseq/brep.hpp"
#include "brepseq/util.hpp"
#include "brepseq/vhp.hpp"

namespace brepseq {

struct PointCloud {
  std::vector<Point3> points;
  std::vector<Vec3> normals;
  std::string source;
};

/// Number of UV cells per side used to estimate face areas.
inline constexpr int kAreaGrid = 48;

namespace detail {

struct FaceSampler {
  FacePartition part;
  std::vector<double> cell_cdf;  // cumulative metric area of all cells
  double area = 0.0;             // trimmed area estimate
};

inline FaceSampler make_face_sampler(const BrepModel& m, FaceId f) {
  FaceSampler s{FacePartition(m, f, SamplingConfig{}), {}, 0.0};
  const ParamDomain& d = m.faces[f].surface.domain;
  const double du = d.width() / kAreaGrid, dv = d.height() / kAreaGrid;
  double acc = 0.0;
  for (int j = 0; j < kAreaGrid; ++j) {
    for (int i = 0; i < kAreaGrid; ++i) {
      const Vec2 uv{d.u0 + (i + 0.5) * du, d.v0 + (j + 0.5) * dv};
      const SurfacePoint sp = evaluate_with_partials(m.faces[f].surface.shape, uv.u, uv.v);
      const double a = norm(cross(sp.du, sp.dv)) * du * dv;
      acc += a;
      s.cell_cdf.push_back(acc);
      if (s.part.inside(s.part.chart().to_metric(uv))) s.area += a;
    }
  }
  return s;
}

}  // namespace detail

/// Area-weighted uniform samples over all faces (areas from the UV grid with surface metric,
/// trimming by rejection). Deterministic per seed.
inline PointCloud surface_sample(const BrepModel& m, int n, std::uint64_t seed) {
  if (m.faces.empty()) throw Error(ErrorKind::kPrecondition, "surface sampling needs at least one face");
  std::vector<detail::FaceSampler> faces;
  std::vector<double> face_cdf;
  double total = 0.0;
  for (FaceId f = 0; f < static_cast<FaceId>(m.faces.size()); ++f) {
    faces.push_back(detail::make_face_sampler(m, f));
    total += faces.back().area;
    face_cdf.push_back(total);
  }
  if (!(total > 0.0)) throw Error(ErrorKind::kInvalidGeometry, "model has zero surface area");
  Rng rng(seed);
  PointCloud pc;
  for (int k = 0; k < n; ++k) {
    const auto fi = static_cast<std::size_t>(std::upper_bound(face_cdf.begin(), face_cdf.end(), rng.uniform() * total) - face_cdf.begin());
    const detail::FaceSampler& fs = faces[std::min(fi, faces.size() - 1)];
    const SurfaceGeom& g = m.faces[fs.part.face()].surface;
    const ParamDomain& d = g.domain;
    for (int attempt = 0;; ++attempt) {
      if (attempt > 100000) throw Error(ErrorKind::kInvalidGeometry, "rejection sampling failed on a face");
      const double r = rng.uniform() * fs.cell_cdf.back();
      const auto c = static_cast<int>(std::upper_bound(fs.cell_cdf.begin(), fs.cell_cdf.end(), r) - fs.cell_cdf.begin());
      const int ci = std::min(c, kAreaGrid * kAreaGrid - 1);
      const Vec2 uv{d.u0 + (ci % kAreaGrid + rng.uniform()) * d.width() / kAreaGrid,
                    d.v0 + (ci / kAreaGrid + rng.uniform()) * d.height() / kAreaGrid};
      if (!fs.part.inside(fs.part.chart().to_metric(uv))) continue;
      const SurfacePoint sp = evaluate_with_partials(g.shape, uv.u, uv.v);
      Vec3 nrm = cross(sp.du, sp.dv);
      const double len = norm(nrm);
      nrm = len > 0 ? nrm / len : Vec3{};
      pc.points.push_back(sp.point);
      pc.normals.push_back(g.reversed ? -nrm : nrm);
      break;
    }
  }
  return pc;
}

/// Static 3-d tree for nearest-neighbor queries.
class KdTree {
 public:
  explicit KdTree(const std::vector<Point3>& pts) : pts_(pts), idx_(pts.size()) {
    std::iota(idx_.begin(), idx_.end(), 0);
    build(0, idx_.size(), 0);
  }

  /// Squared distance to the nearest stored point.
  double nearest_squared(Point3 q) const {
    double best = INFINITY;
    if (!idx_.empty()) search(0, idx_.size(), 0, q, best);
    return best;
  }

 private:
  void build(std::size_t lo, std::size_t hi, int axis) {
    if (hi - lo <= 1) return;
    const std::size_t mid = (lo + hi) / 2;
    std::nth_element(idx_.begin() + lo, idx_.begin() + mid, idx_.begin() + hi,
                     [&](std::size_t a, std::size_t b) { return pts_[a][axis] < pts_[b][axis]; });
    build(lo, mid, (axis + 1) % 3);
    build(mid + 1, hi, (axis + 1) % 3);
  }

  void search(std::size_t lo, std::size_t hi, int axis, Point3 q, double& best) const {
    if (hi <= lo) return;
    const std::size_t mid = (lo + hi) / 2;
    const Point3& p = pts_[idx_[mid]];
    best = std::min(best, squared_distance(p, q));
    const double diff = q[axis] - p[axis];
    const int next = (axis + 1) % 3;
    if (diff < 0) {
      search(lo, mid, next, q, best);
      if (diff * diff < best) search(mid + 1, hi, next, q, best);
    } else {
      search(mid + 1, hi, next, q, best);
      if (diff * diff < best) search(lo, mid, next, q, best);
    }
  }

  std::vector<Point3> pts_;
  std::vector<std::size_t> idx_;
};

/// Mean squared nearest-neighbor distance from a to b.
inline double directed_chamfer(const std::vector<Point3>& a, const KdTree& b) {
  double s = 0.0;
  for (const Point3& p : a) s += b.nearest_squared(p);
  return s / static_cast<double>(a.size());
}

/// Average of the two directed mean squared nearest-neighbor distances.
inline double chamfer(const PointCloud& a, const PointCloud& b) {
  if (a.points.empty() || b.points.empty()) throw Error(ErrorKind::kPrecondition, "chamfer needs non-empty clouds");
  return 0.5 * (directed_chamfer(a.points, KdTree(b.points)) + directed_chamfer(b.points, KdTree(a.points)));
}

/// table[g * |ref| + r] = chamfer(gen[g], ref[r]).
inline std::vector<double> chamfer_table(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref) {
  std::vector<KdTree> gt, rt;
  for (const auto& c : gen) gt.emplace_back(c.points);
  for (const auto& c : ref) rt.emplace_back(c.points);
  std::vector<double> t(gen.size() * ref.size());
  for (std::size_t g = 0; g < gen.size(); ++g) {
    for (std::size_t r = 0; r < ref.size(); ++r) {
      t[g * ref.size() + r] = 0.5 * (directed_chamfer(gen[g].points, rt[r]) + directed_chamfer(ref[r].points, gt[g]));
    }
  }
  return t;
}

struct CovMmd {
  double cov = 0.0;
  double mmd = 0.0;
};

/// COV: fraction of references that are the nearest reference of some generated shape (ties to the
/// lower index). MMD: mean over references of the minimum CD to any generated shape.
inline CovMmd cov_mmd_from_table(const std::vector<double>& table, std::size_t n_gen, std::size_t n_ref) {
  if (n_gen == 0 || n_ref == 0) throw Error(ErrorKind::kPrecondition, "COV/MMD need non-empty sets");
  std::vector<bool> hit(n_ref, false);
  for (std::size_t g = 0; g < n_gen; ++g) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < n_ref; ++r) {
      if (table[g * n_ref + r] < table[g * n_ref + best]) best = r;
    }
    hit[best] = true;
  }
  CovMmd out;
  for (std::size_t r = 0; r < n_ref; ++r) {
    double best = INFINITY;
    for (std::size_t g = 0; g < n_gen; ++g) best = std::min(best, table[g * n_ref + r]);
    out.mmd += best;
    out.cov += hit[r] ? 1.0 : 0.0;
  }
  out.cov /= static_cast<double>(n_ref);
  out.mmd /= static_cast<double>(n_ref);
  return out;
}

inline CovMmd cov_mmd(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref) {
  return cov_mmd_from_table(chamfer_table(gen, ref), gen.size(), ref.size());
}

inline constexpr int kJsdResolution = 28;

/// Mean per-cloud binary occupancy over a res^3 grid on [0,1)^3, normalized to sum 1.
inline std::vector<double> occupancy_distribution(const std::vector<PointCloud>& set, int res) {
  std::vector<double> dist(static_cast<std::size_t>(res) * res * res, 0.0);
  for (const PointCloud& c : set) {
    std::set<std::size_t> cells;
    for (const Point3& p : c.points) {
      std::array<int, 3> k{};
      for (int a = 0; a < 3; ++a) k[a] = std::clamp(static_cast<int>(std::floor(p[a] * res)), 0, res - 1);
      cells.insert((static_cast<std::size_t>(k[2]) * res + k[1]) * res + k[0]);
    }
    for (std::size_t cell : cells) dist[cell] += 1.0;
  }
  const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
  if (total > 0) {
    for (double& x : dist) x /= total;
  }
  return dist;
}

/// Jensen-Shannon divergence in bits.
inline double jensen_shannon(const std::vector<double>& p, const std::vector<double>& q) {
  auto kl_to_mid = [](double a, double b) { return a > 0 ? a * std::log2(a / (0.5 * (a + b))) : 0.0; };
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += 0.5 * kl_to_mid(p[i], q[i]) + 0.5 * kl_to_mid(q[i], p[i]);
  return std::max(0.0, s);
}

inline double jsd(const std::vector<PointCloud>& gen, const std::vector<PointCloud>& ref, int res = kJsdResolution) {
  return jensen_shannon(occupancy_distribution(gen, res), occupancy_distribution(ref, res));
}

struct NovelUniqueValid {
  double novel = 0.0;
  double unique = 0.0;
  double valid = 0.0;
};

/// Keys are canonical duplicate keys (token sequences or geometry hashes); `watertight` per generated model.
inline NovelUniqueValid novel_unique_valid(const std::vector<std::string>& gen_keys, const std::vector<std::string>& train_keys,
                                           const std::vector<bool>& watertight) {
  NovelUniqueValid out;
  if (gen_keys.empty()) return out;
  const std::set<std::string> train(train_keys.begin(), train_keys.end());
  const std::set<std::string> distinct(gen_keys.begin(), gen_keys.end());
  double novel = 0, valid = 0;
  for (const auto& k : gen_keys) novel += train.count(k) ? 0 : 1;
  for (bool w : watertight) valid += w ? 1 : 0;
  const auto n = static_cast<double>(gen_keys.size());
  out.novel = novel / n;
  out.unique = static_cast<double>(distinct.size()) / n;
  out.valid = watertight.empty() ? 0.0 : valid / static_cast<double>(watertight.size());
  return out;
}

/// Duplicate key from geometry alone: quantized vertices and the edge multigraph under sorted order.
inline std::string geometry_key(const BrepModel& m) {
  std::vector<std::array<int, 3>> q;
  for (const Point3& p : m.vertices) {
    q.push_back({static_cast<int>(std::floor(p.z * 128)), static_cast<int>(std::floor(p.y * 128)), static_cast<int>(std::floor(p.x * 128))});
  }
  std::vector<std::size_t> order(q.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return q[a] < q[b]; });
  std::vector<int> rank(q.size());
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  std::vector<std::pair<int, int>> edges;
  for (const Edge& e : m.edges) {
    if (e.start >= 0 && e.end >= 0 && e.start < static_cast<int>(rank.size()) && e.end < static_cast<int>(rank.size())) {
      edges.push_back(std::minmax(rank[e.start], rank[e.end]));
    }
  }
  std::sort(edges.begin(), edges.end());
  Fnv1a h;
  h.str("geom");
  for (std::size_t i : order) {
    for (int c : q[i]) h.u64(static_cast<std::uint64_t>(c));
  }
  for (const auto& [a, b] : edges) h.u64(static_cast<std::uint64_t>(a)).u64(static_cast<std::uint64_t>(b));
  return "geom:" + h.hex();
}

struct CurveError {
  /// Mean over curves of the mean probe deviation of the sampled polyline.
  double sampled = 0.0;
  /// Same for a chordal mesh with `chord_segments` segments per curve.
  double chordal = 0.0;
  /// Largest single probe deviation of the chordal mesh.
  double chordal_max = 0.0;
  int curves = 0;
};

namespace detail {

/// Parameters of an n-point uniform discretization; polylines also keep their own vertices.
inline std::vector<double> discretization(const CurveGeom& c, int points) {
  std::vector<double> u;
  for (int k = 0; k < points; ++k) u.push_back(static_cast<double>(k) / (points - 1));
  if (const auto* pl = std::get_if<Polyline>(&c); pl && pl->points.size() > 2) {
    for (std::size_t k = 1; k + 1 < pl->points.size(); ++k) u.push_back(static_cast<double>(k) / (pl->points.size() - 1));
    std::sort(u.begin(), u.end());
    u.erase(std::unique(u.begin(), u.end()), u.end());
  }
  return u;
}

/// Mean and max distance from the chord interpolant of `params` (at `probes` uniform positions)
/// to the analytic curve.
inline std::pair<double, double> interpolant_deviation(const CurveGeom& c, const std::vector<double>& params, int probes) {
  std::vector<Point3> pts;
  for (double u : params) pts.push_back(evaluate(c, u));
  const std::size_t segs = pts.size() - 1;
  double sum = 0.0, mx = 0.0;
  for (int j = 0; j < probes; ++j) {
    const double s = (j + 0.5) / probes * static_cast<double>(segs);
    const std::size_t k = std::min(static_cast<std::size_t>(s), segs - 1);
    const double f = s - static_cast<double>(k);
    const Point3 q = lerp(pts[k], pts[k + 1], f);
    const double u = params[k] + f * (params[k + 1] - params[k]);
    const double width = 2.0 * (params[k + 1] - params[k]);
    const double d = distance(evaluate(c, closest_parameter(c, q, u - width, u + width)), q);
    sum += d;
    mx = std::max(mx, d);
  }
  return {sum / probes, mx};
}

}  // namespace detail

inline CurveError curve_error(const std::vector<CurveGeom>& curves, int samples_per_curve = 100, int chord_segments = 32, int probes = 1000) {
  if (samples_per_curve < 2 || chord_segments < 1) throw Error(ErrorKind::kPrecondition, "curve discretization needs >= 2 points");
  CurveError out;
  for (const CurveGeom& c : curves) {
    out.sampled += detail::interpolant_deviation(c, detail::discretization(c, samples_per_curve), probes).first;
    std::vector<double> chord;
    for (int k = 0; k <= chord_segments; ++k) chord.push_back(static_cast<double>(k) / chord_segments);
    const auto [mean, mx] = detail::interpolant_deviation(c, chord, probes);
    out.chordal += mean;
    out.chordal_max = std::max(out.chordal_max, mx);
    ++out.curves;
  }
  if (out.curves > 0) {
    out.sampled /= out.curves;
    out.chordal /= out.curves;
  }
  return out;
}

inline CurveError curve_error(const BrepModel& m, int samples_per_curve = 100, int chord_segments = 32, int probes = 1000) {
  std::vector<CurveGeom> curves;
  for (const Edge& e : m.edges) curves.push_back(e.curve);
  return curve_error(curves, samples_per_curve, chord_segments, probes);
}

}  // namespace brepseq
