#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <variant>
#include <vector>

#include "brepseq/geometry.hpp"

namespace brepseq {

// All curves are parameterized over [0, 1].

struct LineSegment {
  Point3 start;
  Point3 end;
};

/// center + radius * (cos(span*u) * x_axis + sin(span*u) * y_axis); axes orthonormal.
struct CircularArc {
  Point3 center;
  double radius = 1.0;
  Vec3 x_axis{1, 0, 0};
  Vec3 y_axis{0, 1, 0};
  double span = kPi;
};

struct CubicBezier {
  std::array<Point3, 4> control;
};

/// Piecewise-linear curve; vertex k sits at parameter k / (points.size() - 1).
struct Polyline {
  std::vector<Point3> points;
};

using CurveGeom = std::variant<LineSegment, CircularArc, CubicBezier, Polyline>;

inline std::string_view curve_kind_name(const CurveGeom& c) {
  static constexpr std::array<std::string_view, 4> kNames = {"line", "arc", "bezier", "polyline"};
  return kNames[c.index()];
}

namespace detail {

inline Point3 bezier(const std::array<Point3, 4>& p, double u) {
  const double s = 1.0 - u;
  return p[0] * (s * s * s) + p[1] * (3 * s * s * u) + p[2] * (3 * s * u * u) + p[3] * (u * u * u);
}

inline Vec3 bezier_derivative(const std::array<Point3, 4>& p, double u) {
  const double s = 1.0 - u;
  return (p[1] - p[0]) * (3 * s * s) + (p[2] - p[1]) * (6 * s * u) + (p[3] - p[2]) * (3 * u * u);
}

inline Point3 polyline_at(const std::vector<Point3>& pts, double u) {
  if (pts.empty()) throw Error(ErrorKind::kInvalidGeometry, "empty polyline");
  if (pts.size() == 1) return pts.front();
  const auto segments = static_cast<double>(pts.size() - 1);
  double s = std::clamp(u, 0.0, 1.0) * segments;
  const double snapped = std::round(s);
  if (std::abs(s - snapped) < 1e-9) return pts[static_cast<std::size_t>(snapped)];
  auto i = static_cast<std::size_t>(std::floor(s));
  if (i >= pts.size() - 1) i = pts.size() - 2;
  return lerp(pts[i], pts[i + 1], s - static_cast<double>(i));
}

}  // namespace detail

inline Point3 evaluate(const CurveGeom& curve, double u) {
  return std::visit(
      [u](const auto& c) -> Point3 {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LineSegment>) {
          return lerp(c.start, c.end, u);
        } else if constexpr (std::is_same_v<T, CircularArc>) {
          const double a = c.span * u;
          return c.center + (c.x_axis * std::cos(a) + c.y_axis * std::sin(a)) * c.radius;
        } else if constexpr (std::is_same_v<T, CubicBezier>) {
          return detail::bezier(c.control, u);
        } else {
          return detail::polyline_at(c.points, u);
        }
      },
      curve);
}

inline Vec3 derivative(const CurveGeom& curve, double u) {
  return std::visit(
      [u](const auto& c) -> Vec3 {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LineSegment>) {
          return c.end - c.start;
        } else if constexpr (std::is_same_v<T, CircularArc>) {
          const double a = c.span * u;
          return (c.y_axis * std::cos(a) - c.x_axis * std::sin(a)) * (c.radius * c.span);
        } else if constexpr (std::is_same_v<T, CubicBezier>) {
          return detail::bezier_derivative(c.control, u);
        } else {
          const auto& p = c.points;
          if (p.size() < 2) return {};
          const auto segments = static_cast<double>(p.size() - 1);
          auto i = static_cast<std::size_t>(std::floor(std::clamp(u, 0.0, 1.0) * segments));
          if (i >= p.size() - 1) i = p.size() - 2;
          return (p[i + 1] - p[i]) * segments;
        }
      },
      curve);
}

inline Point3 start_point(const CurveGeom& c) { return evaluate(c, 0.0); }
inline Point3 end_point(const CurveGeom& c) { return evaluate(c, 1.0); }

/// Arclength by chord summation over `segments` pieces.
inline double approximate_length(const CurveGeom& curve, int segments = 256) {
  if (const auto* poly = std::get_if<Polyline>(&curve)) {
    double len = 0.0;
    for (std::size_t i = 1; i < poly->points.size(); ++i) len += distance(poly->points[i - 1], poly->points[i]);
    return len;
  }
  double len = 0.0;
  Point3 prev = evaluate(curve, 0.0);
  for (int i = 1; i <= segments; ++i) {
    const Point3 p = evaluate(curve, static_cast<double>(i) / segments);
    len += distance(prev, p);
    prev = p;
  }
  return len;
}

inline CurveGeom transformed(const CurveGeom& curve, const Similarity& t) {
  return std::visit(
      [&t](const auto& c) -> CurveGeom {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, LineSegment>) {
          return LineSegment{t.apply(c.start), t.apply(c.end)};
        } else if constexpr (std::is_same_v<T, CircularArc>) {
          CircularArc a = c;
          a.center = t.apply(c.center);
          a.radius = c.radius * t.scale;
          return a;
        } else if constexpr (std::is_same_v<T, CubicBezier>) {
          CubicBezier b = c;
          for (auto& p : b.control) p = t.apply(p);
          return b;
        } else {
          Polyline p = c;
          for (auto& q : p.points) q = t.apply(q);
          return p;
        }
      },
      curve);
}

/// Closest parameter of `curve` to `p`, searched inside [lo, hi] by dense scan plus golden refinement.
inline double closest_parameter(const CurveGeom& curve, Point3 p, double lo = 0.0, double hi = 1.0) {
  lo = std::clamp(lo, 0.0, 1.0);
  hi = std::clamp(hi, 0.0, 1.0);
  constexpr int kScan = 32;
  double best_u = lo;
  double best_d = squared_distance(evaluate(curve, lo), p);
  for (int i = 1; i <= kScan; ++i) {
    const double u = lo + (hi - lo) * i / kScan;
    const double d = squared_distance(evaluate(curve, u), p);
    if (d < best_d) {
      best_d = d;
      best_u = u;
    }
  }
  double a = std::max(lo, best_u - (hi - lo) / kScan);
  double b = std::min(hi, best_u + (hi - lo) / kScan);
  constexpr double kInvPhi = 0.6180339887498949;
  for (int it = 0; it < 80 && b - a > 1e-15; ++it) {
    const double c = b - (b - a) * kInvPhi;
    const double d = a + (b - a) * kInvPhi;
    if (squared_distance(evaluate(curve, c), p) < squared_distance(evaluate(curve, d), p)) {
      b = d;
    } else {
      a = c;
    }
  }
  const double u = 0.5 * (a + b);
  return squared_distance(evaluate(curve, u), p) < best_d ? u : best_u;
}

}  // namespace brepseq
