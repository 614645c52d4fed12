#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string_view>
#include <variant>

#include "brepseq/geometry.hpp"

namespace brepseq {

struct ParamDomain {
  double u0 = 0.0;
  double u1 = 1.0;
  double v0 = 0.0;
  double v1 = 1.0;

  double width() const { return u1 - u0; }
  double height() const { return v1 - v0; }
  Vec2 center() const { return {0.5 * (u0 + u1), 0.5 * (v0 + v1)}; }
  bool contains(Vec2 p, double tol = 0.0) const {
    return p.u >= u0 - tol && p.u <= u1 + tol && p.v >= v0 - tol && p.v <= v1 + tol;
  }
  Vec2 clamp(Vec2 p) const { return {std::clamp(p.u, u0, u1), std::clamp(p.v, v0, v1)}; }
  friend bool operator==(const ParamDomain&, const ParamDomain&) = default;
};

/// origin + u * u_axis + v * v_axis.
struct Plane {
  Point3 origin;
  Vec3 u_axis{1, 0, 0};
  Vec3 v_axis{0, 1, 0};
};

/// base + radius * (cos u * x_axis + sin u * (axis x x_axis)) + v * axis. u is an angle.
struct CylinderPatch {
  Point3 base;
  Vec3 axis{0, 0, 1};
  Vec3 x_axis{1, 0, 0};
  double radius = 1.0;
};

/// center + radius * (cos v cos u * x + cos v sin u * (z x x) + sin v * z). u longitude, v latitude.
struct SpherePatch {
  Point3 center;
  Vec3 z_axis{0, 0, 1};
  Vec3 x_axis{1, 0, 0};
  double radius = 1.0;
};

/// Tensor-product Bernstein patch; control[i * 4 + j] weights B_i(u) B_j(v).
struct BicubicPatch {
  std::array<Point3, 16> control;
};

using SurfaceShape = std::variant<Plane, CylinderPatch, SpherePatch, BicubicPatch>;

struct SurfaceGeom {
  SurfaceShape shape;
  ParamDomain domain;
  /// Flips the normal relative to Su x Sv.
  bool reversed = false;
};

inline std::string_view surface_kind_name(const SurfaceShape& s) {
  static constexpr std::array<std::string_view, 4> kNames = {"plane", "cylinder", "sphere", "bicubic"};
  return kNames[s.index()];
}

struct SurfacePoint {
  Point3 point;
  Vec3 du;
  Vec3 dv;
};

namespace detail {

inline std::array<double, 4> bernstein3(double t) {
  const double s = 1.0 - t;
  return {s * s * s, 3 * s * s * t, 3 * s * t * t, t * t * t};
}

inline std::array<double, 4> bernstein3_derivative(double t) {
  const double s = 1.0 - t;
  return {-3 * s * s, 3 * s * s - 6 * s * t, 6 * s * t - 3 * t * t, 3 * t * t};
}

}  // namespace detail

inline SurfacePoint evaluate_with_partials(const SurfaceShape& shape, double u, double v) {
  return std::visit(
      [u, v](const auto& s) -> SurfacePoint {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Plane>) {
          return {s.origin + s.u_axis * u + s.v_axis * v, s.u_axis, s.v_axis};
        } else if constexpr (std::is_same_v<T, CylinderPatch>) {
          const Vec3 y = cross(s.axis, s.x_axis);
          const Vec3 radial = s.x_axis * std::cos(u) + y * std::sin(u);
          const Vec3 tangent = y * std::cos(u) - s.x_axis * std::sin(u);
          return {s.base + radial * s.radius + s.axis * v, tangent * s.radius, s.axis};
        } else if constexpr (std::is_same_v<T, SpherePatch>) {
          const Vec3 y = cross(s.z_axis, s.x_axis);
          const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
          const Vec3 radial = s.x_axis * (cv * cu) + y * (cv * su) + s.z_axis * sv;
          const Vec3 du = (y * cu - s.x_axis * su) * (s.radius * cv);
          const Vec3 dv = (s.z_axis * cv - (s.x_axis * cu + y * su) * sv) * s.radius;
          return {s.center + radial * s.radius, du, dv};
        } else {
          const auto bu = detail::bernstein3(u), bv = detail::bernstein3(v);
          const auto du = detail::bernstein3_derivative(u), dv = detail::bernstein3_derivative(v);
          SurfacePoint out{};
          for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
              const Point3& c = s.control[i * 4 + j];
              out.point += c * (bu[i] * bv[j]);
              out.du += c * (du[i] * bv[j]);
              out.dv += c * (bu[i] * dv[j]);
            }
          }
          return out;
        }
      },
      shape);
}

inline Point3 evaluate(const SurfaceGeom& s, Vec2 uv) { return evaluate_with_partials(s.shape, uv.u, uv.v).point; }

/// Unit normal at (u, v); throws at degenerate points such as sphere poles.
inline Vec3 unit_normal(const SurfaceGeom& s, Vec2 uv) {
  const SurfacePoint sp = evaluate_with_partials(s.shape, uv.u, uv.v);
  const Vec3 n = cross(sp.du, sp.dv);
  const double big = std::max(norm(sp.du), norm(sp.dv));
  const double len = norm(n);
  if (!(len > 1e-10 * big * big) || len < 1e-300) {
    throw Error(ErrorKind::kInvalidGeometry, "surface normal undefined at a degenerate point");
  }
  return (s.reversed ? -n : n) / len;
}

/// Parameters of the surface point closest to p (for on-surface points, the exact preimage).
/// Periodic angles are unwrapped toward the domain.
inline Vec2 inverse_evaluate(const SurfaceGeom& s, Point3 p) {
  const ParamDomain& dom = s.domain;
  auto unwrap = [](double angle, double lo, double hi) {
    const double mid = 0.5 * (lo + hi);
    return angle + 2.0 * kPi * std::round((mid - angle) / (2.0 * kPi));
  };
  return std::visit(
      [&](const auto& g) -> Vec2 {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Plane>) {
          const Vec3 d = p - g.origin;
          const double a = dot(g.u_axis, g.u_axis), b = dot(g.u_axis, g.v_axis), c = dot(g.v_axis, g.v_axis);
          const double r0 = dot(d, g.u_axis), r1 = dot(d, g.v_axis);
          const double det = a * c - b * b;
          return {(c * r0 - b * r1) / det, (a * r1 - b * r0) / det};
        } else if constexpr (std::is_same_v<T, CylinderPatch>) {
          const Vec3 d = p - g.base;
          const Vec3 y = cross(g.axis, g.x_axis);
          const double angle = std::atan2(dot(d, y), dot(d, g.x_axis));
          return {unwrap(angle, dom.u0, dom.u1), dot(d, g.axis)};
        } else if constexpr (std::is_same_v<T, SpherePatch>) {
          const Vec3 d = p - g.center;
          const Vec3 y = cross(g.z_axis, g.x_axis);
          const double lon = std::atan2(dot(d, y), dot(d, g.x_axis));
          const double lat = std::atan2(dot(d, g.z_axis), std::hypot(dot(d, g.x_axis), dot(d, y)));
          return {unwrap(lon, dom.u0, dom.u1), lat};
        } else {
          // Seed from a grid, then damped Gauss-Newton clamped to the domain.
          constexpr int kGrid = 16;
          Vec2 best{dom.u0, dom.v0};
          double best_d = INFINITY;
          for (int i = 0; i <= kGrid; ++i) {
            for (int j = 0; j <= kGrid; ++j) {
              const Vec2 uv{dom.u0 + dom.width() * i / kGrid, dom.v0 + dom.height() * j / kGrid};
              const double d = squared_distance(evaluate_with_partials(g, uv.u, uv.v).point, p);
              if (d < best_d) {
                best_d = d;
                best = uv;
              }
            }
          }
          for (int it = 0; it < 50; ++it) {
            const SurfacePoint sp = evaluate_with_partials(g, best.u, best.v);
            const Vec3 r = sp.point - p;
            const double a = dot(sp.du, sp.du), b = dot(sp.du, sp.dv), c = dot(sp.dv, sp.dv);
            const double g0 = dot(r, sp.du), g1 = dot(r, sp.dv);
            const double det = a * c - b * b;
            if (std::abs(det) < 1e-300) break;
            Vec2 step{(c * g0 - b * g1) / det, (a * g1 - b * g0) / det};
            Vec2 next = dom.clamp(best - step);
            double d_next = squared_distance(evaluate_with_partials(g, next.u, next.v).point, p);
            double d_cur = dot(r, r);
            int halvings = 0;
            while (d_next > d_cur && halvings < 20) {
              step = step * 0.5;
              next = dom.clamp(best - step);
              d_next = squared_distance(evaluate_with_partials(g, next.u, next.v).point, p);
              ++halvings;
            }
            if (d_next > d_cur) break;
            const bool converged = norm(next - best) < 1e-15;
            best = next;
            if (converged) break;
          }
          return best;
        }
      },
      s.shape);
}

inline SurfaceGeom transformed(const SurfaceGeom& surface, const Similarity& t) {
  SurfaceGeom out = surface;
  std::visit(
      [&](auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, Plane>) {
          g.origin = t.apply(g.origin);
          g.u_axis = g.u_axis * t.scale;
          g.v_axis = g.v_axis * t.scale;
        } else if constexpr (std::is_same_v<T, CylinderPatch>) {
          g.base = t.apply(g.base);
          g.radius *= t.scale;
          out.domain.v0 *= t.scale;
          out.domain.v1 *= t.scale;
        } else if constexpr (std::is_same_v<T, SpherePatch>) {
          g.center = t.apply(g.center);
          g.radius *= t.scale;
        } else {
          for (auto& c : g.control) c = t.apply(c);
        }
      },
      out.shape);
  return out;
}

}  // namespace brepseq
