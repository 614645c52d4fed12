#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace brepseq {

/// Error categories. Each maps onto a CLI exit code (see tools/brepseq.cpp).
enum class ErrorKind {
  kInvalidGeometry,
  kRange,
  kCapacity,
  kGrammar,
  kFormat,
  kPrecondition,
  kInfeasible,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }
  constexpr double& operator[](int axis) { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend constexpr Point3 operator+(Point3 a, Point3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Point3 operator-(Point3 a, Point3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Point3 operator-(Point3 a) { return {-a.x, -a.y, -a.z}; }
  friend constexpr Point3 operator*(Point3 a, double s) { return {a.x * s, a.y * s, a.z * s}; }
  friend constexpr Point3 operator*(double s, Point3 a) { return a * s; }
  friend constexpr Point3 operator/(Point3 a, double s) { return {a.x / s, a.y / s, a.z / s}; }
  Point3& operator+=(Point3 b) { x += b.x; y += b.y; z += b.z; return *this; }
  Point3& operator-=(Point3 b) { x -= b.x; y -= b.y; z -= b.z; return *this; }
  Point3& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }
  friend constexpr bool operator==(Point3 a, Point3 b) = default;
};

using Vec3 = Point3;

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
constexpr double squared_norm(Vec3 a) { return dot(a, a); }
inline double distance(Point3 a, Point3 b) { return norm(a - b); }
constexpr double squared_distance(Point3 a, Point3 b) { return squared_norm(a - b); }
constexpr Point3 lerp(Point3 a, Point3 b, double t) { return a + (b - a) * t; }

inline Vec3 normalized(Vec3 a) {
  const double n = norm(a);
  if (n == 0.0) throw Error(ErrorKind::kInvalidGeometry, "cannot normalize a zero vector");
  return a / n;
}

inline bool is_finite(Point3 p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

struct Vec2 {
  double u = 0.0;
  double v = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.u + b.u, a.v + b.v}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.u - b.u, a.v - b.v}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {a.u * s, a.v * s}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return a * s; }
  friend constexpr bool operator==(Vec2 a, Vec2 b) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.u * b.u + a.v * b.v; }
constexpr double cross(Vec2 a, Vec2 b) { return a.u * b.v - a.v * b.u; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }

/// Squared distance from p to segment [a, b].
inline double squared_distance_to_segment(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  const Vec2 d = p - (a + ab * t);
  return dot(d, d);
}

inline double squared_distance_to_segment(Point3 p, Point3 a, Point3 b) {
  const Vec3 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0.0 ? dot(p - a, ab) / len2 : 0.0;
  t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
  return squared_distance(p, a + ab * t);
}

/// Uniform-scale-plus-offset map p -> p * scale + offset.
struct Similarity {
  double scale = 1.0;
  Vec3 offset{};

  Point3 apply(Point3 p) const { return p * scale + offset; }
  Point3 invert(Point3 p) const { return (p - offset) / scale; }
};

inline constexpr double kPi = 3.14159265358979323846;

/// Structural coordinate tolerance in normalized units.
inline constexpr double kStructuralTolerance = 1e-9;

}  // namespace brepseq
