#include <gtest/gtest.h>

#include <cmath>

#include "brepseq/curve.hpp"
#include "brepseq/surface.hpp"
#include "brepseq/util.hpp"

using namespace brepseq;

namespace {

void expect_near(Point3 a, Point3 b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(Curve, LineIsAffineInParameter) {
  const CurveGeom c = LineSegment{{0, 0, 0}, {2, 4, -2}};
  for (int k = 0; k <= 10; ++k) {
    const double u = k / 10.0;
    expect_near(evaluate(c, u), {2 * u, 4 * u, -2 * u}, 1e-15);
  }
  expect_near(derivative(c, 0.3), {2, 4, -2}, 1e-15);
}

TEST(Curve, ArcMatchesTrigonometry) {
  CircularArc a;
  a.center = {1, 1, 0};
  a.radius = 0.5;
  a.span = kPi / 2;
  const CurveGeom c = a;
  for (int k = 0; k <= 8; ++k) {
    const double u = k / 8.0;
    const double t = u * kPi / 2;
    expect_near(evaluate(c, u), {1 + 0.5 * std::cos(t), 1 + 0.5 * std::sin(t), 0}, 1e-15);
  }
  // quarter arc of radius 0.5
  EXPECT_NEAR(approximate_length(c, 4096), kPi / 4, 1e-6);
}

TEST(Curve, BezierEndpointsAndMidpoint) {
  const CurveGeom c = CubicBezier{{Point3{0, 0, 0}, Point3{1, 2, 0}, Point3{3, 2, 0}, Point3{4, 0, 0}}};
  expect_near(start_point(c), {0, 0, 0}, 0);
  expect_near(end_point(c), {4, 0, 0}, 0);
  // (P0 + 3P1 + 3P2 + P3) / 8
  expect_near(evaluate(c, 0.5), {2, 1.5, 0}, 1e-15);
}

TEST(Curve, PolylineVertexParameters) {
  const CurveGeom c = Polyline{{{0, 0, 0}, {1, 0, 0}, {1, 1, 0}}};
  expect_near(evaluate(c, 0.5), {1, 0, 0}, 1e-15);
  expect_near(evaluate(c, 0.75), {1, 0.5, 0}, 1e-15);
  EXPECT_DOUBLE_EQ(approximate_length(c), 2.0);
}

TEST(Curve, ClosestParameterOnArc) {
  CircularArc a;
  a.span = kPi;
  const CurveGeom c = a;
  const double u = closest_parameter(c, {0.0, 3.0, 0.0});
  EXPECT_NEAR(u, 0.5, 1e-9);
}

TEST(Curve, SimilarityTransformsArcRadius) {
  CircularArc a;
  a.radius = 2.0;
  const Similarity t{0.25, {1, 0, 0}};
  const CurveGeom c = transformed(CurveGeom{a}, t);
  for (int k = 0; k <= 4; ++k) expect_near(evaluate(c, k / 4.0), t.apply(evaluate(CurveGeom{a}, k / 4.0)), 1e-15);
}

TEST(Surface, PlaneEvaluation) {
  const SurfaceGeom s{Plane{}, {0, 1, 0, 1}, false};
  expect_near(evaluate(s, {0.3, 0.7}), {0.3, 0.7, 0}, 0);
  expect_near(unit_normal(s, {0.3, 0.7}), {0, 0, 1}, 0);
  SurfaceGeom r = s;
  r.reversed = true;
  expect_near(unit_normal(r, {0.3, 0.7}), {0, 0, -1}, 0);
}

TEST(Surface, CylinderRadialNormal) {
  CylinderPatch c;
  c.radius = 0.5;
  const SurfaceGeom s{c, {0, 2 * kPi, 0, 1}, false};
  expect_near(evaluate(s, {0, 0.2}), {0.5, 0, 0.2}, 1e-15);
  expect_near(unit_normal(s, {0, 0.2}), {1, 0, 0}, 1e-15);
}

TEST(Surface, PlanarBicubicStaysInPlane) {
  BicubicPatch b;
  Rng rng(3);
  for (auto& p : b.control) p = {rng.uniform(), rng.uniform(), 1.0};
  const SurfaceGeom s{b, {0, 1, 0, 1}, false};
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) EXPECT_DOUBLE_EQ(evaluate(s, {i / 10.0, j / 10.0}).z, 1.0);
  }
}

TEST(Surface, BicubicReproducesBilinearNet) {
  // control points on the bilinear map (u, v) -> (u, v, u v) are at (i/3, j/3, ij/9)
  BicubicPatch b;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) b.control[i * 4 + j] = {i / 3.0, j / 3.0, i * j / 9.0};
  }
  const SurfaceGeom s{b, {0, 1, 0, 1}, false};
  expect_near(evaluate(s, {0.2, 0.9}), {0.2, 0.9, 0.18}, 1e-14);
}

TEST(Surface, SpherePoleIsDegenerate) {
  const SurfaceGeom s{SpherePatch{}, {0, 2 * kPi, -kPi / 2, kPi / 2}, false};
  EXPECT_NO_THROW(unit_normal(s, {0.5, 0.0}));
  try {
    unit_normal(s, {0.5, kPi / 2});
    FAIL() << "expected an error at the pole";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidGeometry);
  }
}

TEST(Surface, InverseEvaluateRoundTrips) {
  CylinderPatch c;
  c.radius = 0.3;
  c.base = {0.5, 0.5, 0.1};
  const SurfaceGeom cyl{c, {0, 2 * kPi, 0, 0.5}, false};
  const SurfaceGeom sph{SpherePatch{{0.1, 0.2, 0.3}, {0, 0, 1}, {1, 0, 0}, 0.7}, {0, 2 * kPi, -1, 1}, false};
  BicubicPatch b;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) b.control[i * 4 + j] = {i / 3.0, j / 3.0, 0.1 * std::sin(i + j)};
  }
  const SurfaceGeom bic{b, {0, 1, 0, 1}, false};
  for (const SurfaceGeom* s : {&cyl, &sph, &bic}) {
    for (Vec2 uv : {Vec2{0.4, 0.2}, Vec2{0.9, 0.35}, Vec2{0.1, 0.05}}) {
      const Point3 p = evaluate(*s, uv);
      expect_near(evaluate(*s, inverse_evaluate(*s, p)), p, 1e-9);
    }
  }
}

TEST(Util, RngIsReproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.bits(), b.bits());
  Rng c(7);
  for (int i = 0; i < 1000; ++i) {
    const int k = c.integer(2, 5);
    EXPECT_GE(k, 2);
    EXPECT_LE(k, 5);
  }
}

TEST(Util, FnvKnownVector) {
  // FNV-1a 64 of "a"
  EXPECT_EQ(Fnv1a().str("a").value(), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(Fnv1a().str("").hex(), "cbf29ce484222325");
}
