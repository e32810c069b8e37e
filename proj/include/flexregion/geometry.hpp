#pragma once

// 2-D convex geometry for PQ-plane operating regions: regular polygons used
// as inner approximations of apparent-power circles, convex hulls of support
// points, and the translation of a region into linear constraints.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace flexregion {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Convex region in the (P, Q) plane, vertices in counterclockwise order.
// Degenerate regions are legal: one vertex is a point, two a segment.
struct PolygonRegion {
  std::vector<Vec2> vertices;
};

// Inscribed regular n-gon of the circle with the given radius, first vertex
// on the positive P axis. Inner approximation: its inradius is
// radius*cos(pi/n).
inline PolygonRegion regular_polygon(double radius, int n) {
  if (n < 3) throw std::invalid_argument("regular_polygon: need n >= 3");
  if (radius < 0.0) throw std::invalid_argument("regular_polygon: negative radius");
  PolygonRegion poly;
  poly.vertices.reserve(static_cast<std::size_t>(n));
  const double step = 2.0 * M_PI / n;
  for (int k = 0; k < n; ++k) {
    poly.vertices.push_back({radius * std::cos(k * step), radius * std::sin(k * step)});
  }
  return poly;
}

// Shoelace area of a simple polygon given in CCW order; fewer than three
// vertices enclose nothing.
inline double polygon_area(const std::vector<Vec2>& v) {
  if (v.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2& a = v[i];
    const Vec2& b = v[(i + 1) % v.size()];
    twice += cross(a, b);
  }
  return 0.5 * twice;
}

// Andrew monotone chain. Returns CCW hull without collinear interior points.
// Nearly coincident inputs (within dedupe_tol) collapse to one point, which
// keeps solver noise from producing sliver edges.
inline std::vector<Vec2> convex_hull(std::vector<Vec2> pts,
                                     double dedupe_tol = 1e-9,
                                     double turn_tol = 1e-12) {
  std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
    return a.x < b.x || (a.x == b.x && a.y < b.y);
  });
  std::vector<Vec2> uniq;
  for (const Vec2& p : pts) {
    if (uniq.empty() || norm(p - uniq.back()) > dedupe_tol) uniq.push_back(p);
  }
  if (uniq.size() <= 2) return uniq;

  std::vector<Vec2> hull(2 * uniq.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < uniq.size(); ++i) {  // lower chain
    while (k >= 2 && cross(hull[k - 1] - hull[k - 2], uniq[i] - hull[k - 2]) <= turn_tol) --k;
    hull[k++] = uniq[i];
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = uniq.size() - 1; i-- > 0;) {  // upper chain
    while (k >= lower && cross(hull[k - 1] - hull[k - 2], uniq[i] - hull[k - 2]) <= turn_tol) --k;
    hull[k++] = uniq[i];
  }
  hull.resize(k - 1);
  if (hull.size() == 2 && norm(hull[0] - hull[1]) <= dedupe_tol) hull.resize(1);
  return hull;
}

// How far p sits outside the region, measured as the largest violated
// halfplane distance (zero when inside). For degenerate regions this is the
// Euclidean distance to the point or segment.
inline double distance_outside(const PolygonRegion& poly, Vec2 p) {
  const auto& v = poly.vertices;
  if (v.empty()) throw std::invalid_argument("distance_outside: empty region");
  if (v.size() == 1) return norm(p - v[0]);
  if (v.size() == 2) {
    const Vec2 e = v[1] - v[0];
    const double len2 = dot(e, e);
    const double t = len2 > 0.0 ? std::clamp(dot(p - v[0], e) / len2, 0.0, 1.0) : 0.0;
    return norm(p - (v[0] + t * e));
  }
  double worst = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const Vec2 e = b - a;
    const double elen = norm(e);
    if (elen <= 0.0) continue;
    // outward normal of a CCW edge
    const Vec2 n{e.y / elen, -e.x / elen};
    worst = std::max(worst, dot(n, p - a));
  }
  return std::max(0.0, worst);
}

inline bool polygon_contains(const PolygonRegion& poly, Vec2 p, double tol = 1e-9) {
  return distance_outside(poly, p) <= tol;
}

inline bool is_convex_ccw(const std::vector<Vec2>& v, double tol = 1e-9) {
  if (v.size() <= 2) return true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const Vec2 c = v[(i + 2) % v.size()];
    if (cross(b - a, c - b) < -tol) return false;
  }
  return true;
}

// One linear condition a_p*P + a_q*Q {<=,=} rhs.
struct LinearCondition {
  double a_p = 0.0;
  double a_q = 0.0;
  double rhs = 0.0;
  bool equality = false;
};

// Region as a finite list of linear conditions. Full polygons become one
// inequality per edge; a segment becomes a collinearity equality plus two
// range inequalities; a single point becomes two equalities.
inline std::vector<LinearCondition> region_conditions(const PolygonRegion& poly) {
  const auto& v = poly.vertices;
  if (v.empty()) throw std::invalid_argument("region_conditions: empty region");
  std::vector<LinearCondition> out;
  if (v.size() == 1) {
    out.push_back({1.0, 0.0, v[0].x, true});
    out.push_back({0.0, 1.0, v[0].y, true});
    return out;
  }
  if (v.size() == 2) {
    const Vec2 a = v[0];
    const Vec2 e = v[1] - a;
    out.push_back({-e.y, e.x, cross(v[1], a), true});          // on the carrier line
    out.push_back({e.x, e.y, dot(e, a) + dot(e, e), false});   // not past v[1]
    out.push_back({-e.x, -e.y, -dot(e, a), false});            // not before v[0]
    return out;
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Vec2 a = v[i];
    const Vec2 b = v[(i + 1) % v.size()];
    const Vec2 e = b - a;
    out.push_back({e.y, -e.x, e.y * a.x - e.x * a.y, false});
  }
  return out;
}

}  // namespace flexregion
