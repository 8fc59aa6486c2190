// Quadrature on segments, triangles and fan-triangulated polygons.

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ghostmg/geometry.hpp"

namespace ghostmg {

struct QuadPoint {
  Point x;
  double w;
};

/// 3-point Gauss-Legendre on the segment [p, q] (exact to degree 5).
inline std::array<QuadPoint, 3> gauss3_segment(const Point& p, const Point& q) {
  const double s = 0.5 * std::sqrt(0.6);
  const double len = norm(q - p);
  const Point d = q - p;
  return {{{p + (0.5 - s) * d, len * 5.0 / 18.0},
           {p + 0.5 * d, len * 8.0 / 18.0},
           {p + (0.5 + s) * d, len * 5.0 / 18.0}}};
}

inline double triangle_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

/// Edge-midpoint rule, exact to degree 2. Weights carry |T|.
inline std::array<QuadPoint, 3> triangle_rule_deg2(const Point& a, const Point& b, const Point& c) {
  const double w = std::abs(triangle_area(a, b, c)) / 3.0;
  return {{{0.5 * (a + b), w}, {0.5 * (b + c), w}, {0.5 * (c + a), w}}};
}

/// Six-point symmetric rule exact to degree 4.
inline std::array<QuadPoint, 6> triangle_rule_deg4(const Point& a, const Point& b, const Point& c) {
  constexpr double w1 = 0.223381589678011465944;
  constexpr double a1 = 0.445948490915964886318;
  constexpr double b1 = 0.108103018168070227364;
  constexpr double w2 = 0.109951743655321867389;
  constexpr double a2 = 0.091576213509770743460;
  constexpr double b2 = 0.816847572980458513080;
  const double area = std::abs(triangle_area(a, b, c));
  auto bary = [&](double l0, double l1, double l2) {
    return Point{l0 * a[0] + l1 * b[0] + l2 * c[0], l0 * a[1] + l1 * b[1] + l2 * c[1]};
  };
  return {{{bary(a1, a1, b1), w1 * area},
           {bary(a1, b1, a1), w1 * area},
           {bary(b1, a1, a1), w1 * area},
           {bary(a2, a2, b2), w2 * area},
           {bary(a2, b2, a2), w2 * area},
           {bary(b2, a2, a2), w2 * area}}};
}

inline Point vertex_centroid(const std::vector<Point>& poly) {
  Point c{0.0, 0.0};
  for (const auto& p : poly) c = c + p;
  return (1.0 / static_cast<double>(poly.size())) * c;
}

/// Quadrature points on a convex polygon, fan-triangulated from its vertex
/// centroid. degree selects the triangle rule (2 or 4).
inline std::vector<QuadPoint> polygon_rule(const std::vector<Point>& poly, int degree) {
  if (poly.size() < 3) throw std::invalid_argument("polygon_rule: fewer than 3 vertices");
  const Point c = vertex_centroid(poly);
  std::vector<QuadPoint> pts;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point& a = poly[i];
    const Point& b = poly[(i + 1) % poly.size()];
    if (degree <= 2) {
      for (const auto& q : triangle_rule_deg2(c, a, b)) pts.push_back(q);
    } else {
      for (const auto& q : triangle_rule_deg4(c, a, b)) pts.push_back(q);
    }
  }
  return pts;
}

/// 3-point Gauss on a 1D interval [p, q] along the x axis.
inline std::array<QuadPoint, 3> gauss3_interval(double p, double q) {
  return gauss3_segment({p, 0.0}, {q, 0.0});
}

}  // namespace ghostmg
