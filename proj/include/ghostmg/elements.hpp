// Cell-local Q1 (P1 in 1D) kernels on cut and uncut cells.

#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "ghostmg/geometry.hpp"
#include "ghostmg/numerics.hpp"
#include "ghostmg/quadrature.hpp"

namespace ghostmg {

using ScalarField = std::function<double(const Point&)>;
/// Neumann data may depend on the outward normal (manufactured fluxes).
using FluxField = std::function<double(const Point& x, const Point& normal)>;

/// Reference frame of one background cell.
struct CellFrame {
  int dim = 2;
  Point origin{0.0, 0.0};
  double h = 1.0;

  std::size_t nloc() const { return dim == 1 ? 2 : 4; }

  static CellFrame of(const CartesianGrid& grid, std::size_t cell) {
    return {grid.dim(), grid.cell_origin(cell), grid.h()};
  }
};

inline std::array<double, 4> shape_values(const CellFrame& f, const Point& x) {
  const double xi = (x[0] - f.origin[0]) / f.h;
  if (f.dim == 1) return {1.0 - xi, xi, 0.0, 0.0};
  const double eta = (x[1] - f.origin[1]) / f.h;
  return {(1.0 - xi) * (1.0 - eta), xi * (1.0 - eta), (1.0 - xi) * eta, xi * eta};
}

inline std::array<Point, 4> shape_gradients(const CellFrame& f, const Point& x) {
  const double s = 1.0 / f.h;
  const double xi = (x[0] - f.origin[0]) / f.h;
  if (f.dim == 1) return {Point{-s, 0.0}, Point{s, 0.0}, Point{}, Point{}};
  const double eta = (x[1] - f.origin[1]) / f.h;
  return {Point{-(1.0 - eta) * s, -(1.0 - xi) * s}, Point{(1.0 - eta) * s, -xi * s},
          Point{-eta * s, (1.0 - xi) * s}, Point{eta * s, xi * s}};
}

/// Measure of the interior part: polygon area in 2D, segment length in 1D.
inline double interior_measure(const CellFrame& f, const std::vector<Point>& poly) {
  if (f.dim == 1) return std::abs(poly.at(1)[0] - poly.at(0)[0]);
  return std::abs(polygon_area(poly));
}

inline std::vector<Point> full_cell_polygon(const CellFrame& f) {
  const Point o = f.origin;
  if (f.dim == 1) return {o, o + Point{f.h, 0.0}};
  return {o, o + Point{f.h, 0.0}, o + Point{f.h, f.h}, o + Point{0.0, f.h}};
}

/// ∫_{poly} ∇φ_i·∇φ_j exactly (integrand of degree 2).
inline DenseMatrix q1_cell_stiffness(const CellFrame& f, const std::vector<Point>& poly) {
  const std::size_t n = f.nloc();
  DenseMatrix K(n, n);
  if (poly.empty()) return K;
  if (f.dim == 1) {
    const double len = interior_measure(f, poly);
    const double s = len / (f.h * f.h);
    K(0, 0) = K(1, 1) = s;
    K(0, 1) = K(1, 0) = -s;
    return K;
  }
  if (interior_measure(f, poly) < 1e-14 * f.h * f.h) {
    throw std::domain_error("q1_cell_stiffness: degenerate polygon");
  }
  for (const auto& q : polygon_rule(poly, 2)) {
    const auto g = shape_gradients(f, q.x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j) K(i, j) += q.w * dot(g[i], g[j]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) K(i, j) = K(j, i);
  return K;
}

/// Quadrature on the boundary chord of a cut cell. In 1D the chord is a
/// point and the rule is evaluation there.
inline std::vector<QuadPoint> chord_rule(const CutCellGeometry& g) {
  if (g.shape == CutShape::Segment) return {{g.chord_a, 1.0}};
  if (g.chord_length() <= 0.0) throw std::domain_error("chord_rule: zero-length chord");
  const auto r = gauss3_segment(g.chord_a, g.chord_b);
  return {r.begin(), r.end()};
}

struct ChordTerms {
  DenseMatrix consistency;  // B_ij = -∫ (n·∇φ_j) φ_i
  DenseMatrix penalty;      // λ ∫ φ_i φ_j
};

inline ChordTerms nitsche_chord_terms(const CellFrame& f, const CutCellGeometry& g, double lambda) {
  const std::size_t n = f.nloc();
  ChordTerms t{DenseMatrix(n, n), DenseMatrix(n, n)};
  for (const auto& q : chord_rule(g)) {
    const auto phi = shape_values(f, q.x);
    const auto grad = shape_gradients(f, q.x);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        t.consistency(i, j) -= q.w * dot(g.normal, grad[j]) * phi[i];
        t.penalty(i, j) += q.w * lambda * phi[i] * phi[j];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) t.penalty(i, j) = t.penalty(j, i);
  return t;
}

/// K_ij = ∫ (n·∇φ_i)(n·∇φ_j) over the chord.
inline DenseMatrix chord_flux_matrix(const CellFrame& f, const CutCellGeometry& g) {
  const std::size_t n = f.nloc();
  DenseMatrix K(n, n);
  for (const auto& q : chord_rule(g)) {
    const auto grad = shape_gradients(f, q.x);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i; j < n; ++j)
        K(i, j) += q.w * dot(g.normal, grad[i]) * dot(g.normal, grad[j]);
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) K(i, j) = K(j, i);
  return K;
}

/// ∫_{poly} f φ_i.
inline Vector source_vector(const CellFrame& f, const std::vector<Point>& poly,
                            const ScalarField& src) {
  Vector b(f.nloc(), 0.0);
  if (!src || poly.empty()) return b;
  auto add = [&](const QuadPoint& q) {
    const auto phi = shape_values(f, q.x);
    const double fx = src(q.x);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += q.w * fx * phi[i];
  };
  if (f.dim == 1) {
    for (const auto& q : gauss3_interval(poly.at(0)[0], poly.at(1)[0])) add(q);
  } else {
    for (const auto& q : polygon_rule(poly, 4)) add(q);
  }
  return b;
}

struct DirichletLoad {
  Vector penalty;      // λ ∫ g φ_i
  Vector consistency;  // -∫ g n·∇φ_i
};

inline DirichletLoad dirichlet_load(const CellFrame& f, const CutCellGeometry& g, double lambda,
                                    const ScalarField& gd) {
  DirichletLoad out{Vector(f.nloc(), 0.0), Vector(f.nloc(), 0.0)};
  if (!gd) return out;
  for (const auto& q : chord_rule(g)) {
    const double gv = gd(q.x);
    const auto phi = shape_values(f, q.x);
    const auto grad = shape_gradients(f, q.x);
    for (std::size_t i = 0; i < f.nloc(); ++i) {
      out.penalty[i] += q.w * lambda * gv * phi[i];
      out.consistency[i] -= q.w * gv * dot(g.normal, grad[i]);
    }
  }
  return out;
}

inline Vector neumann_load(const CellFrame& f, const CutCellGeometry& g, const FluxField& gn) {
  Vector b(f.nloc(), 0.0);
  if (!gn) return b;
  for (const auto& q : chord_rule(g)) {
    const double gv = gn(q.x, g.normal);
    const auto phi = shape_values(f, q.x);
    for (std::size_t i = 0; i < f.nloc(); ++i) b[i] += q.w * gv * phi[i];
  }
  return b;
}

}  // namespace ghostmg
