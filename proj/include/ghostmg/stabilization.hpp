// Lower bounds C for the Nitsche penalty and the resulting λ = γ C.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostmg/elements.hpp"
#include "ghostmg/geometry.hpp"
#include "ghostmg/numerics.hpp"

namespace ghostmg {

namespace detail {
inline void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}
inline void require_fraction(double t, const char* what) {
  if (!(t > 0.0) || t > 1.0) throw std::invalid_argument(std::string(what) + " must lie in (0,1]");
}
}  // namespace detail

inline double c_one_dim(double theta1, double h) {
  detail::require_fraction(theta1, "theta1");
  detail::require_positive(h, "h");
  return 1.0 / (theta1 * h);
}

inline double c_triangle(double t1, double t2, double h) {
  detail::require_fraction(t1, "theta1");
  detail::require_fraction(t2, "theta2");
  detail::require_positive(h, "h");
  const double a2 = t1 * t1, b2 = t2 * t2;
  const double a4 = a2 * a2, b4 = b2 * b2;
  const double s = a2 + b2;
  return std::sqrt(s / a2) * (3.0 * a4 + 3.0 * b4 + std::sqrt(3.0 * (a4 * a4 + 10.0 * a4 * b4 + b4 * b4))) /
         (h * t2 * s * s);
}

inline double c_pentagon(double h) {
  detail::require_positive(h, "h");
  return 3.0 * std::sqrt(2.0) / h;
}

/// Printed closed form for the trapezoid. Kept for cross-checking the
/// eigensolver; c_quadrilateral does not use it.
inline double c_quadrilateral_closed_form(double t1, double t2, double h) {
  detail::require_fraction(t1, "theta1");
  detail::require_fraction(t2, "theta2");
  detail::require_positive(h, "h");
  auto p = [](double x, int k) { return std::pow(x, k); };
  const double s = std::sqrt(1.0 + t1 * t1 - 2.0 * t1 * t2 + t2 * t2);
  const double P1 = p(t1, 6) + 2 * p(t1, 3) * t2 + t2 * t2 - p(t1, 4) * t2 * t2 + p(t2, 6) +
                    2 * t1 * (t2 + p(t2, 3)) - t1 * t1 * (-1 + 2 * t2 * t2 + p(t2, 4));
  const double P2 =
      p(t1, 14) + 2 * p(t1, 13) * t2 + p(t1, 12) * (1 - 5 * t2 * t2) -
      4 * p(t1, 11) * t2 * (-4 + 7 * t2 * t2) - 2 * p(t1, 9) * t2 * (-6 + 20 * t2 * t2 + 17 * p(t2, 4)) +
      p(t1, 10) * (10 - 22 * t2 * t2 + 73 * p(t2, 4)) +
      p(t1, 8) * (10 - 38 * t2 * t2 + 63 * p(t2, 4) - 69 * p(t2, 6)) +
      8 * p(t1, 7) * t2 * (4 - 4 * t2 * t2 + 3 * p(t2, 4) + 15 * p(t2, 6)) +
      p(t1, 6) * (1 - 32 * t2 * t2 + 136 * p(t2, 4) - 84 * p(t2, 6) - 69 * p(t2, 8)) +
      2 * t1 * p(t2, 5) * (5 + 16 * t2 * t2 + 6 * p(t2, 4) + 8 * p(t2, 6) + p(t2, 8)) -
      4 * p(t1, 3) * p(t2, 3) * (5 + 14 * t2 * t2 + 8 * p(t2, 4) + 10 * p(t2, 6) + 7 * p(t2, 8)) -
      2 * p(t1, 5) * t2 * (-5 + 28 * t2 * t2 + 88 * p(t2, 4) - 12 * p(t2, 6) + 17 * p(t2, 8)) +
      p(t2, 4) * (1 + t2 * t2 + 10 * p(t2, 4) + 10 * p(t2, 6) + p(t2, 8) + p(t2, 10)) -
      t1 * t1 * t2 * t2 * (2 + t2 * t2 + 32 * p(t2, 4) + 38 * p(t2, 6) + 22 * p(t2, 8) + 5 * p(t2, 10)) +
      p(t1, 4) * (1 - t2 * t2 + 104 * p(t2, 4) + 136 * p(t2, 6) + 63 * p(t2, 8) + 73 * p(t2, 10));
  const double P3 = p(t1, 7) + p(t1, 6) * t2 + p(t1, 5) * (2 - 3 * t2 * t2) +
                    p(t1, 3) * p(-1 + t2 * t2, 2) + p(t2, 3) * p(1 + t2 * t2, 2) +
                    p(t1, 4) * t2 * (6 + t2 * t2) + t1 * t2 * t2 * (5 + 6 * t2 * t2 + p(t2, 4)) +
                    t1 * t1 * (5 * t2 - 2 * p(t2, 3) - 3 * p(t2, 5));
  return (3.0 * h * s * P1 + std::sqrt(3.0 * h * h * P2)) / (h * h * P3);
}

/// Cut geometry in the cell [0,h]² with the fixed conventions
///   triangle:      (0,0), (θ₁h,0), (0,θ₂h)
///   quadrilateral: (0,0), (θ₁h,0), (θ₂h,h), (0,h)   (θ₁ bottom, θ₂ top)
///   pentagon:      (0,0), (θ₁h,0), (h,(1−θ₂)h), (h,h), (0,h)
///   segment:       [0, θ₁h] with the boundary at θ₁h
inline CutCellGeometry canonical_cut(CutShape shape, double t1, double t2, double h) {
  CutCellGeometry g;
  g.shape = shape;
  g.theta = {t1, t2};
  switch (shape) {
    case CutShape::Segment:
      g.polygon = {{0.0, 0.0}, {t1 * h, 0.0}};
      g.chord_a = g.chord_b = {t1 * h, 0.0};
      g.normal = {1.0, 0.0};
      return g;
    case CutShape::Triangle:
      g.polygon = {{0.0, 0.0}, {t1 * h, 0.0}, {0.0, t2 * h}};
      g.chord_a = g.polygon[1];
      g.chord_b = g.polygon[2];
      break;
    case CutShape::Quadrilateral:
      g.polygon = {{0.0, 0.0}, {t1 * h, 0.0}, {t2 * h, h}, {0.0, h}};
      g.chord_a = g.polygon[1];
      g.chord_b = g.polygon[2];
      break;
    case CutShape::Pentagon:
      g.polygon = {{0.0, 0.0}, {t1 * h, 0.0}, {h, (1.0 - t2) * h}, {h, h}, {0.0, h}};
      g.chord_a = g.polygon[1];
      g.chord_b = g.polygon[2];
      break;
  }
  const Point d = g.chord_b - g.chord_a;
  const double len = norm(d);
  g.normal = {d[1] / len, -d[0] / len};
  return g;
}

/// max Λ of (n·∇φ_i, n·∇φ_j)_chord v = Λ (∇φ_i, ∇φ_j)_{K∩Ω} v.
inline double local_eig_C(const CellFrame& frame, const CutCellGeometry& g) {
  const DenseMatrix K = chord_flux_matrix(frame, g);
  const DenseMatrix M = q1_cell_stiffness(frame, g.polygon);
  return generalized_eig_max(K, M).max_eigenvalue;
}

inline double local_eig_C(const CutCellGeometry& g, double h) {
  const int dim = g.shape == CutShape::Segment ? 1 : 2;
  return local_eig_C(CellFrame{dim, {0.0, 0.0}, h}, g);
}

/// Trapezoid bound, computed from the local pencil.
inline double c_quadrilateral(double t1, double t2, double h) {
  detail::require_fraction(t1, "theta1");
  detail::require_fraction(t2, "theta2");
  detail::require_positive(h, "h");
  return local_eig_C(canonical_cut(CutShape::Quadrilateral, t1, t2, h), h);
}

enum class StabilizationMode { Local, Global, Explicit };
enum class CMethod { ClosedForm, LocalEig };

inline const char* to_string(StabilizationMode m) {
  switch (m) {
    case StabilizationMode::Local: return "local";
    case StabilizationMode::Global: return "global";
    case StabilizationMode::Explicit: return "explicit";
  }
  return "?";
}

inline StabilizationMode parse_stabilization_mode(const std::string& s) {
  if (s == "local") return StabilizationMode::Local;
  if (s == "global") return StabilizationMode::Global;
  if (s == "explicit") return StabilizationMode::Explicit;
  throw std::invalid_argument("unknown stabilization mode '" + s + "'");
}

struct StabilizationConfig {
  StabilizationMode mode = StabilizationMode::Local;
  double gamma = 2.0;
  double beta = 1.0;  // explicit mode only: λ = γ h^-β
  bool eig_everywhere = false;
};

struct CutCellStabilization {
  std::size_t cell = 0;
  CutShape shape = CutShape::Triangle;
  double C = 0.0;
  double lambda = 0.0;
  CMethod method = CMethod::ClosedForm;
};

/// C(K) for one cut cell: closed forms for segments, triangles and
/// pentagons, the local pencil for quadrilaterals.
inline CutCellStabilization cell_C(const CartesianGrid& grid, const CutCellGeometry& g,
                                   bool eig_everywhere = false) {
  CutCellStabilization s{g.cell, g.shape, 0.0, 0.0, CMethod::ClosedForm};
  const double h = grid.h();
  if (eig_everywhere || g.shape == CutShape::Quadrilateral) {
    s.C = local_eig_C(CellFrame::of(grid, g.cell), g);
    s.method = CMethod::LocalEig;
    return s;
  }
  switch (g.shape) {
    case CutShape::Segment: s.C = c_one_dim(g.theta[0], h); break;
    case CutShape::Triangle: s.C = c_triangle(g.theta[0], g.theta[1], h); break;
    case CutShape::Pentagon: s.C = c_pentagon(h); break;
    default: break;
  }
  return s;
}

/// Global pencil K v = Λ M v with K from every Dirichlet chord and M the
/// interior stiffness, over the active nodes. K is low rank (one column per
/// chord quadrature point), so max Λ = λ_max(W^½ Gᵀ M⁺ G W^½) with M⁺
/// applied through one grounded node per connected component.
inline double global_C(const Discretization& disc) {
  const CartesianGrid& grid = disc.grid;
  const std::size_t N = grid.node_count();
  std::vector<Triplet> mt;
  const CellFrame ref = CellFrame::of(grid, 0);
  const DenseMatrix full_K = q1_cell_stiffness(ref, full_cell_polygon(ref));
  auto scatter = [&](std::size_t cell, const DenseMatrix& E) {
    const auto nodes = grid.cell_nodes(cell);
    for (std::size_t i = 0; i < E.rows(); ++i)
      for (std::size_t j = 0; j < E.cols(); ++j) mt.push_back({nodes[i], nodes[j], E(i, j)});
  };
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    if (disc.classification.tags[c] == CellTag::Internal) scatter(c, full_K);

  std::vector<Vector> columns;
  std::vector<double> weights;
  for (const auto& g : disc.cuts) {
    const CellFrame fr = CellFrame::of(grid, g.cell);
    scatter(g.cell, q1_cell_stiffness(fr, g.polygon));
    if (g.boundary != BoundaryKind::Dirichlet) continue;
    const auto nodes = grid.cell_nodes(g.cell);
    for (const auto& q : chord_rule(g)) {
      const auto grad = shape_gradients(fr, q.x);
      Vector col(N, 0.0);
      for (std::size_t i = 0; i < fr.nloc(); ++i) col[nodes[i]] = dot(g.normal, grad[i]);
      columns.push_back(std::move(col));
      weights.push_back(q.w);
    }
  }
  if (columns.empty()) throw std::domain_error("global_C: no Dirichlet boundary");

  // Ground one node per connected component of the active stiffness graph.
  CsrMatrix M = CsrMatrix::from_triplets(N, N, mt);
  const auto active = disc.active_node_mask();
  std::vector<char> grounded(N, 0), seen(N, 0);
  for (std::size_t s = 0; s < N; ++s) {
    if (!active[s] || seen[s]) continue;
    grounded[s] = 1;
    std::vector<std::size_t> stack{s};
    seen[s] = 1;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      for (std::size_t j : M.row_cols(i))
        if (!seen[j]) {
          seen[j] = 1;
          stack.push_back(j);
        }
    }
  }
  std::vector<Triplet> gt;
  for (std::size_t i = 0; i < N; ++i) {
    if (!active[i] || grounded[i]) {
      gt.push_back({i, i, 1.0});
      continue;
    }
    const auto rc = M.row_cols(i);
    const auto rv = M.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k)
      if (active[rc[k]] && !grounded[rc[k]]) gt.push_back({i, rc[k], rv[k]});
  }
  const ProfileCholesky chol(CsrMatrix::from_triplets(N, N, gt));

  const std::size_t q = columns.size();
  std::vector<Vector> sol(q);
  for (std::size_t a = 0; a < q; ++a) {
    Vector rhs = columns[a];
    for (std::size_t i = 0; i < N; ++i)
      if (!active[i] || grounded[i]) rhs[i] = 0.0;
    sol[a] = chol.solve(rhs);
  }
  DenseMatrix S(q, q);
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = a; b < q; ++b) {
      double v = 0.0;
      for (std::size_t i = 0; i < N; ++i) v += columns[a][i] * sol[b][i];
      S(a, b) = S(b, a) = std::sqrt(weights[a] * weights[b]) * v;
    }
  // Symmetrize the Gram-type matrix against solve roundoff.
  for (std::size_t a = 0; a < q; ++a)
    for (std::size_t b = 0; b < a; ++b) S(a, b) = S(b, a);
  return symmetric_eigen(S).values.back();
}

/// Dense eigensolve of the global pencil on the active nodes. Cubic cost;
/// intended for small grids.
inline GeneralizedEigResult global_C_dense(const Discretization& disc) {
  const CartesianGrid& grid = disc.grid;
  const auto active_idx = mask_to_indices(disc.active_node_mask());
  std::vector<std::size_t> local(grid.node_count(), 0);
  for (std::size_t k = 0; k < active_idx.size(); ++k) local[active_idx[k]] = k;
  const std::size_t n = active_idx.size();
  DenseMatrix K(n, n), M(n, n);
  auto scatter = [&](DenseMatrix& D, std::size_t cell, const DenseMatrix& E) {
    const auto nodes = grid.cell_nodes(cell);
    for (std::size_t i = 0; i < E.rows(); ++i)
      for (std::size_t j = 0; j < E.cols(); ++j) D(local[nodes[i]], local[nodes[j]]) += E(i, j);
  };
  const CellFrame ref = CellFrame::of(grid, 0);
  const DenseMatrix full_K = q1_cell_stiffness(ref, full_cell_polygon(ref));
  for (std::size_t c = 0; c < grid.cell_count(); ++c)
    if (disc.classification.tags[c] == CellTag::Internal) scatter(M, c, full_K);
  bool any = false;
  for (const auto& g : disc.cuts) {
    const CellFrame fr = CellFrame::of(grid, g.cell);
    scatter(M, g.cell, q1_cell_stiffness(fr, g.polygon));
    if (g.boundary == BoundaryKind::Dirichlet) {
      scatter(K, g.cell, chord_flux_matrix(fr, g));
      any = true;
    }
  }
  if (!any) throw std::domain_error("global_C_dense: no Dirichlet boundary");
  return generalized_eig_max(K, M);
}

/// Per-cut-cell stabilization record; Neumann cuts get λ = 0.
inline std::vector<CutCellStabilization> stabilize(const Discretization& disc,
                                                   const StabilizationConfig& cfg) {
  std::vector<CutCellStabilization> out;
  out.reserve(disc.cuts.size());
  const double h = disc.grid.h();
  double global = 0.0;
  if (cfg.mode == StabilizationMode::Global) {
    for (const auto& g : disc.cuts)
      if (g.boundary == BoundaryKind::Dirichlet)
        global = std::max(global, local_eig_C(CellFrame::of(disc.grid, g.cell), g));
  }
  for (const auto& g : disc.cuts) {
    CutCellStabilization s{g.cell, g.shape, 0.0, 0.0, CMethod::ClosedForm};
    if (g.boundary == BoundaryKind::Dirichlet) {
      switch (cfg.mode) {
        case StabilizationMode::Local:
          s = cell_C(disc.grid, g, cfg.eig_everywhere);
          s.lambda = cfg.gamma * s.C;
          break;
        case StabilizationMode::Global:
          s.C = global;
          s.method = CMethod::LocalEig;
          s.lambda = cfg.gamma * global;
          break;
        case StabilizationMode::Explicit:
          s.C = std::pow(h, -cfg.beta);
          s.lambda = cfg.gamma * s.C;
          break;
      }
    }
    out.push_back(s);
  }
  return out;
}

inline std::vector<double> lambdas_of(const std::vector<CutCellStabilization>& s) {
  std::vector<double> l(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) l[k] = s[k].lambda;
  return l;
}

}  // namespace ghostmg
