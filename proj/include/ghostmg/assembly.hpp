// Global ghost-FEM system: interior stiffness over K∩Ω, Nitsche terms on
// Dirichlet chords, Neumann loads, strong elimination on grid-aligned parts.

#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostmg/elements.hpp"
#include "ghostmg/geometry.hpp"
#include "ghostmg/numerics.hpp"

namespace ghostmg {

struct ProblemSpec {
  Domain domain;
  ScalarField f;            // empty means 0
  ScalarField g_dirichlet;  // empty means 0
  FluxField g_neumann;      // empty means 0
};

inline ProblemSpec homogeneous_problem(Domain domain) { return ProblemSpec{std::move(domain), {}, {}, {}}; }

/// Unassembled pieces of A = A_I + A_B + A_Bᵀ + A_λ and
/// F = F_I + F_B + F_λ + F_N, before strong elimination.
struct SystemBlocks {
  CsrMatrix A_I;
  CsrMatrix A_B;
  CsrMatrix A_lambda;
  Vector F_I;
  Vector F_B;
  Vector F_lambda;
  Vector F_N;
};

struct AssembledSystem {
  CsrMatrix A;
  Vector F;
  std::vector<char> active;
  std::vector<char> cut;
  std::vector<char> strong;
  std::vector<char> free;  // active and not strong
  std::vector<std::size_t> free_dofs;
  std::vector<std::size_t> cut_dofs;  // cut nodes that are free

  std::size_t size() const { return F.size(); }
};

/// Replaces the rows/columns selected by `mask` with identity, moves the
/// eliminated column contributions into F and sets F to `values` there.
/// Rows with `keep[i] == 0` that are not selected also become identity with
/// zero right-hand side.
inline void apply_strong_dirichlet(CsrMatrix& A, Vector& F, const std::vector<char>& mask,
                                   const Vector& values, const std::vector<char>* keep = nullptr) {
  const std::size_t n = A.nrows();
  if (mask.size() != n || values.size() != n || F.size() != n) {
    throw std::invalid_argument("apply_strong_dirichlet: size mismatch");
  }
  std::vector<Triplet> t;
  t.reserve(A.nnz());
  Vector G = F;
  for (std::size_t i = 0; i < n; ++i) {
    if (mask[i]) {
      t.push_back({i, i, 1.0});
      G[i] = values[i];
      continue;
    }
    if (keep && !(*keep)[i]) {
      t.push_back({i, i, 1.0});
      G[i] = 0.0;
      continue;
    }
    const auto rc = A.row_cols(i);
    const auto rv = A.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const std::size_t j = rc[k];
      if (mask[j]) {
        G[i] -= rv[k] * values[j];
      } else if (!keep || (*keep)[j]) {
        t.push_back({i, j, rv[k]});
      }
    }
  }
  A = CsrMatrix::from_triplets(n, n, t);
  F = std::move(G);
}

namespace detail {

struct BlockTriplets {
  std::vector<Triplet> I, B, L;
};

inline void scatter(std::vector<Triplet>& t, const std::array<std::size_t, 4>& nodes,
                    const DenseMatrix& E) {
  for (std::size_t i = 0; i < E.rows(); ++i)
    for (std::size_t j = 0; j < E.cols(); ++j)
      if (E(i, j) != 0.0) t.push_back({nodes[i], nodes[j], E(i, j)});
}

inline void scatter(Vector& F, const std::array<std::size_t, 4>& nodes, const Vector& b) {
  for (std::size_t i = 0; i < b.size(); ++i) F[nodes[i]] += b[i];
}

}  // namespace detail

/// Assembles the system on one level. `lambda[k]` is the stabilization
/// parameter of disc.cuts[k]; it must be positive on Dirichlet cuts.
inline AssembledSystem assemble(const Discretization& disc, const ProblemSpec& spec,
                                const std::vector<double>& lambda,
                                SystemBlocks* blocks = nullptr) {
  const CartesianGrid& grid = disc.grid;
  const std::size_t N = grid.node_count();
  if (lambda.size() != disc.cuts.size()) {
    throw std::invalid_argument("assemble: one lambda per cut cell expected");
  }

  std::vector<Triplet> trip;
  trip.reserve(grid.cell_count() * 16);
  detail::BlockTriplets bt;
  Vector F_I(N, 0.0), F_B(N, 0.0), F_L(N, 0.0), F_N(N, 0.0);

  const CellFrame ref = CellFrame::of(grid, 0);
  const DenseMatrix full_K = q1_cell_stiffness(ref, full_cell_polygon(ref));

  // Internal cells.
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (disc.classification.tags[c] != CellTag::Internal) continue;
    const auto nodes = grid.cell_nodes(c);
    detail::scatter(trip, nodes, full_K);
    if (blocks) detail::scatter(bt.I, nodes, full_K);
    if (spec.f) {
      const CellFrame fr = CellFrame::of(grid, c);
      detail::scatter(F_I, nodes, source_vector(fr, full_cell_polygon(fr), spec.f));
    }
  }

  // Cut cells.
  for (std::size_t k = 0; k < disc.cuts.size(); ++k) {
    const CutCellGeometry& g = disc.cuts[k];
    const CellFrame fr = CellFrame::of(grid, g.cell);
    const auto nodes = grid.cell_nodes(g.cell);
    const std::size_t n = fr.nloc();
    DenseMatrix E = q1_cell_stiffness(fr, g.polygon);
    if (blocks) detail::scatter(bt.I, nodes, E);
    if (spec.f) detail::scatter(F_I, nodes, source_vector(fr, g.polygon, spec.f));

    if (g.boundary == BoundaryKind::Dirichlet) {
      if (!(lambda[k] > 0.0)) {
        throw std::invalid_argument("assemble: missing stabilization on Dirichlet cut cell " +
                                    std::to_string(g.cell));
      }
      const ChordTerms ct = nitsche_chord_terms(fr, g, lambda[k]);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          E(i, j) = E(i, j) + (ct.consistency(i, j) + ct.consistency(j, i)) + ct.penalty(i, j);
      if (blocks) {
        detail::scatter(bt.B, nodes, ct.consistency);
        detail::scatter(bt.L, nodes, ct.penalty);
      }
      const DirichletLoad dl = dirichlet_load(fr, g, lambda[k], spec.g_dirichlet);
      detail::scatter(F_L, nodes, dl.penalty);
      detail::scatter(F_B, nodes, dl.consistency);
    } else {
      detail::scatter(F_N, nodes, neumann_load(fr, g, spec.g_neumann));
    }
    detail::scatter(trip, nodes, E);
  }

  AssembledSystem sys;
  sys.active = disc.active_node_mask();
  sys.cut = disc.cut_node_mask();
  sys.strong.assign(N, 0);
  Vector gvals(N, 0.0);
  if (spec.domain.strong_dirichlet) {
    for (std::size_t i = 0; i < N; ++i) {
      if (!sys.active[i]) continue;
      const Point x = grid.node(i);
      if (spec.domain.strong_dirichlet(x)) {
        sys.strong[i] = 1;
        gvals[i] = spec.g_dirichlet ? spec.g_dirichlet(x) : 0.0;
      }
    }
  }
  sys.free.assign(N, 0);
  for (std::size_t i = 0; i < N; ++i) sys.free[i] = sys.active[i] && !sys.strong[i];

  sys.A = CsrMatrix::from_triplets(N, N, trip);
  sys.F.assign(N, 0.0);
  for (std::size_t i = 0; i < N; ++i) sys.F[i] = F_I[i] + F_B[i] + F_L[i] + F_N[i];
  apply_strong_dirichlet(sys.A, sys.F, sys.strong, gvals, &sys.active);

  sys.free_dofs = mask_to_indices(sys.free);
  for (std::size_t i : sys.free_dofs)
    if (sys.cut[i]) sys.cut_dofs.push_back(i);

  if (blocks) {
    blocks->A_I = CsrMatrix::from_triplets(N, N, bt.I);
    blocks->A_B = CsrMatrix::from_triplets(N, N, bt.B);
    blocks->A_lambda = CsrMatrix::from_triplets(N, N, bt.L);
    blocks->F_I = std::move(F_I);
    blocks->F_B = std::move(F_B);
    blocks->F_lambda = std::move(F_L);
    blocks->F_N = std::move(F_N);
  }
  return sys;
}

/// F − A u, zero on inactive and strong DOFs.
inline Vector residual(const AssembledSystem& sys, std::span<const double> u) {
  Vector r = spmv(sys.A, u);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = sys.free[i] ? sys.F[i] - r[i] : 0.0;
  return r;
}

}  // namespace ghostmg
