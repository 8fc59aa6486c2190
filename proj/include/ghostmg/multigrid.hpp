// Transfer operators, Galerkin hierarchy, two-grid/V/W cycles.

#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghostmg/assembly.hpp"
#include "ghostmg/geometry.hpp"
#include "ghostmg/numerics.hpp"

namespace ghostmg {

struct TransferOperators {
  CsrMatrix R;  // coarse x fine
  CsrMatrix P;  // fine x coarse, == transpose(R)
};

namespace detail {

// 1D weights: coarse node I takes fine 2I with weight 1 and 2I±1 with ½.
inline std::vector<std::vector<std::pair<std::size_t, double>>> restriction_rows_1d(std::size_t nf) {
  const std::size_t nc = nf / 2;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(nc + 1);
  for (std::size_t I = 0; I <= nc; ++I) {
    const std::size_t i = 2 * I;
    if (i > 0) rows[I].push_back({i - 1, 0.5});
    rows[I].push_back({i, 1.0});
    if (i < nf) rows[I].push_back({i + 1, 0.5});
  }
  return rows;
}

}  // namespace detail

inline TransferOperators build_restriction(const CartesianGrid& fine, const CartesianGrid& coarse) {
  if (fine.n() % 2 != 0) throw std::invalid_argument("build_restriction: odd fine cell count");
  if (coarse.n() * 2 != fine.n() || coarse.dim() != fine.dim()) {
    throw std::invalid_argument("build_restriction: coarse grid must halve the fine grid");
  }
  const auto r1 = detail::restriction_rows_1d(fine.n());
  std::vector<Triplet> t;
  if (fine.dim() == 1) {
    for (std::size_t I = 0; I < r1.size(); ++I)
      for (const auto& [i, w] : r1[I]) t.push_back({I, i, w});
  } else {
    for (std::size_t J = 0; J < r1.size(); ++J)
      for (std::size_t I = 0; I < r1.size(); ++I)
        for (const auto& [j, wj] : r1[J])
          for (const auto& [i, wi] : r1[I])
            t.push_back({coarse.node_index(I, J), fine.node_index(i, j), wi * wj});
  }
  TransferOperators T;
  T.R = CsrMatrix::from_triplets(coarse.node_count(), fine.node_count(), t);
  T.P = transpose(T.R);
  return T;
}

enum class SmootherKind { GaussSeidel, WeightedJacobi };

struct CycleConfig {
  int nu1 = 2;
  int nu2 = 1;
  int eta = 0;
  int gamma_star = 1;  // 1: V, 2: W
  std::size_t coarsest_n = 0;  // 0: two-grid (coarse = fine/2)
  SmootherKind smoother = SmootherKind::GaussSeidel;
  double omega = 2.0 / 3.0;
};

struct MgLevel {
  std::size_t n = 0;
  CsrMatrix A;
  std::vector<char> free;
  std::vector<std::size_t> free_dofs;
  std::vector<std::size_t> cut_dofs;
  // Transfers to the next coarser level, masked to free DOFs on both sides.
  CsrMatrix R;
  CsrMatrix P;
};

struct ConvergenceTrace {
  std::vector<double> residual_norms;  // [0] is the initial residual
  std::vector<double> rho;             // rho[m-1] = ‖r^m‖ / ‖r^{m-1}‖
  bool diverged = false;

  /// Mean of ρ^(m) for first <= m <= last (1-based); NaN if not covered.
  double rho_mean(std::size_t first, std::size_t last) const {
    if (first < 1 || last < first || last > rho.size()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (std::size_t m = first; m <= last; ++m) s += rho[m - 1];
    return s / static_cast<double>(last - first + 1);
  }
};

inline std::vector<double> convergence_factors(const std::vector<double>& norms) {
  std::vector<double> rho;
  for (std::size_t m = 1; m < norms.size(); ++m) rho.push_back(norms[m] / norms[m - 1]);
  return rho;
}

class MgHierarchy {
 public:
  MgHierarchy(std::vector<MgLevel> levels, CycleConfig cfg) : levels_(std::move(levels)), cfg_(cfg) {
    if (levels_.size() < 2) throw std::invalid_argument("MgHierarchy: at least two levels required");
    if (cfg_.gamma_star != 1 && cfg_.gamma_star != 2) {
      throw std::invalid_argument("MgHierarchy: gamma_star must be 1 or 2");
    }
    if (cfg_.nu1 < 0 || cfg_.nu2 < 0 || cfg_.eta < 0) {
      throw std::invalid_argument("MgHierarchy: negative smoothing count");
    }
    const MgLevel& c = levels_.back();
    coarse_index_.assign(c.A.nrows(), kNone);
    for (std::size_t k = 0; k < c.free_dofs.size(); ++k) coarse_index_[c.free_dofs[k]] = k;
    std::vector<Triplet> t;
    for (std::size_t i : c.free_dofs) {
      const auto rc = c.A.row_cols(i);
      const auto rv = c.A.row_values(i);
      for (std::size_t k = 0; k < rc.size(); ++k)
        if (coarse_index_[rc[k]] != kNone) t.push_back({coarse_index_[i], coarse_index_[rc[k]], rv[k]});
    }
    const std::size_t m = c.free_dofs.size();
    coarse_ = std::make_unique<ProfileCholesky>(CsrMatrix::from_triplets(m, m, t));
  }

  std::size_t size() const { return levels_.size(); }
  const MgLevel& level(std::size_t l) const { return levels_.at(l); }
  const CycleConfig& config() const { return cfg_; }
  CycleConfig& config() { return cfg_; }

  /// One smoothing step: a sweep over free DOFs, then η sweeps over cut DOFs.
  void smooth(std::size_t l, std::span<const double> F, std::span<double> u) const {
    const MgLevel& L = levels_[l];
    auto sweep = [&](const std::vector<std::size_t>& rows) {
      if (cfg_.smoother == SmootherKind::GaussSeidel) {
        gauss_seidel_sweep(L.A, F, u, rows);
      } else {
        weighted_jacobi_sweep(L.A, F, u, cfg_.omega, rows);
      }
    };
    sweep(L.free_dofs);
    for (int k = 0; k < cfg_.eta; ++k) sweep(L.cut_dofs);
  }

  Vector level_residual(std::size_t l, std::span<const double> F, std::span<const double> u) const {
    const MgLevel& L = levels_[l];
    Vector r = spmv(L.A, u);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = L.free[i] ? F[i] - r[i] : 0.0;
    return r;
  }

  /// Exact solve on the coarsest level (free DOFs; others set to 0).
  Vector coarse_solve(std::span<const double> F) const {
    const MgLevel& c = levels_.back();
    Vector b(c.free_dofs.size());
    for (std::size_t k = 0; k < b.size(); ++k) b[k] = F[c.free_dofs[k]];
    const Vector x = coarse_->solve(b);
    Vector u(c.A.nrows(), 0.0);
    for (std::size_t k = 0; k < x.size(); ++k) u[c.free_dofs[k]] = x[k];
    return u;
  }

  /// One cycle starting on level l.
  void cycle(std::size_t l, std::span<const double> F, std::span<double> u) const {
    if (l + 1 == levels_.size()) {
      const Vector x = coarse_solve(F);
      std::copy(x.begin(), x.end(), u.begin());
      return;
    }
    const MgLevel& L = levels_[l];
    for (int k = 0; k < cfg_.nu1; ++k) smooth(l, F, u);
    const Vector r = level_residual(l, F, u);
    const Vector rc = spmv(L.R, r);
    Vector ec(rc.size(), 0.0);
    if (l + 2 == levels_.size()) {
      ec = coarse_solve(rc);
    } else {
      for (int k = 0; k < cfg_.gamma_star; ++k) cycle(l + 1, rc, ec);
    }
    const Vector e = spmv(L.P, ec);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += e[i];
    for (int k = 0; k < cfg_.nu2; ++k) smooth(l, F, u);
  }

  void cycle(std::span<const double> F, std::span<double> u) const { cycle(0, F, u); }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<MgLevel> levels_;
  CycleConfig cfg_;
  std::vector<std::size_t> coarse_index_;
  std::unique_ptr<ProfileCholesky> coarse_;
};

inline std::vector<char> cut_node_mask(const CartesianGrid& grid, const CellClassification& cls) {
  std::vector<char> mask(grid.node_count(), 0);
  for (std::size_t c = 0; c < grid.cell_count(); ++c) {
    if (cls.tags[c] != CellTag::Cut) continue;
    const auto nodes = grid.cell_nodes(c);
    for (std::size_t v = 0; v < grid.vertices_per_cell(); ++v) mask[nodes[v]] = 1;
  }
  return mask;
}

/// Galerkin coarsening of one level through a full prolongation P_full.
/// Prolongation rows of non-free fine DOFs are dropped; coarse DOFs with an
/// empty prolongation column become identity rows.
inline MgLevel galerkin_coarsen(MgLevel& fine, const CsrMatrix& P_full,
                                const std::vector<char>* coarse_cut = nullptr) {
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < P_full.nrows(); ++i) {
    if (!fine.free[i]) continue;
    const auto rc = P_full.row_cols(i);
    const auto rv = P_full.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) t.push_back({i, rc[k], rv[k]});
  }
  fine.P = CsrMatrix::from_triplets(P_full.nrows(), P_full.ncols(), t);
  fine.R = transpose(fine.P);

  MgLevel c;
  const std::size_t nc = P_full.ncols();
  c.free.assign(nc, 0);
  for (std::size_t I = 0; I < nc; ++I) c.free[I] = fine.R.row_cols(I).empty() ? 0 : 1;
  const CsrMatrix Ac = rap_product(fine.R, fine.A, fine.P);
  std::vector<Triplet> ct;
  ct.reserve(Ac.nnz());
  for (std::size_t I = 0; I < nc; ++I) {
    if (!c.free[I]) {
      ct.push_back({I, I, 1.0});
      continue;
    }
    const auto rc = Ac.row_cols(I);
    const auto rv = Ac.row_values(I);
    for (std::size_t k = 0; k < rc.size(); ++k) ct.push_back({I, rc[k], rv[k]});
  }
  c.A = CsrMatrix::from_triplets(nc, nc, ct);
  c.free_dofs = mask_to_indices(c.free);
  if (coarse_cut) {
    for (std::size_t I : c.free_dofs)
      if ((*coarse_cut)[I]) c.cut_dofs.push_back(I);
  }
  return c;
}

inline MgLevel finest_level(const AssembledSystem& sys, std::size_t n) {
  MgLevel L;
  L.n = n;
  L.A = sys.A;
  L.free = sys.free;
  L.free_dofs = sys.free_dofs;
  L.cut_dofs = sys.cut_dofs;
  return L;
}

/// Hierarchy for the assembled finest system. Coarse cut masks come from
/// reclassifying the level set at each coarse h.
inline MgHierarchy build_hierarchy(const AssembledSystem& sys, const Discretization& disc,
                                   const Domain& domain, double alpha, const CycleConfig& cfg) {
  const std::size_t n = disc.grid.n();
  const std::size_t coarsest = cfg.coarsest_n == 0 ? n / 2 : cfg.coarsest_n;
  if (coarsest == 0 || coarsest >= n || n % coarsest != 0 || ((n / coarsest) & (n / coarsest - 1)) != 0) {
    throw std::invalid_argument("build_hierarchy: fine n = " + std::to_string(n) +
                                " is not coarsest_n * 2^L");
  }
  std::vector<MgLevel> levels;
  levels.push_back(finest_level(sys, n));
  CartesianGrid grid = disc.grid;
  while (grid.n() > coarsest) {
    const CartesianGrid cg = grid.coarsened();
    const TransferOperators T = build_restriction(grid, cg);
    const auto field = snap_nodes(cg, domain.level_set, alpha);
    const auto cut = cut_node_mask(cg, classify_cells(cg, field));
    MgLevel c = galerkin_coarsen(levels.back(), T.P, &cut);
    c.n = cg.n();
    levels.push_back(std::move(c));
    grid = cg;
  }
  return MgHierarchy(std::move(levels), cfg);
}

/// Test hook: hierarchy from explicit prolongations (finest first).
inline MgHierarchy build_hierarchy_from(const CsrMatrix& A, const std::vector<char>& free,
                                        const std::vector<CsrMatrix>& prolongations,
                                        const CycleConfig& cfg) {
  std::vector<MgLevel> levels;
  MgLevel f;
  f.A = A;
  f.free = free;
  f.free_dofs = mask_to_indices(free);
  levels.push_back(std::move(f));
  for (const auto& P : prolongations) levels.push_back(galerkin_coarsen(levels.back(), P));
  return MgHierarchy(std::move(levels), cfg);
}

struct SolveResult {
  Vector u;
  ConvergenceTrace trace;
};

/// Repeats cycles until max_iters or ‖r‖∞ <= target. Divergence (ρ > 1 for
/// five consecutive cycles) stops the run and is flagged in the trace.
inline SolveResult solve(const MgHierarchy& H, std::span<const double> F, Vector u0,
                         std::size_t max_iters, double target = 0.0) {
  SolveResult out{std::move(u0), {}};
  auto& tr = out.trace;
  tr.residual_norms.push_back(norm_inf(H.level_residual(0, F, out.u)));
  int above = 0;
  for (std::size_t m = 1; m <= max_iters; ++m) {
    if (tr.residual_norms.back() <= target || tr.residual_norms.back() == 0.0) break;
    H.cycle(F, out.u);
    const double r = norm_inf(H.level_residual(0, F, out.u));
    tr.rho.push_back(r / tr.residual_norms.back());
    tr.residual_norms.push_back(r);
    above = tr.rho.back() > 1.0 ? above + 1 : 0;
    if (above >= 5) {
      tr.diverged = true;
      break;
    }
  }
  return out;
}

}  // namespace ghostmg
