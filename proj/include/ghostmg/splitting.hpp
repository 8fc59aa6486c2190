// 1D split coarse residual: restricted interior residual plus boundary
// residuals rebuilt with coarse shape functions.

#pragma once

#include <cmath>
#include <stdexcept>

#include "ghostmg/assembly.hpp"
#include "ghostmg/multigrid.hpp"

namespace ghostmg {

struct OneDimProblem {
  double theta1 = 1.0;
  double theta2 = 1.0;
  std::size_t n = 8;
  double lambda = 0.0;  // 0 selects 1.1 / (θ₁ h)
  double g_a = 0.0;     // Dirichlet value at a
  double g_b = 0.0;     // Neumann flux at b
  double alpha = 2.0;
};

/// Everything needed to compare the two coarse residuals.
struct OneDimSetup {
  Domain domain;
  Discretization disc;
  AssembledSystem sys;
  SystemBlocks blocks;
  double lambda = 0.0;
  double a = 0.0;
  double b = 0.0;
  double g_a = 0.0;
  double g_b = 0.0;
};

inline OneDimSetup setup_one_dim(const OneDimProblem& p) {
  const double h = 1.0 / static_cast<double>(p.n);
  Domain d = make_domain("interval", {{"theta1", p.theta1}, {"theta2", p.theta2}, {"h", h}});
  CartesianGrid grid(1, p.n, {0.0, 0.0}, 1.0);
  Discretization disc = discretize(grid, d, p.alpha);
  const double lam = p.lambda > 0.0 ? p.lambda : 1.1 / (p.theta1 * h);
  std::vector<double> lambdas(disc.cuts.size(), 0.0);
  for (std::size_t k = 0; k < disc.cuts.size(); ++k)
    if (disc.cuts[k].boundary == BoundaryKind::Dirichlet) lambdas[k] = lam;
  const double ga = p.g_a, gb = p.g_b;
  ProblemSpec spec{d, {}, [ga](const Point&) { return ga; },
                   [gb](const Point&, const Point&) { return gb; }};
  // Boundary points after snapping, taken from the extracted cuts.
  double a = d.level_set.params().at("a");
  double b = d.level_set.params().at("b");
  for (const auto& g : disc.cuts) (g.boundary == BoundaryKind::Dirichlet ? a : b) = g.chord_a[0];
  OneDimSetup s{d, disc, {}, {}, lam, a, b, ga, gb};
  s.sys = assemble(s.disc, spec, lambdas, &s.blocks);
  return s;
}

namespace detail {

inline double point_value(const CartesianGrid& grid, std::span<const double> u, double x, double* dx) {
  const double h = grid.h();
  std::size_t c = static_cast<std::size_t>(std::floor((x - grid.origin()[0]) / h));
  if (c >= grid.n()) c = grid.n() - 1;
  const CellFrame f = CellFrame::of(grid, c);
  const auto phi = shape_values(f, {x, 0.0});
  const auto grad = shape_gradients(f, {x, 0.0});
  if (dx) *dx = u[c] * grad[0][0] + u[c + 1] * grad[1][0];
  return u[c] * phi[0] + u[c + 1] * phi[1];
}

// Adds w·φ_I(x) and w·φ_I'(x)·wd on the grid.
inline void add_point(const CartesianGrid& grid, Vector& r, double x, double wv, double wd) {
  const double h = grid.h();
  std::size_t c = static_cast<std::size_t>(std::floor((x - grid.origin()[0]) / h));
  if (c >= grid.n()) c = grid.n() - 1;
  const CellFrame f = CellFrame::of(grid, c);
  const auto phi = shape_values(f, {x, 0.0});
  const auto grad = shape_gradients(f, {x, 0.0});
  for (std::size_t i = 0; i < 2; ++i) r[c + i] += wv * phi[i] + wd * grad[i][0];
}

}  // namespace detail

/// r^SPLIT = R r^I + r^B + r^λ + r^N, where r^I = F^I − A^I û + (n·∇û)φ at
/// both boundary points and the boundary parts use coarse shape functions.
inline Vector split_coarse_residual(const OneDimSetup& s, std::span<const double> u) {
  const CartesianGrid& fine = s.disc.grid;
  const CartesianGrid coarse = fine.coarsened();
  const TransferOperators T = build_restriction(fine, coarse);

  Vector rI = s.blocks.F_I;
  const Vector AIu = spmv(s.blocks.A_I, u);
  for (std::size_t i = 0; i < rI.size(); ++i) rI[i] -= AIu[i];
  double ua_dx = 0.0, ub_dx = 0.0;
  const double ua = detail::point_value(fine, u, s.a, &ua_dx);
  detail::point_value(fine, u, s.b, &ub_dx);
  // Outward normals: −1 at a, +1 at b.
  detail::add_point(fine, rI, s.a, -ua_dx, 0.0);
  detail::add_point(fine, rI, s.b, ub_dx, 0.0);

  Vector r = spmv(T.R, rI);
  const double ra = s.g_a - ua;
  const double rb = s.g_b - ub_dx;
  detail::add_point(coarse, r, s.a, s.lambda * ra, ra);  // −(n·∇φ) r_a with n = −1
  detail::add_point(coarse, r, s.b, rb, 0.0);
  return r;
}

/// max |r^SPLIT − R (F − A û)|.
inline double verify_splitting_equivalence(const OneDimSetup& s, std::span<const double> u) {
  const TransferOperators T = build_restriction(s.disc.grid, s.disc.grid.coarsened());
  const Vector standard = spmv(T.R, residual(s.sys, u));
  const Vector split = split_coarse_residual(s, u);
  double m = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) m = std::max(m, std::abs(split[i] - standard[i]));
  return m;
}

}  // namespace ghostmg
