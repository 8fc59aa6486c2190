#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ghostmg/multigrid.hpp"
#include "ghostmg/splitting.hpp"
#include "ghostmg/stabilization.hpp"

using namespace ghostmg;

namespace {

struct Problem {
  Domain domain;
  Discretization disc;
  AssembledSystem sys;
};

Problem two_dim(const std::string& name, std::size_t n, double gamma = 2.0) {
  Domain d = make_domain(name);
  auto disc = discretize(CartesianGrid(2, n, d.box_origin, d.box_extent), d, 1.75);
  auto sys = assemble(disc, homogeneous_problem(d), lambdas_of(stabilize(disc, {StabilizationMode::Local, gamma})));
  return {std::move(d), std::move(disc), std::move(sys)};
}

Vector ones_on_free(const AssembledSystem& sys) {
  Vector u(sys.size(), 0.0);
  for (std::size_t i : sys.free_dofs) u[i] = 1.0;
  return u;
}

}  // namespace

TEST(Restriction, OneDimExample) {
  const auto T = build_restriction(CartesianGrid(1, 4, {0, 0}, 1.0), CartesianGrid(1, 2, {0, 0}, 1.0));
  const double ref[3][5] = {{1, 0.5, 0, 0, 0}, {0, 0.5, 1, 0.5, 0}, {0, 0, 0, 0.5, 1}};
  const auto R = to_dense(T.R);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_EQ(R(i, j), ref[i][j]);
  EXPECT_EQ(spmv(T.R, Vector(5, 1.0)), (Vector{1.5, 2, 1.5}));
  EXPECT_EQ(spmv(T.P, Vector{0, 1, 0}), (Vector{0, 0.5, 1, 0.5, 0}));
  EXPECT_EQ(T.P, transpose(T.R));
}

TEST(Restriction, TwoDimExample) {
  const auto T = build_restriction(CartesianGrid(2, 2, {0, 0}, 1.0), CartesianGrid(2, 1, {0, 0}, 1.0));
  const double ref[4][9] = {{1, 0.5, 0, 0.5, 0.25, 0, 0, 0, 0},
                            {0, 0.5, 1, 0, 0.25, 0.5, 0, 0, 0},
                            {0, 0, 0, 0.5, 0.25, 0, 1, 0.5, 0},
                            {0, 0, 0, 0, 0.25, 0.5, 0, 0.5, 1}};
  const auto R = to_dense(T.R);
  ASSERT_EQ(R.rows(), 4u);
  ASSERT_EQ(R.cols(), 9u);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 9; ++j) EXPECT_EQ(R(i, j), ref[i][j]);
}

TEST(Restriction, RowSumsAndFullWeighting) {
  const std::size_t n = 16;
  const auto T1 = build_restriction(CartesianGrid(1, n, {0, 0}, 1.0), CartesianGrid(1, n / 2, {0, 0}, 1.0));
  const auto s1 = spmv(T1.R, Vector(n + 1, 1.0));
  for (std::size_t I = 1; I < n / 2; ++I) EXPECT_EQ(s1[I], 2.0);
  const auto T2 = build_restriction(CartesianGrid(2, n, {0, 0}, 1.0), CartesianGrid(2, n / 2, {0, 0}, 1.0));
  const auto s2 = spmv(T2.R, Vector((n + 1) * (n + 1), 1.0));
  const CartesianGrid cg(2, n / 2, {0, 0}, 1.0);
  for (std::size_t J = 1; J < n / 2; ++J)
    for (std::size_t I = 1; I < n / 2; ++I) EXPECT_EQ(s2[cg.node_index(I, J)], 4.0);
  // FDM full weighting, rows (2,1) / 4, (1,2,1) / 4, (1,2) / 4.
  std::vector<Triplet> t;
  for (std::size_t I = 0; I <= n / 2; ++I) {
    const std::size_t i = 2 * I;
    if (i > 0) t.push_back({I, i - 1, 0.25});
    t.push_back({I, i, 0.5});
    if (i < n) t.push_back({I, i + 1, 0.25});
  }
  const auto fw = to_dense(CsrMatrix::from_triplets(n / 2 + 1, n + 1, t));
  const auto R = to_dense(T1.R);
  for (std::size_t i = 0; i <= n / 2; ++i)
    for (std::size_t j = 0; j <= n; ++j) EXPECT_EQ(R(i, j), 2.0 * fw(i, j));
}

TEST(Restriction, OddGridRejected) {
  EXPECT_THROW(build_restriction(CartesianGrid(1, 5, {0, 0}, 1.0), CartesianGrid(1, 2, {0, 0}, 1.0)),
               std::invalid_argument);
}

TEST(Hierarchy, IdentityTransfersReproduceFineOperator) {
  const auto p = two_dim("disk", 16);
  const CsrMatrix I = CsrMatrix::identity(p.sys.size());
  const auto H = build_hierarchy_from(p.sys.A, p.sys.free, {I}, {});
  const auto fine = to_dense(p.sys.A), coarse = to_dense(H.level(1).A);
  for (std::size_t i : p.sys.free_dofs)
    for (std::size_t j : p.sys.free_dofs) EXPECT_EQ(coarse(i, j), fine(i, j));
}

TEST(Hierarchy, DiskLevelsAndSymmetry) {
  const auto p = two_dim("disk", 64);
  CycleConfig cc;
  cc.coarsest_n = 8;
  const auto H = build_hierarchy(p.sys, p.disc, p.domain, 1.75, cc);
  ASSERT_EQ(H.size(), 4u);
  const std::size_t expect[] = {64, 32, 16, 8};
  for (std::size_t l = 0; l < H.size(); ++l) {
    EXPECT_EQ(H.level(l).n, expect[l]);
    const auto A = H.level(l).A;
    EXPECT_LE(max_abs_asymmetry(A), 1e-13 * to_dense(A).max_abs());
    if (l + 1 < H.size()) EXPECT_EQ(H.level(l).P, transpose(H.level(l).R));
  }
  cc.coarsest_n = 12;
  EXPECT_THROW(build_hierarchy(p.sys, p.disc, p.domain, 1.75, cc), std::invalid_argument);
}

TEST(Hierarchy, CutDofFractionSmall) {
  const auto p = two_dim("disk", 64);
  EXPECT_LT(static_cast<double>(p.sys.cut_dofs.size()) / p.sys.free_dofs.size(), 0.2);
}

TEST(Hierarchy, GalerkinEqualsDirectCoarseAssemblyOneDim) {
  // n = 4, θ₁ = θ₂ = 1, λ = 1.1/h.
  OneDimProblem q;
  q.n = 4;
  const auto s = setup_one_dim(q);
  const auto H = build_hierarchy(s.sys, s.disc, s.domain, 2.0, {});
  const auto cdisc = discretize(s.disc.grid.coarsened(), s.domain, 2.0);
  std::vector<double> lam(cdisc.cuts.size(), 0.0);
  for (std::size_t k = 0; k < cdisc.cuts.size(); ++k)
    if (cdisc.cuts[k].boundary == BoundaryKind::Dirichlet) lam[k] = s.lambda;
  const auto G = to_dense(H.level(1).A), D = to_dense(assemble(cdisc, homogeneous_problem(s.domain), lam).A);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(G(i, j), D(i, j), 1e-13 * D.max_abs());
}

TEST(Cycle, ZeroStaysZeroAndExactIsFixed) {
  const auto p = two_dim("flower", 64);
  CycleConfig cc;
  cc.eta = 3;
  const auto H = build_hierarchy(p.sys, p.disc, p.domain, 1.75, cc);
  const Vector F(p.sys.size(), 0.0);
  Vector u(p.sys.size(), 0.0);
  H.cycle(F, u);
  EXPECT_EQ(norm_inf(u), 0.0);
  // Smoothing and cycling leave an exact solution unchanged.
  const Vector x = ones_on_free(p.sys);
  const Vector Fx = spmv(p.sys.A, x);
  Vector y = x;
  H.cycle(Fx, y);
  for (std::size_t i : p.sys.free_dofs) EXPECT_NEAR(y[i], x[i], 1e-12);
}

TEST(Cycle, TwoLevelWEqualsTwoGrid) {
  const auto p = two_dim("disk", 32);
  CycleConfig v, w;
  w.gamma_star = 2;
  const auto Hv = build_hierarchy(p.sys, p.disc, p.domain, 1.75, v);
  const auto Hw = build_hierarchy(p.sys, p.disc, p.domain, 1.75, w);
  Vector a = ones_on_free(p.sys), b = a;
  const Vector F(p.sys.size(), 0.0);
  Hv.cycle(F, a);
  Hw.cycle(F, b);
  EXPECT_EQ(a, b);
}

TEST(Solve, TraceDefinitions) {
  EXPECT_EQ(convergence_factors({1, 0.1, 0.01}).size(), 2u);
  EXPECT_NEAR(convergence_factors({1, 0.1, 0.01})[1], 0.1, 1e-15);
  ConvergenceTrace t;
  t.rho = {0.5, 0.1, 0.2, 0.3};
  EXPECT_NEAR(t.rho_mean(2, 4), 0.2, 1e-15);
  EXPECT_TRUE(std::isnan(t.rho_mean(3, 5)));
}

TEST(Solve, HomogeneousConvergesToZero) {
  const auto p = two_dim("annulus", 64);
  CycleConfig cc;
  cc.eta = 4;
  const auto H = build_hierarchy(p.sys, p.disc, p.domain, 1.75, cc);
  const auto r = solve(H, p.sys.F, ones_on_free(p.sys), 30);
  EXPECT_LT(norm_inf(r.u), 1e-12);
  EXPECT_FALSE(r.trace.diverged);
  EXPECT_LT(r.trace.rho_mean(21, 30), 0.2);
}

TEST(Solve, TargetStopsEarly) {
  const auto p = two_dim("disk", 32);
  const auto H = build_hierarchy(p.sys, p.disc, p.domain, 1.75, {});
  const auto r = solve(H, p.sys.F, ones_on_free(p.sys), 100, 1e-6);
  EXPECT_LE(r.trace.residual_norms.back(), 1e-6);
  EXPECT_LT(r.trace.rho.size(), 100u);
}

TEST(Solve, DivergenceDetected) {
  // Indefinite 2x2 block: Gauss-Seidel amplifies by 9 per sweep.
  const CsrMatrix A = CsrMatrix::from_triplets(3, 3, {{0, 0, 1}, {0, 1, 3}, {1, 0, 3}, {1, 1, 1}, {2, 2, 1}});
  const CsrMatrix P = CsrMatrix::from_triplets(3, 2, {{0, 0, 1}, {2, 1, 1}});
  CycleConfig cc;
  cc.nu1 = 1;
  cc.nu2 = 0;
  const auto H = build_hierarchy_from(A, {1, 1, 1}, {P}, cc);
  const auto r = solve(H, Vector(3, 0.0), Vector{1.0, 0.5, 0.0}, 50);
  EXPECT_TRUE(r.trace.diverged);
  EXPECT_EQ(r.trace.rho.size(), 5u);
}

TEST(Cycle, WeightedJacobiSmootherConverges) {
  OneDimProblem q;
  q.theta1 = 0.5;
  q.theta2 = 0.5;
  q.n = 128;
  const auto s = setup_one_dim(q);
  CycleConfig cc;
  cc.smoother = SmootherKind::WeightedJacobi;
  // The step is (ω diag(A) + (1 − ω) I)^{-1} r; with diag(A) >> 1 this is
  // about r / (ω diag(A)), so ω = 1.5 gives the classical 2/3 damping.
  cc.omega = 1.5;
  const auto H = build_hierarchy(s.sys, s.disc, s.domain, 2.0, cc);
  const auto r = solve(H, s.sys.F, Vector(s.sys.size(), 1.0), 50);
  EXPECT_FALSE(r.trace.diverged);
  EXPECT_LT(r.trace.rho_mean(41, 50), 0.2);
}

TEST(Cycle, LinearBySuperposition) {
  const auto p = two_dim("leaf", 64);
  CycleConfig cc;
  cc.gamma_star = 2;
  cc.coarsest_n = 8;
  cc.eta = 2;
  const auto H = build_hierarchy(p.sys, p.disc, p.domain, 1.75, cc);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(-1, 1);
  const Vector F(p.sys.size(), 0.0);
  Vector x(p.sys.size(), 0.0), y(p.sys.size(), 0.0);
  for (std::size_t i : p.sys.free_dofs) {
    x[i] = U(rng);
    y[i] = U(rng);
  }
  const double a = 0.7, b = -1.9;
  Vector z(p.sys.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = a * x[i] + b * y[i];
  H.cycle(F, x);
  H.cycle(F, y);
  H.cycle(F, z);
  double scale = 0, diff = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    scale = std::max(scale, std::abs(a * x[i] + b * y[i]));
    diff = std::max(diff, std::abs(z[i] - a * x[i] - b * y[i]));
  }
  EXPECT_LE(diff, 1e-12 * scale);
}
