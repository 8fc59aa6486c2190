#include <gtest/gtest.h>

#include <cmath>

#include "ghostmg/assembly.hpp"
#include "ghostmg/stabilization.hpp"

using namespace ghostmg;

namespace {

struct OneDim {
  Discretization disc;
  SystemBlocks blocks;
  AssembledSystem sys;
};

OneDim one_dim(double t1, double t2, std::size_t n, double lam, double ga, double gb,
               ScalarField f = {}) {
  const double h = 1.0 / n;
  const Domain d = make_domain("interval", {{"theta1", t1}, {"theta2", t2}, {"h", h}});
  OneDim o{discretize(CartesianGrid(1, n, {0, 0}, 1.0), d, 2.0), {}, {}};
  std::vector<double> lams;
  for (const auto& g : o.disc.cuts) lams.push_back(g.boundary == BoundaryKind::Dirichlet ? lam : 0.0);
  ProblemSpec spec{d, std::move(f), [ga](const Point&) { return ga; }, [gb](const Point&, const Point&) { return gb; }};
  o.sys = assemble(o.disc, spec, lams, &o.blocks);
  return o;
}

// Solves the free block directly.
Vector direct_solve(const AssembledSystem& sys) {
  const auto& idx = sys.free_dofs;
  std::vector<std::size_t> pos(sys.size(), 0);
  for (std::size_t k = 0; k < idx.size(); ++k) pos[idx[k]] = k;
  std::vector<Triplet> t;
  Vector b(idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    const std::size_t i = idx[k];
    b[k] = sys.F[i];
    const auto rc = sys.A.row_cols(i);
    const auto rv = sys.A.row_values(i);
    for (std::size_t m = 0; m < rc.size(); ++m)
      if (sys.free[rc[m]]) t.push_back({k, pos[rc[m]], rv[m]});
  }
  const auto x = ProfileCholesky(CsrMatrix::from_triplets(idx.size(), idx.size(), t)).solve(b);
  Vector u(sys.size(), 0.0);
  for (std::size_t k = 0; k < idx.size(); ++k) u[idx[k]] = x[k];
  return u;
}

// Cells per axis giving h = 2^-5 on the domain's box.
std::size_t grid_n(const Domain& d) { return static_cast<std::size_t>(std::llround(d.box_extent * 32)); }

}  // namespace

class OneDimBlocks : public ::testing::TestWithParam<std::pair<double, double>> {};

TEST_P(OneDimBlocks, MatchClosedForm) {
  const auto [t1, t2] = GetParam();
  const std::size_t n = 16;
  const double h = 1.0 / n, lam = 1.1 / (t1 * h), ga = 0.7, gb = -1.3;
  const auto o = one_dim(t1, t2, n, lam, ga, gb);
  const auto AI = to_dense(o.blocks.A_I), AB = to_dense(o.blocks.A_B), AL = to_dense(o.blocks.A_lambda);
  DenseMatrix eI(n + 1), eB(n + 1), eL(n + 1);
  for (std::size_t i = 1; i < n; ++i) {
    eI(i, i) = 2 / h;
    eI(i, i - 1) = eI(i - 1, i) = -1 / h;
  }
  eI(0, 0) = t1 / h;
  eI(0, 1) = eI(1, 0) = -t1 / h;
  eI(1, 1) = (1 + t1) / h;
  eI(n, n) = t2 / h;
  eI(n, n - 1) = eI(n - 1, n) = -t2 / h;
  eI(n - 1, n - 1) = (1 + t2) / h;
  eB(0, 0) = -t1 / h;
  eB(0, 1) = t1 / h;
  eB(1, 0) = (t1 - 1) / h;
  eB(1, 1) = (1 - t1) / h;
  eL(0, 0) = lam * t1 * t1;
  eL(0, 1) = eL(1, 0) = lam * t1 * (1 - t1);
  eL(1, 1) = lam * (1 - t1) * (1 - t1);
  const double scale = lam + 1 / h;
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j) {
      EXPECT_NEAR(AI(i, j), eI(i, j), 1e-13 * scale) << i << "," << j;
      EXPECT_NEAR(AB(i, j), eB(i, j), 1e-13 * scale) << i << "," << j;
      EXPECT_NEAR(AL(i, j), eL(i, j), 1e-13 * scale) << i << "," << j;
    }
  for (std::size_t i = 0; i <= n; ++i) {
    const double fB = i == 0 ? -ga / h : (i == 1 ? ga / h : 0.0);
    const double fL = i == 0 ? lam * t1 * ga : (i == 1 ? lam * (1 - t1) * ga : 0.0);
    const double fN = i == n ? t2 * gb : (i == n - 1 ? (1 - t2) * gb : 0.0);
    EXPECT_NEAR(o.blocks.F_B[i], fB, 1e-13 * scale);
    EXPECT_NEAR(o.blocks.F_lambda[i], fL, 1e-13 * scale);
    EXPECT_NEAR(o.blocks.F_N[i], fN, 1e-13);
  }
  // A = A_I + A_B + A_Bᵀ + A_λ.
  const auto A = to_dense(o.sys.A);
  for (std::size_t i = 0; i <= n; ++i)
    for (std::size_t j = 0; j <= n; ++j)
      EXPECT_NEAR(A(i, j), eI(i, j) + eB(i, j) + eB(j, i) + eL(i, j), 1e-13 * scale);
}

INSTANTIATE_TEST_SUITE_P(ThetaGrid, OneDimBlocks,
                         ::testing::Values(std::pair{0.1, 0.1}, std::pair{0.1, 0.5}, std::pair{0.1, 1.0},
                                           std::pair{0.5, 0.1}, std::pair{0.5, 0.5}, std::pair{0.5, 1.0},
                                           std::pair{1.0, 0.1}, std::pair{1.0, 0.5}, std::pair{1.0, 1.0}));

TEST(Assembly, OneDimSourceTerm) {
  // f ≡ 1: F^I_i = ∫_Ω φ_i = h on interior nodes.
  const std::size_t n = 16;
  const double h = 1.0 / n;
  const auto o = one_dim(0.5, 0.5, n, 1.1 / (0.5 * h), 0, 0, [](const Point&) { return 1.0; });
  for (std::size_t i = 2; i + 2 <= n; ++i) EXPECT_NEAR(o.blocks.F_I[i], h, 1e-15);
  // Node 0 sees only the cut part (a, h): ∫ φ_0 = θ₁²h/2.
  EXPECT_NEAR(o.blocks.F_I[0], 0.125 * h, 1e-15);
}

TEST(Assembly, UncutInteriorRows) {
  const std::size_t n = 8;
  const double h = 1.0 / n;
  const auto o = one_dim(1.0, 1.0, n, 1.1 / h, 0, 0);
  const auto A = to_dense(o.sys.A);
  for (std::size_t i = 2; i + 2 <= n; ++i) {
    EXPECT_NEAR(A(i, i - 1), -1 / h, 1e-13);
    EXPECT_NEAR(A(i, i), 2 / h, 1e-13);
    EXPECT_NEAR(A(i, i + 1), -1 / h, 1e-13);
  }
}

TEST(Assembly, StrongEliminationExample) {
  const double h = 0.25;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < 5; ++i) {
    t.push_back({i, i, 2 / h});
    if (i + 1 < 5) {
      t.push_back({i, i + 1, -1 / h});
      t.push_back({i + 1, i, -1 / h});
    }
  }
  auto A = CsrMatrix::from_triplets(5, 5, t);
  Vector F(5, 0.0), vals(5, 0.0);
  std::vector<char> mask(5, 0);
  mask[0] = 1;
  vals[0] = 1.0;
  apply_strong_dirichlet(A, F, mask, vals);
  EXPECT_EQ(A(0, 0), 1.0);
  EXPECT_EQ(A(0, 1), 0.0);
  EXPECT_EQ(A(1, 0), 0.0);
  EXPECT_EQ(F[0], 1.0);
  EXPECT_DOUBLE_EQ(F[1], 1 / h);
  EXPECT_EQ(max_abs_asymmetry(A), 0.0);

  auto B = CsrMatrix::from_triplets(5, 5, t);
  Vector G(5, 3.0);
  apply_strong_dirichlet(B, G, std::vector<char>(5, 1), Vector(5, 0.0));
  EXPECT_EQ(B, CsrMatrix::identity(5));
  for (double v : G) EXPECT_EQ(v, 0.0);
}

TEST(Assembly, ResidualExamples) {
  const Domain d = make_domain("disk");
  const auto disc = discretize(CartesianGrid(2, 32, d.box_origin, d.box_extent), d, 1.75);
  const auto sys = assemble(disc, homogeneous_problem(d), lambdas_of(stabilize(disc, {})));
  const Vector zero(sys.size(), 0.0);
  EXPECT_EQ(residual(sys, zero), Vector(sys.size(), 0.0));  // F = 0
  Vector one(sys.size(), 0.0);
  for (std::size_t i : sys.free_dofs) one[i] = 1.0;
  const auto r = residual(sys, one);
  bool any = false;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (!sys.cut[i]) EXPECT_NEAR(r[i], 0.0, 1e-12) << i;
    any = any || std::abs(r[i]) > 1e-8;
  }
  EXPECT_TRUE(any);
}

TEST(Assembly, MissingLambdaThrows) {
  const Domain d = make_domain("disk");
  const auto disc = discretize(CartesianGrid(2, 16, d.box_origin, d.box_extent), d, 1.75);
  EXPECT_THROW(assemble(disc, homogeneous_problem(d), std::vector<double>(disc.cuts.size(), 0.0)),
               std::invalid_argument);
  EXPECT_THROW(assemble(disc, homogeneous_problem(d), {}), std::invalid_argument);
}

TEST(Assembly, ConstantsSatisfyDiscreteForm) {
  const double c = -2.5;
  for (const char* nm : {"disk", "annulus", "flower", "leaf", "hourglass"}) {
    const Domain d = make_domain(nm);
    const auto disc = discretize(CartesianGrid(2, grid_n(d), d.box_origin, d.box_extent), d, 1.75);
    ProblemSpec spec{d, {}, [c](const Point&) { return c; }, {}};
    const auto sys = assemble(disc, spec, lambdas_of(stabilize(disc, {})));
    Vector u(sys.size(), 0.0);
    for (std::size_t i : sys.free_dofs) u[i] = c;
    EXPECT_LE(norm_inf(residual(sys, u)), 1e-12 * std::max(1.0, norm_inf(sys.F))) << nm;
  }
}

TEST(Assembly, SymmetricAndSpdOnCatalog) {
  for (const char* nm : {"disk", "annulus", "flower", "leaf", "hourglass"}) {
    const Domain d = make_domain(nm);
    const auto disc = discretize(CartesianGrid(2, grid_n(d), d.box_origin, d.box_extent), d, 1.75);
    const auto sys = assemble(disc, homogeneous_problem(d), lambdas_of(stabilize(disc, {})));
    EXPECT_EQ(max_abs_asymmetry(sys.A), 0.0) << nm;
    EXPECT_NO_THROW(direct_solve(sys)) << nm;
  }
}

TEST(Assembly, LinearPatchTest) {
  const auto exact = [](const Point& x) { return 0.3 + 2.0 * x[0] - 1.5 * x[1]; };
  const Point grad{2.0, -1.5};
  for (const char* nm : {"disk", "annulus", "leaf", "flower"}) {
    const Domain d = make_domain(nm);
    for (std::size_t n : {32u, 64u}) {
      const auto disc = discretize(CartesianGrid(2, n, d.box_origin, d.box_extent), d, 1.75);
      ProblemSpec spec{d, {}, exact, [grad](const Point&, const Point& nrm) { return dot(grad, nrm); }};
      const auto sys = assemble(disc, spec, lambdas_of(stabilize(disc, {})));
      const auto u = direct_solve(sys);
      double err = 0.0;
      for (std::size_t i : sys.free_dofs) err = std::max(err, std::abs(u[i] - exact(disc.grid.node(i))));
      EXPECT_LE(err, 1e-10) << nm << " n=" << n;
    }
  }
  // 1D: u = x with u(a) = a, u'(b) = 1.
  const std::size_t n = 64;
  const double h = 1.0 / n, t1 = 0.3, t2 = 0.7;
  const double a = (1 - t1) * h;
  const auto o = one_dim(t1, t2, n, 1.1 / (t1 * h), a, 1.0);
  const auto u = direct_solve(o.sys);
  for (std::size_t i = 0; i <= n; ++i) EXPECT_NEAR(u[i], i * h, 1e-10);
}

TEST(Assembly, StrongDirichletOnRectangle) {
  const double h = 1.0 / 16;
  const Domain d = make_domain("rectangle", {{"theta", 0.4}, {"h", h}});
  const auto disc = discretize(CartesianGrid(2, 16, d.box_origin, d.box_extent), d, 1.75);
  const auto exact = [](const Point& x) { return 1.0 + x[0] + 2.0 * x[1]; };
  ProblemSpec spec{d, {}, exact, {}};
  const auto sys = assemble(disc, spec, lambdas_of(stabilize(disc, {})));
  std::size_t strong = 0;
  for (std::size_t i = 0; i < sys.size(); ++i) {
    if (!sys.strong[i]) continue;
    ++strong;
    EXPECT_EQ(sys.F[i], exact(disc.grid.node(i)));
  }
  EXPECT_EQ(strong, 17u + 2u * 16u);  // x = 0 column plus y = 0 and y = 1 rows
  EXPECT_EQ(max_abs_asymmetry(sys.A), 0.0);
  const auto u = direct_solve(sys);
  for (std::size_t i : sys.free_dofs) EXPECT_NEAR(u[i], exact(disc.grid.node(i)), 1e-10);
}
