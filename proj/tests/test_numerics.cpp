#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ghostmg/numerics.hpp"

using namespace ghostmg;

namespace {

CsrMatrix tridiag2() { return CsrMatrix::from_triplets(2, 2, {{0, 0, 2}, {0, 1, -1}, {1, 0, -1}, {1, 1, 2}}); }

// Plain Gaussian elimination with partial pivoting (oracle, independent of the library).
std::vector<double> gauss_solve(std::vector<std::vector<double>> A, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A[r][c]) > std::abs(A[p][c])) p = r;
    std::swap(A[c], A[p]);
    std::swap(b[c], b[p]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A[r][c] / A[c][c];
      for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
    x[i] = s / A[i][i];
  }
  return x;
}

DenseMatrix random_spd(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  DenseMatrix B(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) B(i, j) = N(rng);
  DenseMatrix A = B.transposed() * B;
  for (std::size_t i = 0; i < n; ++i) A(i, i) += n;
  return A;
}

CsrMatrix random_sparse(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(-1, 1);
  std::bernoulli_distribution keep(0.5);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j)
      if (keep(rng)) t.push_back({i, j, U(rng)});
  return CsrMatrix::from_triplets(r, c, t);
}

}  // namespace

TEST(Spmv, IdentityAndRowSums) {
  const auto I = CsrMatrix::identity(2);
  EXPECT_EQ(spmv(I, std::vector<double>{3, 4}), (std::vector<double>{3, 4}));
  EXPECT_EQ(spmv(tridiag2(), std::vector<double>{1, 1}), (std::vector<double>{1, 1}));
}

TEST(Spmv, LaplacianAnnihilatesLinearData) {
  const std::size_t n = 16;
  const double h = 1.0 / n;
  std::vector<Triplet> t;
  for (std::size_t i = 1; i < n; ++i) {
    t.push_back({i, i - 1, -1 / h});
    t.push_back({i, i, 2 / h});
    t.push_back({i, i + 1, -1 / h});
  }
  const auto A = CsrMatrix::from_triplets(n + 1, n + 1, t);
  std::vector<double> x(n + 1);
  for (std::size_t i = 0; i <= n; ++i) x[i] = i * h;
  const auto y = spmv(A, x);
  for (std::size_t i = 1; i < n; ++i) EXPECT_NEAR(y[i], 0.0, 1e-13);
}

TEST(Spmv, DimensionMismatchThrows) {
  EXPECT_THROW(spmv(tridiag2(), std::vector<double>{1, 2, 3}), std::invalid_argument);
}

TEST(Csr, CanonicalFormAndDuplicatesSummed) {
  const auto A = CsrMatrix::from_triplets(2, 3, {{1, 2, 1.0}, {0, 1, 2.0}, {1, 2, 0.5}, {0, 0, 1.0}});
  EXPECT_EQ(A.nnz(), 3u);
  EXPECT_DOUBLE_EQ(A(1, 2), 1.5);
  EXPECT_EQ(A.row_cols(0)[0], 0u);
  EXPECT_EQ(A.row_cols(0)[1], 1u);
  EXPECT_THROW(CsrMatrix(1, 2, {0, 2}, {1, 0}, {1.0, 1.0}), std::invalid_argument);
}

TEST(Csr, TransposeIsInvolution) {
  std::mt19937_64 rng(1);
  for (int k = 0; k < 10; ++k) {
    const auto A = random_sparse(5, 7, rng);
    EXPECT_EQ(transpose(transpose(A)), A);
  }
}

TEST(GaussSeidel, HandExecutedSweep) {
  std::vector<double> u{0, 0};
  gauss_seidel_sweep(tridiag2(), std::vector<double>{1, 1}, u);
  EXPECT_DOUBLE_EQ(u[0], 0.5);
  EXPECT_DOUBLE_EQ(u[1], 0.75);
}

TEST(GaussSeidel, FixedPointAndEmptyMask) {
  std::vector<double> u{1, 1};
  gauss_seidel_sweep(tridiag2(), std::vector<double>{1, 1}, u);
  EXPECT_EQ(u, (std::vector<double>{1, 1}));
  std::vector<double> v{0.3, -0.2};
  gauss_seidel_sweep(tridiag2(), std::vector<double>{1, 1}, v, std::vector<std::size_t>{});
  EXPECT_EQ(v, (std::vector<double>{0.3, -0.2}));
}

TEST(GaussSeidel, MaskedRowsOnly) {
  std::vector<double> u{0, 0};
  gauss_seidel_sweep(tridiag2(), std::vector<double>{1, 1}, u, std::vector<std::size_t>{1});
  EXPECT_DOUBLE_EQ(u[0], 0.0);
  EXPECT_DOUBLE_EQ(u[1], 0.5);
}

TEST(GaussSeidel, ZeroDiagonalThrows) {
  const auto A = CsrMatrix::from_triplets(2, 2, {{0, 1, 1.0}, {1, 0, 1.0}});
  std::vector<double> u{0, 0};
  EXPECT_THROW(gauss_seidel_sweep(A, std::vector<double>{1, 1}, u), std::domain_error);
}

TEST(GaussSeidel, EnergyNormDecreases) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix D = random_spd(8, rng);
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < 8; ++i)
      for (std::size_t j = 0; j < 8; ++j) t.push_back({i, j, D(i, j)});
    const auto A = CsrMatrix::from_triplets(8, 8, t);
    std::vector<double> x(8), u(8);
    for (auto& v : x) v = U(rng);
    for (auto& v : u) v = U(rng);
    const auto F = spmv(A, x);
    auto energy = [&](const std::vector<double>& w) {
      std::vector<double> e(8);
      for (int i = 0; i < 8; ++i) e[i] = w[i] - x[i];
      const auto Ae = spmv(A, e);
      double s = 0;
      for (int i = 0; i < 8; ++i) s += e[i] * Ae[i];
      return s;
    };
    const double before = energy(u);
    gauss_seidel_sweep(A, F, u);
    EXPECT_LT(energy(u), before);
  }
}

TEST(WeightedJacobi, Examples) {
  std::vector<double> u{0, 0};
  weighted_jacobi_sweep(tridiag2(), std::vector<double>{1, 1}, u, 2.0 / 3.0);
  EXPECT_NEAR(u[0], 0.6, 1e-15);
  EXPECT_NEAR(u[1], 0.6, 1e-15);

  const auto D = CsrMatrix::from_triplets(2, 2, {{0, 0, 4.0}, {1, 1, 0.5}});
  std::vector<double> v{7, -3};
  weighted_jacobi_sweep(D, std::vector<double>{2, 2}, v, 1.0);
  EXPECT_DOUBLE_EQ(v[0], 0.5);
  EXPECT_DOUBLE_EQ(v[1], 4.0);

  std::vector<double> w{1, 1};
  weighted_jacobi_sweep(tridiag2(), std::vector<double>{1, 1}, w, 2.0 / 3.0);
  EXPECT_EQ(w, (std::vector<double>{1, 1}));
}

TEST(RapProduct, IdentityTransfers) {
  const auto I = CsrMatrix::identity(2);
  EXPECT_EQ(rap_product(I, tridiag2(), I), tridiag2());
}

TEST(RapProduct, MatchesDenseTripleProduct) {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20; ++k) {
    const auto R = random_sparse(3, 3, rng), A = random_sparse(3, 3, rng), P = random_sparse(3, 3, rng);
    const auto C = to_dense(rap_product(R, A, P));
    const auto dR = to_dense(R), dA = to_dense(A), dP = to_dense(P);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0;
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) s += dR(i, a) * dA(a, b) * dP(b, j);
        EXPECT_NEAR(C(i, j), s, 1e-14);
      }
  }
}

TEST(RapProduct, SymmetricForSymmetricA) {
  std::mt19937_64 rng(9);
  const DenseMatrix D = random_spd(6, rng);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) t.push_back({i, j, D(i, j)});
  const auto A = CsrMatrix::from_triplets(6, 6, t);
  const auto R = random_sparse(3, 6, rng);
  const auto C = rap_product(R, A, transpose(R));
  EXPECT_LE(max_abs_asymmetry(C), 1e-13 * to_dense(C).max_abs());
}

TEST(DenseSolve, Examples) {
  EXPECT_EQ(dense_solve_spd(DenseMatrix::identity(3), std::vector<double>{1, 2, 3}), (std::vector<double>{1, 2, 3}));
  const auto x = dense_solve_spd(DenseMatrix(2, 2, {2, -1, -1, 2}), std::vector<double>{1, 1});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 1.0, 1e-15);
  EXPECT_THROW(dense_solve_spd(DenseMatrix(2, 2, {1, 2, 2, 1}), std::vector<double>{1, 1}), NotPositiveDefinite);
}

TEST(DenseSolve, RandomResidual) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  const DenseMatrix A = random_spd(20, rng);
  std::vector<double> F(20);
  for (auto& v : F) v = U(rng);
  const auto x = dense_solve_spd(A, F);
  const auto Ax = A.apply(x);
  double r = 0, f = 0;
  for (int i = 0; i < 20; ++i) {
    r = std::max(r, std::abs(Ax[i] - F[i]));
    f = std::max(f, std::abs(F[i]));
  }
  EXPECT_LE(r, 1e-12 * f);
}

TEST(ProfileCholesky, MatchesDenseOnBandedMatrix) {
  const std::size_t n = 30;
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 4.0});
    if (i + 1 < n) {
      t.push_back({i, i + 1, -1.0});
      t.push_back({i + 1, i, -1.0});
    }
    if (i + 5 < n) {
      t.push_back({i, i + 5, -1.0});
      t.push_back({i + 5, i, -1.0});
    }
  }
  const auto A = CsrMatrix::from_triplets(n, n, t);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = std::sin(1.0 + i);
  const auto x = ProfileCholesky(A).solve(b);
  const auto Ax = spmv(A, x);
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(Ax[i], b[i], 1e-13);
}

TEST(GeneralizedEig, OneDimCutCell) {
  const double h = 0.1, t = 0.5;
  const DenseMatrix K(2, 2, {1 / (h * h), -1 / (h * h), -1 / (h * h), 1 / (h * h)});
  const DenseMatrix M(2, 2, {t / h, -t / h, -t / h, t / h});
  const auto r = generalized_eig_max(K, M);
  EXPECT_NEAR(r.max_eigenvalue, 20.0, 1e-12);
  EXPECT_EQ(r.deflated_dim, 1u);
}

TEST(GeneralizedEig, OneDimGrid) {
  for (double t : {0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0})
    for (int m = 5; m <= 10; ++m) {
      const double h = std::ldexp(1.0, -m);
      const DenseMatrix K(2, 2, {1 / (h * h), -1 / (h * h), -1 / (h * h), 1 / (h * h)});
      const DenseMatrix M(2, 2, {t / h, -t / h, -t / h, t / h});
      EXPECT_NEAR(generalized_eig_max(K, M).max_eigenvalue * t * h, 1.0, 1e-10);
    }
}

TEST(GeneralizedEig, IdentityPencil) {
  EXPECT_NEAR(generalized_eig_max(DenseMatrix::identity(3), DenseMatrix::identity(3)).max_eigenvalue, 1.0, 1e-14);
}

TEST(GeneralizedEig, RandomPencilAgainstPowerIteration) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 5; ++trial) {
    const DenseMatrix K = random_spd(4, rng), M = random_spd(4, rng);
    std::vector<std::vector<double>> Md(4, std::vector<double>(4));
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) Md[i][j] = M(i, j);
    std::vector<double> v{1, 0.3, -0.2, 0.7};
    double rq = 0;
    for (int it = 0; it < 2000; ++it) {
      const auto w = gauss_solve(Md, K.apply(v));
      double nrm = 0;
      for (double x : w) nrm += x * x;
      nrm = std::sqrt(nrm);
      for (int i = 0; i < 4; ++i) v[i] = w[i] / nrm;
      const auto Kv = K.apply(v), Mv = M.apply(v);
      double num = 0, den = 0;
      for (int i = 0; i < 4; ++i) {
        num += v[i] * Kv[i];
        den += v[i] * Mv[i];
      }
      rq = num / den;
    }
    EXPECT_NEAR(generalized_eig_max(K, M).max_eigenvalue, rq, 1e-10 * rq);
  }
}

TEST(GeneralizedEig, SingularOutsideNullKThrows) {
  const DenseMatrix K = DenseMatrix::identity(2);
  const DenseMatrix M(2, 2, {1, 0, 0, 0});
  EXPECT_THROW(generalized_eig_max(K, M), DegeneratePencil);
}
