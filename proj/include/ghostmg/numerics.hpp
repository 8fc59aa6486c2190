// Sparse and small dense linear algebra kernels used by the ghost-FEM
// multigrid solver.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ghostmg {

using Vector = std::vector<double>;

/// Raised when a factorization meets a non-positive pivot.
class NotPositiveDefinite : public std::runtime_error {
 public:
  NotPositiveDefinite(std::size_t row, double pivot)
      : std::runtime_error("matrix is not positive definite: pivot " +
                           std::to_string(pivot) + " at row " + std::to_string(row)),
        row_(row),
        pivot_(pivot) {}

  std::size_t row() const { return row_; }
  double pivot() const { return pivot_; }

 private:
  std::size_t row_;
  double pivot_;
};

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

/// Compressed sparse row matrix in canonical form (strictly increasing
/// column indices inside each row).
class CsrMatrix {
 public:
  CsrMatrix() : row_offsets_{0} {}

  CsrMatrix(std::size_t nrows, std::size_t ncols, std::vector<std::size_t> row_offsets,
            std::vector<std::size_t> col_indices, std::vector<double> values)
      : nrows_(nrows),
        ncols_(ncols),
        row_offsets_(std::move(row_offsets)),
        col_indices_(std::move(col_indices)),
        values_(std::move(values)) {
    if (row_offsets_.size() != nrows_ + 1 || row_offsets_.front() != 0 ||
        row_offsets_.back() != col_indices_.size() || col_indices_.size() != values_.size()) {
      throw std::invalid_argument("CsrMatrix: inconsistent storage sizes");
    }
    for (std::size_t i = 0; i < nrows_; ++i) {
      if (row_offsets_[i] > row_offsets_[i + 1]) {
        throw std::invalid_argument("CsrMatrix: row offsets must be nondecreasing");
      }
      for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
        if (col_indices_[k] >= ncols_) {
          throw std::invalid_argument("CsrMatrix: column index out of range");
        }
        if (k > row_offsets_[i] && col_indices_[k] <= col_indices_[k - 1]) {
          throw std::invalid_argument("CsrMatrix: columns must be strictly increasing");
        }
      }
    }
  }

  /// Builds a canonical matrix from unordered triplets; duplicates are summed
  /// in insertion order.
  static CsrMatrix from_triplets(std::size_t nrows, std::size_t ncols,
                                 std::vector<Triplet> triplets) {
    for (const auto& t : triplets) {
      if (t.row >= nrows || t.col >= ncols) {
        throw std::invalid_argument("CsrMatrix::from_triplets: index out of range");
      }
    }
    std::stable_sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
      return a.row != b.row ? a.row < b.row : a.col < b.col;
    });
    std::vector<std::size_t> offsets(nrows + 1, 0);
    std::vector<std::size_t> cols;
    std::vector<double> vals;
    cols.reserve(triplets.size());
    vals.reserve(triplets.size());
    std::size_t k = 0;
    while (k < triplets.size()) {
      const std::size_t r = triplets[k].row;
      const std::size_t c = triplets[k].col;
      double sum = 0.0;
      while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
        sum += triplets[k].value;
        ++k;
      }
      cols.push_back(c);
      vals.push_back(sum);
      ++offsets[r + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
    return CsrMatrix(nrows, ncols, std::move(offsets), std::move(cols), std::move(vals));
  }

  static CsrMatrix identity(std::size_t n) {
    std::vector<std::size_t> offsets(n + 1);
    std::vector<std::size_t> cols(n);
    std::iota(offsets.begin(), offsets.end(), std::size_t{0});
    std::iota(cols.begin(), cols.end(), std::size_t{0});
    return CsrMatrix(n, n, std::move(offsets), std::move(cols), Vector(n, 1.0));
  }

  std::size_t nrows() const { return nrows_; }
  std::size_t ncols() const { return ncols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<std::size_t>& row_offsets() const { return row_offsets_; }
  const std::vector<std::size_t>& col_indices() const { return col_indices_; }
  const std::vector<double>& values() const { return values_; }

  std::span<const std::size_t> row_cols(std::size_t i) const {
    return {col_indices_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }
  std::span<const double> row_values(std::size_t i) const {
    return {values_.data() + row_offsets_[i], row_offsets_[i + 1] - row_offsets_[i]};
  }

  /// Entry lookup; zero for structurally absent entries.
  double operator()(std::size_t i, std::size_t j) const {
    const auto cols = row_cols(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return values_[row_offsets_[i] + static_cast<std::size_t>(it - cols.begin())];
  }

  Vector diagonal() const {
    Vector d(std::min(nrows_, ncols_), 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (*this)(i, i);
    return d;
  }

  friend bool operator==(const CsrMatrix&, const CsrMatrix&) = default;

 private:
  std::size_t nrows_ = 0;
  std::size_t ncols_ = 0;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

inline void spmv_into(const CsrMatrix& A, std::span<const double> x, std::span<double> y) {
  if (A.ncols() != x.size() || A.nrows() != y.size()) {
    throw std::invalid_argument("spmv: dimension mismatch");
  }
  const auto& off = A.row_offsets();
  const auto& col = A.col_indices();
  const auto& val = A.values();
  for (std::size_t i = 0; i < A.nrows(); ++i) {
    double s = 0.0;
    for (std::size_t k = off[i]; k < off[i + 1]; ++k) s += val[k] * x[col[k]];
    y[i] = s;
  }
}

inline Vector spmv(const CsrMatrix& A, std::span<const double> x) {
  Vector y(A.nrows());
  spmv_into(A, x, y);
  return y;
}

inline CsrMatrix transpose(const CsrMatrix& A) {
  std::vector<std::size_t> offsets(A.ncols() + 1, 0);
  for (std::size_t c : A.col_indices()) ++offsets[c + 1];
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::size_t> cols(A.nnz());
  Vector vals(A.nnz());
  std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
  for (std::size_t i = 0; i < A.nrows(); ++i) {
    const auto rc = A.row_cols(i);
    const auto rv = A.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      const std::size_t dst = cursor[rc[k]]++;
      cols[dst] = i;
      vals[dst] = rv[k];
    }
  }
  return CsrMatrix(A.ncols(), A.nrows(), std::move(offsets), std::move(cols), std::move(vals));
}

/// Sparse product A·B (row-by-row accumulation, canonical output).
inline CsrMatrix multiply(const CsrMatrix& A, const CsrMatrix& B) {
  if (A.ncols() != B.nrows()) throw std::invalid_argument("multiply: dimension mismatch");
  std::vector<std::size_t> offsets(A.nrows() + 1, 0);
  std::vector<std::size_t> cols;
  Vector vals;
  Vector acc(B.ncols(), 0.0);
  std::vector<char> used(B.ncols(), 0);
  std::vector<std::size_t> pattern;
  for (std::size_t i = 0; i < A.nrows(); ++i) {
    pattern.clear();
    const auto ac = A.row_cols(i);
    const auto av = A.row_values(i);
    for (std::size_t ka = 0; ka < ac.size(); ++ka) {
      const auto bc = B.row_cols(ac[ka]);
      const auto bv = B.row_values(ac[ka]);
      for (std::size_t kb = 0; kb < bc.size(); ++kb) {
        const std::size_t j = bc[kb];
        if (!used[j]) {
          used[j] = 1;
          pattern.push_back(j);
        }
        acc[j] += av[ka] * bv[kb];
      }
    }
    std::sort(pattern.begin(), pattern.end());
    for (std::size_t j : pattern) {
      cols.push_back(j);
      vals.push_back(acc[j]);
      acc[j] = 0.0;
      used[j] = 0;
    }
    offsets[i + 1] = cols.size();
  }
  return CsrMatrix(A.nrows(), B.ncols(), std::move(offsets), std::move(cols), std::move(vals));
}

/// Galerkin triple product R·A·P.
inline CsrMatrix rap_product(const CsrMatrix& R, const CsrMatrix& A, const CsrMatrix& P) {
  if (R.ncols() != A.nrows() || A.ncols() != P.nrows()) {
    throw std::invalid_argument("rap_product: dimension mismatch");
  }
  return multiply(R, multiply(A, P));
}

/// max |a_ij - a_ji| over the stored pattern of both triangles.
inline double max_abs_asymmetry(const CsrMatrix& A) {
  if (A.nrows() != A.ncols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t i = 0; i < A.nrows(); ++i) {
    const auto rc = A.row_cols(i);
    const auto rv = A.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) {
      worst = std::max(worst, std::abs(rv[k] - A(rc[k], i)));
    }
  }
  return worst;
}

namespace detail {

inline void check_sweep_args(const CsrMatrix& A, std::span<const double> F, std::span<double> u) {
  if (A.nrows() != A.ncols() || F.size() != A.nrows() || u.size() != A.nrows()) {
    throw std::invalid_argument("smoother: dimension mismatch");
  }
}

inline double gauss_seidel_row(const CsrMatrix& A, std::span<const double> F,
                               std::span<double> u, std::size_t i) {
  const auto rc = A.row_cols(i);
  const auto rv = A.row_values(i);
  double diag = 0.0;
  double s = F[i];
  for (std::size_t k = 0; k < rc.size(); ++k) {
    if (rc[k] == i) {
      diag = rv[k];
    } else {
      s -= rv[k] * u[rc[k]];
    }
  }
  if (diag == 0.0) {
    throw std::domain_error("gauss_seidel_sweep: zero diagonal at row " + std::to_string(i));
  }
  return s / diag;
}

}  // namespace detail

/// One forward Gauss-Seidel sweep over the listed rows (ascending order).
inline void gauss_seidel_sweep(const CsrMatrix& A, std::span<const double> F,
                               std::span<double> u, std::span<const std::size_t> rows) {
  detail::check_sweep_args(A, F, u);
  for (std::size_t i : rows) u[i] = detail::gauss_seidel_row(A, F, u, i);
}

/// One forward Gauss-Seidel sweep over every row.
inline void gauss_seidel_sweep(const CsrMatrix& A, std::span<const double> F,
                               std::span<double> u) {
  detail::check_sweep_args(A, F, u);
  for (std::size_t i = 0; i < A.nrows(); ++i) u[i] = detail::gauss_seidel_row(A, F, u, i);
}

/// Richardson step with preconditioner omega*diag(A) + (1 - omega)*I,
/// restricted to the listed rows.
inline void weighted_jacobi_sweep(const CsrMatrix& A, std::span<const double> F,
                                  std::span<double> u, double omega,
                                  std::span<const std::size_t> rows) {
  detail::check_sweep_args(A, F, u);
  Vector update(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const std::size_t i = rows[r];
    const auto rc = A.row_cols(i);
    const auto rv = A.row_values(i);
    double diag = 0.0;
    double res = F[i];
    for (std::size_t k = 0; k < rc.size(); ++k) {
      if (rc[k] == i) diag = rv[k];
      res -= rv[k] * u[rc[k]];
    }
    const double p = omega * diag + (1.0 - omega);
    if (p == 0.0) {
      throw std::domain_error("weighted_jacobi_sweep: singular preconditioner at row " +
                              std::to_string(i));
    }
    update[r] = res / p;
  }
  for (std::size_t r = 0; r < rows.size(); ++r) u[rows[r]] += update[r];
}

inline void weighted_jacobi_sweep(const CsrMatrix& A, std::span<const double> F,
                                  std::span<double> u, double omega) {
  std::vector<std::size_t> all(A.nrows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  weighted_jacobi_sweep(A, F, u, omega, all);
}

/// Row-major dense matrix. Used for element matrices and small pencils.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  explicit DenseMatrix(std::size_t dim) : DenseMatrix(dim, dim) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values)
      : rows_(rows), cols_(cols), values_(values) {
    if (values_.size() != rows * cols) throw std::invalid_argument("DenseMatrix: size mismatch");
  }

  static DenseMatrix identity(std::size_t n) {
    DenseMatrix I(n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool square() const { return rows_ == cols_; }

  double& operator()(std::size_t i, std::size_t j) { return values_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * cols_ + j]; }

  const std::vector<double>& values() const { return values_; }

  DenseMatrix transposed() const {
    DenseMatrix T(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) T(j, i) = (*this)(i, j);
    return T;
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  bool is_symmetric(double tol = 0.0) const {
    if (!square()) return false;
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = i + 1; j < cols_; ++j)
        if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
    return true;
  }

  DenseMatrix& operator+=(const DenseMatrix& o) {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("DenseMatrix: shape");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
  }

  DenseMatrix& operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
  }

  friend DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("DenseMatrix: shape");
    DenseMatrix c(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        if (aik == 0.0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
      }
    return c;
  }

  Vector apply(std::span<const double> x) const {
    if (x.size() != cols_) throw std::invalid_argument("DenseMatrix::apply: dimension mismatch");
    Vector y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Square dense matrix that callers promise to be symmetric.
using DenseSymmetricMatrix = DenseMatrix;

inline DenseMatrix to_dense(const CsrMatrix& A) {
  DenseMatrix D(A.nrows(), A.ncols());
  for (std::size_t i = 0; i < A.nrows(); ++i) {
    const auto rc = A.row_cols(i);
    const auto rv = A.row_values(i);
    for (std::size_t k = 0; k < rc.size(); ++k) D(i, rc[k]) += rv[k];
  }
  return D;
}

/// Solves A x = F for symmetric positive definite A by Cholesky.
inline Vector dense_solve_spd(const DenseSymmetricMatrix& A, std::span<const double> F) {
  const std::size_t n = A.rows();
  if (!A.square() || F.size() != n) throw std::invalid_argument("dense_solve_spd: shape");
  DenseMatrix L(n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = A(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (!(d > 0.0)) throw NotPositiveDefinite(j, d);
    const double ljj = std::sqrt(d);
    L(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = A(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= L(i, k) * L(j, k);
      L(i, j) = s / ljj;
    }
  }
  Vector x(F.begin(), F.end());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < i; ++k) x[i] -= L(i, k) * x[k];
    x[i] /= L(i, i);
  }
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t k = i + 1; k < n; ++k) x[i] -= L(k, i) * x[k];
    x[i] /= L(i, i);
  }
  return x;
}

/// Cholesky factorization restricted to the envelope (profile) of a sparse
/// SPD matrix. Fill-in stays inside each row's envelope, so lexicographically
/// numbered grid operators factor in O(N * bandwidth^2).
class ProfileCholesky {
 public:
  ProfileCholesky() = default;

  explicit ProfileCholesky(const CsrMatrix& A) : n_(A.nrows()) {
    if (A.nrows() != A.ncols()) throw std::invalid_argument("ProfileCholesky: matrix not square");
    first_.resize(n_);
    start_.resize(n_ + 1, 0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto rc = A.row_cols(i);
      std::size_t f = i;
      if (!rc.empty()) f = std::min(f, rc.front());
      first_[i] = f;
      start_[i + 1] = start_[i] + (i - f + 1);
    }
    data_.assign(start_[n_], 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      const auto rc = A.row_cols(i);
      const auto rv = A.row_values(i);
      for (std::size_t k = 0; k < rc.size() && rc[k] <= i; ++k) at(i, rc[k]) = rv[k];
    }
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t fi = first_[i];
      for (std::size_t j = fi; j < i; ++j) {
        const std::size_t lo = std::max(fi, first_[j]);
        double s = at(i, j);
        const double* li = &at(i, lo);
        const double* lj = &at(j, lo);
        for (std::size_t k = 0; k < j - lo; ++k) s -= li[k] * lj[k];
        at(i, j) = s / at(j, j);
      }
      double d = at(i, i);
      const double* li = &at(i, fi);
      for (std::size_t k = 0; k < i - fi; ++k) d -= li[k] * li[k];
      if (!(d > 0.0)) throw NotPositiveDefinite(i, d);
      at(i, i) = std::sqrt(d);
    }
  }

  std::size_t size() const { return n_; }

  Vector solve(std::span<const double> b) const {
    if (b.size() != n_) throw std::invalid_argument("ProfileCholesky::solve: dimension mismatch");
    Vector x(b.begin(), b.end());
    for (std::size_t i = 0; i < n_; ++i) {
      const std::size_t fi = first_[i];
      double s = x[i];
      const double* li = &at(i, fi);
      for (std::size_t k = 0; k < i - fi; ++k) s -= li[k] * x[fi + k];
      x[i] = s / at(i, i);
    }
    for (std::size_t i = n_; i-- > 0;) {
      x[i] /= at(i, i);
      const std::size_t fi = first_[i];
      const double* li = &at(i, fi);
      for (std::size_t k = 0; k < i - fi; ++k) x[fi + k] -= li[k] * x[i];
    }
    return x;
  }

 private:
  double& at(std::size_t i, std::size_t j) { return data_[start_[i] + (j - first_[i])]; }
  const double& at(std::size_t i, std::size_t j) const {
    return data_[start_[i] + (j - first_[i])];
  }

  std::size_t n_ = 0;
  std::vector<std::size_t> first_;
  std::vector<std::size_t> start_;
  std::vector<double> data_;
};

struct SymmetricEigen {
  Vector values;        // ascending
  DenseMatrix vectors;  // column k pairs with values[k]
};

inline SymmetricEigen symmetric_eigen(const DenseSymmetricMatrix& A) {
  const auto n = static_cast<Eigen::Index>(A.rows());
  Eigen::MatrixXd M(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      M(i, j) = 0.5 * (A(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) +
                       A(static_cast<std::size_t>(j), static_cast<std::size_t>(i)));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
  if (es.info() != Eigen::Success) throw std::runtime_error("symmetric_eigen: no convergence");
  SymmetricEigen out{Vector(static_cast<std::size_t>(n)),
                     DenseMatrix(static_cast<std::size_t>(n), static_cast<std::size_t>(n))};
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[static_cast<std::size_t>(k)] = es.eigenvalues()(k);
    for (Eigen::Index i = 0; i < n; ++i)
      out.vectors(static_cast<std::size_t>(i), static_cast<std::size_t>(k)) =
          es.eigenvectors()(i, k);
  }
  return out;
}

struct GeneralizedEigResult {
  double max_eigenvalue = 0.0;
  std::size_t deflated_dim = 0;
};

/// Raised when the reduced M of a pencil is singular on a direction that K
/// does not annihilate (an infinite eigenvalue).
class DegeneratePencil : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

// Qᵀ A Q for a column basis Q.
inline DenseMatrix project(const DenseMatrix& A, const DenseMatrix& Q) {
  return Q.transposed() * (A * Q);
}

inline DenseMatrix select_columns(const DenseMatrix& V, const std::vector<std::size_t>& keep) {
  DenseMatrix Q(V.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c)
    for (std::size_t r = 0; r < V.rows(); ++r) Q(r, c) = V(r, keep[c]);
  return Q;
}

}  // namespace detail

/// Largest finite eigenvalue of the symmetric semidefinite pencil K v = L M v.
///
/// The pencil may be singular (det(K - L M) vanishing identically). The
/// common nullspace null(K) ∩ null(M) = null(K/|K| + M/|M|) is deflated
/// first; any remaining null(M) direction must also be annihilated by K and
/// is deflated as well. The regular remainder is whitened by M^{-1/2}.
inline GeneralizedEigResult generalized_eig_max(const DenseSymmetricMatrix& K,
                                                const DenseSymmetricMatrix& M,
                                                double rel_tol = 1e-12) {
  const std::size_t n = K.rows();
  if (!K.square() || !M.square() || M.rows() != n) {
    throw std::invalid_argument("generalized_eig_max: shape mismatch");
  }
  const double kmax = K.max_abs();
  const double mmax = M.max_abs();
  if (mmax == 0.0) throw DegeneratePencil("generalized_eig_max: M vanishes");
  if (kmax == 0.0) return {0.0, n};

  DenseMatrix S(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) S(i, j) = K(i, j) / kmax + M(i, j) / mmax;
  const auto es = symmetric_eigen(S);
  const double smax = std::max(std::abs(es.values.front()), std::abs(es.values.back()));
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < n; ++k)
    if (es.values[k] > rel_tol * smax) keep.push_back(k);
  GeneralizedEigResult result;
  result.deflated_dim = n - keep.size();
  if (keep.empty()) return result;

  const DenseMatrix Q = detail::select_columns(es.vectors, keep);
  const DenseMatrix Kr = detail::project(K, Q);
  const DenseMatrix Mr = detail::project(M, Q);

  const auto em = symmetric_eigen(Mr);
  const double mr_max = std::abs(em.values.back());
  const double krn = Kr.max_abs();
  std::vector<std::size_t> regular;
  for (std::size_t k = 0; k < em.values.size(); ++k) {
    if (em.values[k] > rel_tol * mr_max) {
      regular.push_back(k);
      continue;
    }
    Vector v(Mr.rows());
    for (std::size_t r = 0; r < v.size(); ++r) v[r] = em.vectors(r, k);
    const Vector kv = Kr.apply(v);
    double kvn = 0.0;
    for (double x : kv) kvn = std::max(kvn, std::abs(x));
    if (kvn > 1e-8 * krn) {
      throw DegeneratePencil("generalized_eig_max: M singular outside null(K)");
    }
  }
  result.deflated_dim += em.values.size() - regular.size();
  if (regular.empty()) return result;

  DenseMatrix W = detail::select_columns(em.vectors, regular);
  for (std::size_t c = 0; c < regular.size(); ++c) {
    const double s = 1.0 / std::sqrt(em.values[regular[c]]);
    for (std::size_t r = 0; r < W.rows(); ++r) W(r, c) *= s;
  }
  const auto et = symmetric_eigen(detail::project(Kr, W));
  result.max_eigenvalue = std::max(0.0, et.values.back());
  return result;
}

inline std::vector<std::size_t> mask_to_indices(const std::vector<char>& mask) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i]) idx.push_back(i);
  return idx;
}

inline double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace ghostmg
