#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstddef>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

namespace fracprec {

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Column indices are sorted and unique per
/// row; duplicate triplets are summed on construction.
class SparseMatrix {
public:
  SparseMatrix() = default;
  SparseMatrix(int rows, int cols) : rows_(rows), cols_(cols), row_ptr_(rows + 1, 0) {}

  static SparseMatrix from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);
  static SparseMatrix identity(int n);
  static SparseMatrix diagonal(const Vector& d);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }

  /// OpenMP-parallel mat-vec.
  Vector apply(const Vector& x) const;
  /// Serial reference mat-vec, kept for tests and benchmarking.
  Vector apply_serial(const Vector& x) const;

  SparseMatrix transpose() const;
  SparseMatrix scaled(double c) const;
  SparseMatrix plus(const SparseMatrix& other) const;

  double max_abs() const;
  /// max_ij |A - A^T|
  double asymmetry() const;
  bool is_symmetric(double rel_tol = 1e-12) const;

  DenseMatrix to_dense() const;
  Eigen::SparseMatrix<double> to_eigen() const;
  static SparseMatrix from_eigen(const Eigen::SparseMatrix<double>& m);

  /// Extract A(keep_rows, keep_cols) given sorted index subsets.
  SparseMatrix restricted(const std::vector<int>& keep_rows, const std::vector<int>& keep_cols) const;

private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_;
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

enum class FactorKind { Spd, SymmetricIndefinite };

/// Sparse direct factorization wrapper. The SPD path uses a Cholesky
/// factorization and reports a non-positive pivot as an error; the
/// indefinite path uses sparse LU on the symmetric matrix.
class Factorization {
public:
  Factorization(const SparseMatrix& a, FactorKind kind);
  Vector solve(const Vector& b) const;
  int size() const { return n_; }

private:
  int n_ = 0;
  FactorKind kind_;
  std::shared_ptr<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>> llt_;
  std::shared_ptr<Eigen::SparseLU<Eigen::SparseMatrix<double>>> lu_;
};

/// Dense SPD Cholesky, used for the multiplier norm matrices.
class DenseFactorization {
public:
  explicit DenseFactorization(const DenseMatrix& a);
  Vector solve(const Vector& b) const;
  int size() const { return static_cast<int>(llt_.rows()); }

private:
  Eigen::LLT<DenseMatrix> llt_;
};

struct EigResult {
  Vector eigenvalues;   // ascending
  DenseMatrix eigenvectors;  // columns, B-orthonormal for the generalized case
};

/// Solve A v = lambda B v for symmetric A, SPD B (LAPACK dsygvd).
EigResult dense_generalized_eig(const DenseMatrix& a, const DenseMatrix& b);

/// Standard symmetric eigensolve (LAPACK dsyevd).
EigResult dense_sym_eig(const DenseMatrix& a);

struct LanczosResult {
  double lambda_min_abs = 0;
  double lambda_max_abs = 0;
  int iterations = 0;
  bool converged = false;
};

/// Extreme |lambda| of the pencil A x = lambda B x where apply_a applies A
/// and apply_binv applies B^{-1}. Runs a B-inner-product Lanczos iteration
/// with full reorthogonalization; with max_it >= n the Ritz values are exact.
LanczosResult lanczos_extremes(const std::function<Vector(const Vector&)>& apply_a,
                               const std::function<Vector(const Vector&)>& apply_binv,
                               int n, double tol = 1e-8, int max_it = 0,
                               unsigned long seed = 1);

}  // namespace fracprec
