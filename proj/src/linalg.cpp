#include "fracprec/linalg.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <random>

namespace fracprec {

SparseMatrix SparseMatrix::from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
  SparseMatrix m(rows, cols);
  std::vector<int> count(rows, 0);
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols)
      throw std::invalid_argument("triplet index out of range");
    ++count[t.row];
  }
  std::vector<int> offset(rows + 1, 0);
  for (int i = 0; i < rows; ++i) offset[i + 1] = offset[i] + count[i];
  std::vector<int> cursor(offset.begin(), offset.end() - 1);
  std::vector<int> cidx(triplets.size());
  std::vector<double> vals(triplets.size());
  for (const auto& t : triplets) {
    int p = cursor[t.row]++;
    cidx[p] = t.col;
    vals[p] = t.value;
  }
  // sort each row and merge duplicates
  m.row_ptr_.assign(rows + 1, 0);
  for (int i = 0; i < rows; ++i) {
    int lo = offset[i], hi = offset[i + 1];
    std::vector<int> order(hi - lo);
    for (int k = 0; k < hi - lo; ++k) order[k] = lo + k;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return cidx[a] < cidx[b]; });
    int last_col = -1;
    for (int p : order) {
      if (cidx[p] == last_col) {
        m.values_.back() += vals[p];
      } else {
        m.col_idx_.push_back(cidx[p]);
        m.values_.push_back(vals[p]);
        last_col = cidx[p];
      }
    }
    m.row_ptr_[i + 1] = static_cast<int>(m.col_idx_.size());
  }
  return m;
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (int i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, t);
}

SparseMatrix SparseMatrix::diagonal(const Vector& d) {
  std::vector<Triplet> t;
  t.reserve(d.size());
  for (int i = 0; i < d.size(); ++i) t.push_back({i, i, d[i]});
  return from_triplets(static_cast<int>(d.size()), static_cast<int>(d.size()), t);
}

Vector SparseMatrix::apply(const Vector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("spmv: shape mismatch");
  Vector y(rows_);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[i] = s;
  }
  return y;
}

Vector SparseMatrix::apply_serial(const Vector& x) const {
  if (x.size() != cols_) throw std::invalid_argument("spmv: shape mismatch");
  Vector y(rows_);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[i] = s;
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i)
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) t.push_back({col_idx_[p], i, values_[p]});
  return from_triplets(cols_, rows_, t);
}

SparseMatrix SparseMatrix::scaled(double c) const {
  SparseMatrix m = *this;
  for (auto& v : m.values_) v *= c;
  return m;
}

SparseMatrix SparseMatrix::plus(const SparseMatrix& other) const {
  if (rows_ != other.rows_ || cols_ != other.cols_)
    throw std::invalid_argument("matrix add: shape mismatch");
  std::vector<Triplet> t;
  t.reserve(values_.size() + other.values_.size());
  for (int i = 0; i < rows_; ++i)
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) t.push_back({i, col_idx_[p], values_[p]});
  for (int i = 0; i < other.rows_; ++i)
    for (int p = other.row_ptr_[i]; p < other.row_ptr_[i + 1]; ++p)
      t.push_back({i, other.col_idx_[p], other.values_[p]});
  return from_triplets(rows_, cols_, t);
}

double SparseMatrix::max_abs() const {
  double m = 0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::asymmetry() const {
  SparseMatrix d = plus(transpose().scaled(-1.0));
  return d.max_abs();
}

bool SparseMatrix::is_symmetric(double rel_tol) const {
  if (rows_ != cols_) return false;
  return asymmetry() <= rel_tol * std::max(max_abs(), 1e-300);
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d = DenseMatrix::Zero(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) d(i, col_idx_[p]) += values_[p];
  return d;
}

Eigen::SparseMatrix<double> SparseMatrix::to_eigen() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(values_.size());
  for (int i = 0; i < rows_; ++i)
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p)
      t.emplace_back(i, col_idx_[p], values_[p]);
  Eigen::SparseMatrix<double> m(rows_, cols_);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

SparseMatrix SparseMatrix::from_eigen(const Eigen::SparseMatrix<double>& m) {
  std::vector<Triplet> t;
  t.reserve(m.nonZeros());
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(m, k); it; ++it)
      t.push_back({static_cast<int>(it.row()), static_cast<int>(it.col()), it.value()});
  return from_triplets(static_cast<int>(m.rows()), static_cast<int>(m.cols()), t);
}

SparseMatrix SparseMatrix::restricted(const std::vector<int>& keep_rows,
                                      const std::vector<int>& keep_cols) const {
  std::vector<int> rmap(rows_, -1), cmap(cols_, -1);
  for (std::size_t k = 0; k < keep_rows.size(); ++k) rmap[keep_rows[k]] = static_cast<int>(k);
  for (std::size_t k = 0; k < keep_cols.size(); ++k) cmap[keep_cols[k]] = static_cast<int>(k);
  std::vector<Triplet> t;
  for (int i = 0; i < rows_; ++i) {
    if (rmap[i] < 0) continue;
    for (int p = row_ptr_[i]; p < row_ptr_[i + 1]; ++p) {
      int j = cmap[col_idx_[p]];
      if (j >= 0) t.push_back({rmap[i], j, values_[p]});
    }
  }
  return from_triplets(static_cast<int>(keep_rows.size()), static_cast<int>(keep_cols.size()), t);
}

Factorization::Factorization(const SparseMatrix& a, FactorKind kind) : n_(a.rows()), kind_(kind) {
  if (a.rows() != a.cols()) throw std::invalid_argument("factorize: matrix not square");
  auto m = a.to_eigen();
  if (kind == FactorKind::Spd) {
    llt_ = std::make_shared<Eigen::SimplicialLLT<Eigen::SparseMatrix<double>>>();
    llt_->compute(m);
    if (llt_->info() != Eigen::Success)
      throw std::runtime_error("SPD factorization failed (non-positive pivot?)");
  } else {
    lu_ = std::make_shared<Eigen::SparseLU<Eigen::SparseMatrix<double>>>();
    lu_->compute(m);
    if (lu_->info() != Eigen::Success)
      throw std::runtime_error("LU factorization failed (structurally singular?)");
  }
}

Vector Factorization::solve(const Vector& b) const {
  if (b.size() != n_) throw std::invalid_argument("solve: shape mismatch");
  return kind_ == FactorKind::Spd ? Vector(llt_->solve(b)) : Vector(lu_->solve(b));
}

DenseFactorization::DenseFactorization(const DenseMatrix& a) : llt_(a) {
  if (llt_.info() != Eigen::Success)
    throw std::runtime_error("dense Cholesky failed: matrix not SPD");
}

Vector DenseFactorization::solve(const Vector& b) const { return llt_.solve(b); }

EigResult dense_generalized_eig(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw std::invalid_argument("generalized eig: shape mismatch");
  lapack_int n = static_cast<lapack_int>(a.rows());
  EigResult r;
  r.eigenvectors = a;
  DenseMatrix bc = b;
  r.eigenvalues.resize(n);
  lapack_int info = LAPACKE_dsygvd(LAPACK_COL_MAJOR, 1, 'V', 'L', n, r.eigenvectors.data(), n,
                                   bc.data(), n, r.eigenvalues.data());
  if (info > n) throw std::runtime_error("generalized eig: B is not SPD (Cholesky failure)");
  if (info != 0) throw std::runtime_error("generalized eig: dsygvd failed to converge");
  return r;
}

EigResult dense_sym_eig(const DenseMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sym eig: matrix not square");
  lapack_int n = static_cast<lapack_int>(a.rows());
  EigResult r;
  r.eigenvectors = a;
  r.eigenvalues.resize(n);
  lapack_int info =
      LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, r.eigenvectors.data(), n, r.eigenvalues.data());
  if (info != 0) throw std::runtime_error("sym eig: dsyevd failed");
  return r;
}

LanczosResult lanczos_extremes(const std::function<Vector(const Vector&)>& apply_a,
                               const std::function<Vector(const Vector&)>& apply_binv,
                               int n, double tol, int max_it, unsigned long seed) {
  if (max_it <= 0) max_it = n;
  max_it = std::min(max_it, n);

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector u(n);
  for (int i = 0; i < n; ++i) u[i] = dist(rng);

  // B-orthonormal Lanczos vectors z_j (with q_j = B z_j) for B^{-1}A.
  std::vector<Vector> zs, qs;
  std::vector<double> alpha, beta;

  Vector z = apply_binv(u);
  double b0 = std::sqrt(u.dot(z));
  if (b0 == 0) throw std::runtime_error("lanczos: zero start vector");
  Vector q = u / b0;
  z /= b0;

  for (int j = 0; j < max_it; ++j) {
    zs.push_back(z);
    qs.push_back(q);
    Vector w = apply_a(z);
    if (j > 0) w -= beta.back() * qs[j - 1];
    double a_j = z.dot(w);
    alpha.push_back(a_j);
    w -= a_j * q;
    // full reorthogonalization in the B-inner product
    for (std::size_t k = 0; k < zs.size(); ++k) w -= zs[k].dot(w) * qs[k];
    Vector znew = apply_binv(w);
    double b_j = std::sqrt(std::max(0.0, w.dot(znew)));
    if (b_j < 1e-14 * std::abs(a_j) || static_cast<int>(alpha.size()) == n) {
      beta.push_back(0.0);
      break;
    }
    beta.push_back(b_j);
    q = w / b_j;
    z = znew / b_j;
  }

  int m = static_cast<int>(alpha.size());
  DenseMatrix t = DenseMatrix::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    t(i, i) = alpha[i];
    if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
  }
  EigResult e = dense_sym_eig(t);

  LanczosResult r;
  r.iterations = m;
  double lo = std::abs(e.eigenvalues[0]), hi = lo;
  int i_lo = 0;
  for (int i = 0; i < m; ++i) {
    double v = std::abs(e.eigenvalues[i]);
    if (v < lo) { lo = v; i_lo = i; }
    hi = std::max(hi, v);
  }
  r.lambda_min_abs = lo;
  r.lambda_max_abs = hi;
  // residual of the Ritz pair closest to zero; breakdown (beta=0) means exact
  double bm = beta.empty() ? 0.0 : beta[m - 1];
  double resid = std::abs(bm * e.eigenvectors(m - 1, i_lo));
  r.converged = (m == n) || bm == 0.0 || resid <= tol * std::max(lo, 1e-30);
  return r;
}

}  // namespace fracprec
