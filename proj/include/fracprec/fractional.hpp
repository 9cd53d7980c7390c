#pragma once

#include "fracprec/fem.hpp"
#include "fracprec/linalg.hpp"

#include <optional>
#include <vector>

namespace fracprec {

/// Eigendecomposition of the pencil (A + M) U = M U Lambda on an interface
/// space; all eigenvalues are >= 1 since A is positive semidefinite.
class FractionalNorm {
public:
  FractionalNorm(SparseMatrix m, SparseMatrix a);

  const Vector& eigenvalues() const { return lambda_; }
  const DenseMatrix& eigenvectors() const { return u_; }
  const SparseMatrix& mass() const { return m_; }
  const SparseMatrix& stiffness() const { return a_; }

  /// H(s) = M U Lambda^s U^T M, the H^s(Gamma) norm matrix.
  DenseMatrix matrix_power(double s) const;

private:
  SparseMatrix m_, a_;
  DenseMatrix m_dense_;
  Vector lambda_;
  DenseMatrix u_;
};

enum class HsBc { None, DirichletEndpoints };

/// Dofs kept under the endpoint reduction: with DirichletEndpoints, P1 dofs
/// sitting on a flagged interface endpoint are dropped; P0 is unchanged.
std::vector<int> interface_keep_dofs(const SpacePtr& interface_space, HsBc bc);

/// Interface mass/stiffness pair per the space's element: P1 uses the 1D
/// stiffness, P0 the facet-jump form.
std::pair<SparseMatrix, SparseMatrix> interface_ma_pair(const SpacePtr& interface_space);

/// Fractional norm matrix on the interface space. With DirichletEndpoints the
/// eigenproblem is restricted to dofs away from endpoints whose endpoint flag
/// is set (the H^s_00 construction); the result is on the reduced dofs.
DenseMatrix build_hs(const SparseMatrix& m, const SparseMatrix& a, double s);
DenseMatrix build_hs(const SpacePtr& interface_space, double s, HsBc bc = HsBc::None);

/// max relative deviation of H(s) M^{-1} H(-s) from M.
double hs_identity_check(const SparseMatrix& m, const SparseMatrix& a, double s);

enum class NormTermKind { Mass, MassHinv, Hs };

struct NormTerm {
  double weight = 1.0;
  NormTermKind kind = NormTermKind::Mass;
  double s = 0.0;        // only for Hs
  HsBc bc = HsBc::None;  // endpoint reduction, applied to every kind
};

/// Weighted sum of interface norm matrices, with its SPD factorization.
class MultiplierNorm {
public:
  MultiplierNorm(SpacePtr interface_space, std::vector<NormTerm> terms);

  const DenseMatrix& matrix() const { return n_; }
  const std::vector<NormTerm>& terms() const { return terms_; }
  Vector solve(const Vector& b) const { return factor_->solve(b); }
  DenseMatrix term_matrix(const NormTerm& t) const;

private:
  SpacePtr space_;
  std::vector<NormTerm> terms_;
  DenseMatrix n_;
  std::optional<DenseFactorization> factor_;
};

}  // namespace fracprec
