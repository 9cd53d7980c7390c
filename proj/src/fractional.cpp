#include "fracprec/fractional.hpp"

#include <cmath>
#include <stdexcept>

namespace fracprec {

FractionalNorm::FractionalNorm(SparseMatrix m, SparseMatrix a)
    : m_(std::move(m)), a_(std::move(a)) {
  if (m_.rows() != a_.rows() || m_.cols() != a_.cols() || m_.rows() != m_.cols())
    throw std::invalid_argument("FractionalNorm: shape mismatch");
  m_dense_ = m_.to_dense();
  DenseMatrix apm = a_.to_dense() + m_dense_;
  EigResult e = dense_generalized_eig(apm, m_dense_);
  lambda_ = e.eigenvalues;
  u_ = e.eigenvectors;
  if (lambda_.size() > 0 && lambda_[0] <= 0)
    throw std::runtime_error("FractionalNorm: nonpositive eigenvalue (M not SPD?)");
}

DenseMatrix FractionalNorm::matrix_power(double s) const {
  Vector powers(lambda_.size());
  for (int i = 0; i < lambda_.size(); ++i) powers[i] = std::pow(lambda_[i], s);
  DenseMatrix mu = m_dense_ * u_;
  return mu * powers.asDiagonal() * mu.transpose();
}

std::pair<SparseMatrix, SparseMatrix> interface_ma_pair(const SpacePtr& space) {
  if (!space->is_interface())
    throw std::invalid_argument("interface_ma_pair: not an interface space");
  SparseMatrix m = assemble_mass(space).matrix;
  SparseMatrix a = space->element() == Element::P0
                       ? assemble_p0_interface_stiffness(space).matrix
                       : assemble_stiffness(space).matrix;
  return {std::move(m), std::move(a)};
}

DenseMatrix build_hs(const SparseMatrix& m, const SparseMatrix& a, double s) {
  if (s < -1.0 || s > 1.0) throw std::invalid_argument("build_hs: s outside [-1, 1]");
  return FractionalNorm(m, a).matrix_power(s);
}

std::vector<int> interface_keep_dofs(const SpacePtr& space, HsBc bc) {
  if (!space->is_interface())
    throw std::invalid_argument("interface_keep_dofs: not an interface space");
  const auto& im = space->interface();
  int n = space->n_dofs();
  std::vector<int> keep;
  for (int i = 0; i < n; ++i) {
    if (bc == HsBc::DirichletEndpoints && space->element() == Element::P1) {
      if (i == 0 && im.endpoint_flags[0]) continue;
      if (i == n - 1 && im.endpoint_flags[1]) continue;
    }
    keep.push_back(i);
  }
  return keep;
}

DenseMatrix build_hs(const SpacePtr& space, double s, HsBc bc) {
  auto [m, a] = interface_ma_pair(space);
  if (bc == HsBc::None) return build_hs(m, a, s);
  // H^s_00: drop dofs at flagged endpoints before eigensolving
  auto keep = interface_keep_dofs(space, bc);
  return build_hs(m.restricted(keep, keep), a.restricted(keep, keep), s);
}

double hs_identity_check(const SparseMatrix& m, const SparseMatrix& a, double s) {
  FractionalNorm fn(m, a);
  DenseMatrix hp = fn.matrix_power(s);
  DenseMatrix hm = fn.matrix_power(-s);
  DenseMatrix md = m.to_dense();
  DenseMatrix lhs = hp * md.ldlt().solve(hm);
  double scale = md.cwiseAbs().maxCoeff();
  return (lhs - md).cwiseAbs().maxCoeff() / scale;
}

MultiplierNorm::MultiplierNorm(SpacePtr interface_space, std::vector<NormTerm> terms)
    : space_(std::move(interface_space)), terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("MultiplierNorm: empty term list");
  for (const auto& t : terms_)
    if (t.weight <= 0) throw std::invalid_argument("MultiplierNorm: nonpositive weight");
  for (const auto& t : terms_) {
    DenseMatrix tm = term_matrix(t);
    if (n_.size() == 0)
      n_ = DenseMatrix::Zero(tm.rows(), tm.cols());
    else if (tm.rows() != n_.rows())
      throw std::invalid_argument("MultiplierNorm: term size mismatch (mixed bc reductions?)");
    n_ += t.weight * tm;
  }
  factor_.emplace(n_);
}

DenseMatrix MultiplierNorm::term_matrix(const NormTerm& t) const {
  auto keep = interface_keep_dofs(space_, t.bc);
  switch (t.kind) {
    case NormTermKind::Mass:
      return assemble_mass(space_).matrix.restricted(keep, keep).to_dense();
    case NormTermKind::MassHinv:
      return assemble_mass(space_, MassWeight::InverseCellVolume)
          .matrix.restricted(keep, keep)
          .to_dense();
    case NormTermKind::Hs:
      return build_hs(space_, t.s, t.bc);
  }
  throw std::logic_error("unreachable");
}

}  // namespace fracprec
