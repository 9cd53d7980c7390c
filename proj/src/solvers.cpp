#include "fracprec/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace fracprec {

namespace {

/// Block-diagonal sparse matrix of the primal norm blocks, for checking the
/// Schur-route precondition.
SparseMatrix primal_norm_sparse(const BlockSystem& sys) {
  std::vector<Triplet> trip;
  int off = 0;
  for (int f = 0; f < sys.n_primal_fields; ++f) {
    const auto& blk = sys.norm_blocks[f];
    if (blk.is_dense)
      throw std::runtime_error("primal norm block stored dense; Schur route unavailable");
    const auto& m = blk.sparse;
    for (int i = 0; i < m.rows(); ++i)
      for (int k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k)
        trip.push_back({off + i, off + m.col_idx()[k], m.values()[k]});
    off += m.rows();
  }
  return SparseMatrix::from_triplets(off, off, trip);
}

}  // namespace

BlockPreconditioner::BlockPreconditioner(const BlockSystem& sys) {
  n_ = sys.total_dofs();
  int off = 0;
  for (const auto& blk : sys.norm_blocks) {
    offsets_.push_back(off);
    if (blk.is_dense) {
      sparse_factors_.push_back(nullptr);
      dense_factors_.push_back(std::make_shared<DenseFactorization>(blk.dense));
    } else {
      sparse_factors_.push_back(std::make_shared<Factorization>(blk.sparse, FactorKind::Spd));
      dense_factors_.push_back(nullptr);
    }
    off += blk.size();
  }
  if (off != n_) throw std::runtime_error("BlockPreconditioner: norm blocks do not tile the system");
}

Vector BlockPreconditioner::apply(const Vector& r) const {
  Vector out(n_);
  for (std::size_t b = 0; b < offsets_.size(); ++b) {
    int off = offsets_[b];
    int sz = sparse_factors_[b] ? sparse_factors_[b]->size() : dense_factors_[b]->size();
    Vector piece = r.segment(off, sz);
    out.segment(off, sz) = sparse_factors_[b] ? sparse_factors_[b]->solve(piece)
                                              : dense_factors_[b]->solve(piece);
  }
  return out;
}

std::pair<Vector, SolveReport> minres(const BlockSystem& sys, const BlockPreconditioner& pc,
                                      const MinresConfig& cfg) {
  const SparseMatrix& a = sys.op;
  const Vector& b = sys.rhs;
  int n = sys.total_dofs();

  std::mt19937_64 gen(cfg.rng_seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Vector x(n);
  for (int i = 0; i < n; ++i) x[i] = dist(gen);

  SolveReport rep;
  Vector r1 = b - a.apply(x);
  Vector y = pc.apply(r1);
  double beta1_sq = r1.dot(y);
  if (beta1_sq < 0) throw std::runtime_error("minres: preconditioner is not positive definite");
  double beta1 = std::sqrt(beta1_sq);
  rep.residuals.push_back(beta1);
  if (beta1 == 0) {
    rep.converged = true;
    return {x, rep};
  }
  double target = cfg.atol + cfg.rtol * beta1;

  double oldb = 0, beta = beta1, dbar = 0, epsln = 0, cs = -1, sn = 0, phibar = beta1;
  Vector r2 = r1, w = Vector::Zero(n), w2 = Vector::Zero(n);

  for (int itn = 1; itn <= cfg.max_iterations; ++itn) {
    Vector v = y / beta;
    y = a.apply(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = pc.apply(r2);
    oldb = beta;
    double beta_sq = r2.dot(y);
    if (beta_sq < 0) throw std::runtime_error("minres: preconditioner is not positive definite");
    beta = std::sqrt(beta_sq);

    double oldeps = epsln;
    double delta = cs * dbar + sn * alfa;
    double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::max(std::hypot(gbar, beta), 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    double phi = cs * phibar;
    phibar = sn * phibar;

    Vector w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    x += phi * w;

    rep.iterations = itn;
    rep.residuals.push_back(phibar);
    if (phibar <= target || beta == 0) {
      rep.converged = true;
      break;
    }
  }
  return {x, rep};
}

std::pair<Vector, SolveReport> minres(const BlockSystem& sys, const MinresConfig& cfg) {
  BlockPreconditioner pc(sys);
  return minres(sys, pc, cfg);
}

Vector schur_sigma(const BlockSystem& sys) {
  SparseMatrix a = sys.a_block();
  SparseMatrix nb = primal_norm_sparse(sys);
  double diff = a.plus(nb.scaled(-1.0)).max_abs();
  if (diff > 1e-10 * std::max(1.0, a.max_abs()))
    throw std::runtime_error("Schur route requires the primal norm to equal the A-block");
  SparseMatrix b = sys.b_block();
  int m = b.rows();
  Factorization af(a, FactorKind::Spd);
  SparseMatrix bt = b.transpose();
  DenseMatrix s(m, m);
  for (int j = 0; j < m; ++j) {
    Vector ej = Vector::Zero(m);
    ej[j] = 1.0;
    Vector col = bt.apply(ej);  // column j of B^T
    s.col(j) = b.apply(af.solve(col));
  }
  s = 0.5 * (s + s.transpose().eval());
  EigResult eig = dense_generalized_eig(s, sys.dual_norm_dense());
  return eig.eigenvalues;
}

SpectrumReport condition_number(const BlockSystem& sys, const ConditionOptions& opt) {
  SpectrumReport rep;
  rep.method = opt.method;
  int n = sys.total_dofs();
  int m = sys.dual_dofs();

  if (opt.method == "dense") {
    if (n > opt.dense_cap)
      throw std::runtime_error("condition_number: system size " + std::to_string(n) +
                               " exceeds the dense cap");
    Vector sigma = schur_sigma(sys);
    rep.matrix_size = m;
    double s_min = sigma[0], s_max = sigma[sigma.size() - 1];
    if (s_min < -1e-10)
      throw std::runtime_error("condition_number: negative Schur eigenvalue");
    s_min = std::max(s_min, 0.0);
    double lo = 0.5 * (std::sqrt(1.0 + 4.0 * s_min) - 1.0);
    double hi = 0.5 * (std::sqrt(1.0 + 4.0 * s_max) + 1.0);
    rep.lambda_min_abs = n > 2 * m ? std::min(lo, 1.0) : lo;
    rep.lambda_max_abs = std::max(hi, n > 2 * m ? 1.0 : hi);
  } else if (opt.method == "dense-full") {
    if (n > opt.dense_cap)
      throw std::runtime_error("condition_number: pencil size " + std::to_string(n) +
                               " exceeds the dense cap");
    EigResult eig = dense_generalized_eig(sys.op.to_dense(), sys.norm_dense());
    rep.matrix_size = n;
    double lo = std::numeric_limits<double>::max(), hi = 0;
    for (int i = 0; i < eig.eigenvalues.size(); ++i) {
      double v = std::abs(eig.eigenvalues[i]);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    rep.lambda_min_abs = lo;
    rep.lambda_max_abs = hi;
  } else if (opt.method == "iterative") {
    BlockPreconditioner pc(sys);
    LanczosResult lz = lanczos_extremes([&](const Vector& v) { return sys.op.apply(v); },
                                        [&](const Vector& v) { return pc.apply(v); }, n, opt.tol,
                                        n, opt.seed);
    rep.matrix_size = n;
    rep.lambda_min_abs = lz.lambda_min_abs;
    rep.lambda_max_abs = lz.lambda_max_abs;
  } else {
    throw std::invalid_argument("condition_number: unknown method " + opt.method);
  }
  if (rep.lambda_min_abs <= 0)
    throw std::runtime_error("condition_number: zero eigenvalue (singular system)");
  rep.condition = rep.lambda_max_abs / rep.lambda_min_abs;
  return rep;
}

}  // namespace fracprec
