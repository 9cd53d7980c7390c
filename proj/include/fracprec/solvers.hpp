#pragma once

#include "fracprec/linalg.hpp"
#include "fracprec/problems.hpp"

#include <string>
#include <vector>

namespace fracprec {

/// Block-diagonal Riesz-map preconditioner: factorizes every norm block once
/// and applies N^{-1} blockwise.
class BlockPreconditioner {
public:
  explicit BlockPreconditioner(const BlockSystem& system);
  Vector apply(const Vector& r) const;
  int size() const { return n_; }

private:
  int n_ = 0;
  std::vector<int> offsets_;
  std::vector<std::shared_ptr<Factorization>> sparse_factors_;
  std::vector<std::shared_ptr<DenseFactorization>> dense_factors_;
};

struct MinresConfig {
  double rtol = 1e-8;
  double atol = 1e-10;
  int max_iterations = 1000;
  unsigned long rng_seed = 1;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  std::vector<double> residuals;  // preconditioned residual norms, [0] = initial
};

/// Preconditioned MINRES for op x = rhs with a random initial guess drawn
/// from the seeded generator. Convergence is measured in the N^{-1} norm of
/// the residual against atol + rtol * initial.
std::pair<Vector, SolveReport> minres(const BlockSystem& system, const BlockPreconditioner& pc,
                                      const MinresConfig& cfg = {});
std::pair<Vector, SolveReport> minres(const BlockSystem& system, const MinresConfig& cfg = {});

struct SpectrumReport {
  double lambda_min_abs = 0;
  double lambda_max_abs = 0;
  double condition = 0;
  int matrix_size = 0;
  std::string method;
};

struct ConditionOptions {
  std::string method = "dense";  // "dense" | "dense-full" | "iterative"
  int dense_cap = 12000;         // max pencil size for the dense routes
  double tol = 1e-8;             // iterative route
  unsigned long seed = 1;
};

/// Extreme generalized eigenvalues of op x = lambda N x. The default route
/// exploits that the primal norm blocks equal the A-block: eigenvalues are
/// {1} plus (1 +- sqrt(1 + 4 sigma)) / 2 over the eigenvalues sigma of the
/// dual Schur complement B A^{-1} B^T w = sigma N_dual w, so only a dense
/// problem of the constraint size is solved. "dense-full" forms the whole
/// pencil, "iterative" runs the Lanczos route on the preconditioned operator.
SpectrumReport condition_number(const BlockSystem& system, const ConditionOptions& opt = {});

/// Eigenvalues of the reduced dual pencil (ascending), for calibration tests.
Vector schur_sigma(const BlockSystem& system);

}  // namespace fracprec
