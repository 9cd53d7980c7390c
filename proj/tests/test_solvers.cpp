#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracprec/problems.hpp"
#include "fracprec/solvers.hpp"

#include <cmath>
#include <memory>

using namespace fracprec;

namespace {

BlockSystem trace_system(int level, const std::string& precond = "hinv-mass") {
  int n = 1 << level;
  ScalarProblemOptions opt;
  opt.pairing = "p2p1";
  opt.bc = "none";
  opt.precond = PrecondVariant::parse(precond);
  opt.level = level;
  opt.h = 1.0 / n;
  auto mesh = std::make_shared<const Mesh2D>(
      tag_scalar_problem_boundary(generate_crossed(n, n, {0, 0, 1, 1}), "l2-trace", "none"));
  return build_l2_trace(mesh, opt);
}

}  // namespace

TEST_CASE("block preconditioner applies the inverse of the block norm") {
  BlockSystem sys = trace_system(2);
  BlockPreconditioner pc(sys);
  CHECK(pc.size() == sys.total_dofs());
  DenseMatrix n = sys.norm_dense();
  Vector r = Vector::LinSpaced(sys.total_dofs(), -1.0, 1.0);
  Vector z = pc.apply(r);
  CHECK((n * z - r).norm() <= 1e-9 * r.norm());
}

TEST_CASE("minres solves the saddle system and reports monotone residuals") {
  BlockSystem sys = trace_system(2);
  sys.rhs = build_rhs(sys);
  MinresConfig cfg;
  auto [x, rep] = minres(sys, cfg);
  CHECK(rep.converged);
  CHECK(rep.iterations > 0);
  CHECK(rep.iterations <= cfg.max_iterations);
  REQUIRE(rep.residuals.size() == static_cast<std::size_t>(rep.iterations) + 1);
  for (std::size_t i = 1; i < rep.residuals.size(); ++i)
    CHECK(rep.residuals[i] <= rep.residuals[i - 1] * (1.0 + 1e-12));
  CHECK(rep.residuals.back() <= cfg.atol + cfg.rtol * rep.residuals.front());
  // The returned iterate solves the linear system.
  Vector resid = sys.op.apply(x) - sys.rhs;
  CHECK(resid.norm() <= 1e-6 * sys.rhs.norm());
}

TEST_CASE("minres iteration counts are deterministic for a fixed seed") {
  BlockSystem sys = trace_system(2);
  sys.rhs = build_rhs(sys);
  MinresConfig cfg;
  cfg.rng_seed = 17;
  auto [x1, r1] = minres(sys, cfg);
  auto [x2, r2] = minres(sys, cfg);
  CHECK(r1.iterations == r2.iterations);
  CHECK((x1 - x2).norm() == 0.0);
}

TEST_CASE("minres iteration counts track the preconditioner quality") {
  // The well-scaled norm keeps iteration counts flat under refinement while a
  // mis-scaled fractional norm (whose condition number grows like 1/h) does
  // not.
  auto iters = [](int level, const std::string& precond) {
    BlockSystem sys = trace_system(level, precond);
    sys.rhs = build_rhs(sys);
    auto [x, rep] = minres(sys);
    CHECK(rep.converged);
    return rep.iterations;
  };
  int good4 = iters(4, "hinv-mass");
  int good5 = iters(5, "hinv-mass");
  int bad5 = iters(5, "fractional(-0.5)");
  CHECK(good5 <= good4 + 2);
  CHECK(bad5 > 2 * good5);
}

TEST_CASE("the three condition-number routes agree") {
  for (std::string precond : {"hinv-mass", "identity-mass"}) {
    BlockSystem sys = trace_system(2, precond);
    ConditionOptions dense;
    ConditionOptions full;
    full.method = "dense-full";
    ConditionOptions iter;
    iter.method = "iterative";
    double c_dense = condition_number(sys, dense).condition;
    double c_full = condition_number(sys, full).condition;
    double c_iter = condition_number(sys, iter).condition;
    CHECK(c_full == doctest::Approx(c_dense).epsilon(1e-6));
    CHECK(c_iter == doctest::Approx(c_dense).epsilon(1e-2));
  }
}

TEST_CASE("dense route reports the Schur-derived extreme eigenvalues") {
  BlockSystem sys = trace_system(2);
  Vector sigma = schur_sigma(sys);
  SpectrumReport rep = condition_number(sys);
  double hi = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * sigma.maxCoeff()));
  double lo = std::min(1.0, 0.5 * (std::sqrt(1.0 + 4.0 * sigma.minCoeff()) - 1.0));
  CHECK(rep.lambda_max_abs == doctest::Approx(hi).epsilon(1e-12));
  CHECK(rep.lambda_min_abs == doctest::Approx(lo).epsilon(1e-12));
  CHECK(rep.condition == doctest::Approx(hi / lo).epsilon(1e-12));
}

TEST_CASE("dense cap is enforced") {
  BlockSystem sys = trace_system(2);
  ConditionOptions opt;
  opt.dense_cap = 10;
  CHECK_THROWS(condition_number(sys, opt));
  opt.method = "dense-full";
  CHECK_THROWS(condition_number(sys, opt));
  opt.method = "nonsense";
  CHECK_THROWS(condition_number(sys, opt));
}
