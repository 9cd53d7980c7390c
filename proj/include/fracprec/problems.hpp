#pragma once

#include "fracprec/fem.hpp"
#include "fracprec/fractional.hpp"
#include "fracprec/linalg.hpp"
#include "fracprec/mesh.hpp"

#include <memory>
#include <string>
#include <vector>

namespace fracprec {

struct ParameterSet {
  double mu = 1.0;       // fluid viscosity
  double k = 1.0;        // permeability
  double alpha = 1.0;    // slip coefficient
  double bjs_weight() const;  // D = alpha * sqrt(mu / k)
};

/// Interface preconditioner variant for the multiplier block.
struct PrecondVariant {
  enum class Kind { IdentityMass, HinvMass, Fractional, NaiveDS, RobustDS };
  Kind kind = Kind::IdentityMass;
  double s = 0.5;  // Fractional: exponent of the single H(s) term

  static PrecondVariant parse(const std::string& name);
  std::string name() const;
};

/// One diagonal block of the Riesz-map norm; sparse for the field blocks,
/// dense for fractional multiplier norms.
struct NormBlock {
  bool is_dense = false;
  SparseMatrix sparse;
  DenseMatrix dense;
  int size() const { return is_dense ? static_cast<int>(dense.rows()) : sparse.rows(); }
};

/// Symmetric block system op * x = rhs with a block-diagonal norm. The first
/// n_primal_fields fields form the coercive A-block; the rest carry the
/// constraints. For every problem built here the primal norm blocks equal the
/// corresponding A-blocks, which enables the exact Schur reduction of the
/// preconditioned spectrum.
struct BlockSystem {
  std::string problem;      // "l2-trace" | "babuska" | "darcy-stokes"
  std::string mesh_family;  // "us" | "uu" | "nu"
  int level = 0;
  double h = 0;
  std::string pairing;   // "p2p1" | "p2p0" (scalar problems)
  std::string bc;        // problem-specific boundary variant
  std::string precond;   // preconditioner variant name
  ParameterSet params;

  std::vector<std::string> field_names;
  std::vector<int> field_sizes;
  int n_primal_fields = 1;

  SparseMatrix op;
  std::vector<NormBlock> norm_blocks;
  Vector rhs;

  int total_dofs() const;
  int primal_dofs() const;
  int dual_dofs() const;
  int field_offset(int field) const;
  SparseMatrix a_block() const;  // primal-primal part of op
  SparseMatrix b_block() const;  // dual-primal part of op
  DenseMatrix norm_dense() const;
  DenseMatrix dual_norm_dense() const;
  std::string dofs_per_field() const;  // "n1+n2+..." for reporting
};

/// Tag the boundary of a unit-square mesh for the scalar problems. Gamma is
/// {x = 0}; `bc` selects what happens on the rest (and, for the trace
/// problem, whether the complement is constrained).
Mesh2D tag_scalar_problem_boundary(const Mesh2D& mesh, const std::string& problem,
                                   const std::string& bc);

struct ScalarProblemOptions {
  std::string pairing = "p2p1";  // multiplier element: p2p1 -> P1, p2p0 -> P0
  std::string bc;                // l2-trace: "none" | "complement-of-gamma"
                                 // babuska: "neumann-intersect" | "dirichlet-intersect"
  PrecondVariant precond;
  std::string mesh_family = "us";
  int level = 0;
  double h = 0;  // reported mesh size
};

/// Trace-constrained L2 projection on a tagged unit-square mesh.
BlockSystem build_l2_trace(std::shared_ptr<const Mesh2D> mesh, const ScalarProblemOptions& opt);

/// Poisson problem with the normal derivative on Gamma as a P0 multiplier.
BlockSystem build_babuska(std::shared_ptr<const Mesh2D> mesh, const ScalarProblemOptions& opt);

struct DarcyStokesOptions {
  ParameterSet params;
  PrecondVariant precond;  // NaiveDS or RobustDS
  int level = 2;           // N = 2^level squares per unit side
};

/// Coupled Stokes-Darcy system on [0,2]x[0,1] with the interface at x = 1;
/// fields (u_f, p_p, p_f, lambda), primal block (u_f, p_p).
BlockSystem build_darcy_stokes(const DarcyStokesOptions& opt);

/// The manufactured load used by every builder (unit body force / source on
/// the primal fields, zero constraint data).
Vector build_rhs(const BlockSystem& system);

}  // namespace fracprec
