#pragma once

#include "fracprec/linalg.hpp"
#include "fracprec/mesh.hpp"

#include <memory>
#include <string>

namespace fracprec {

enum class Element { P0, P1, P2, VectorP2 };

struct QuadPoint {
  double x, y, w;  // reference coordinates and weight
};

/// Degree-5 rule on the reference triangle (weights sum to 1/2).
const std::vector<QuadPoint>& tri_quadrature();
/// 3-point Gauss on [0,1] (degree 5).
const std::vector<std::pair<double, double>>& segment_quadrature();

class FunctionSpace {
public:
  static std::shared_ptr<const FunctionSpace> create(std::shared_ptr<const Mesh2D> mesh,
                                                     Element element,
                                                     const std::set<std::string>& dirichlet_tags = {});
  static std::shared_ptr<const FunctionSpace> create(std::shared_ptr<const InterfaceMesh1D> im,
                                                     Element element);

  Element element() const { return element_; }
  int components() const { return components_; }
  int n_dofs() const { return components_ * n_scalar_dofs_; }
  int n_scalar_dofs() const { return n_scalar_dofs_; }
  int n_cells() const;

  bool is_interface() const { return interface_ != nullptr; }
  const Mesh2D& mesh() const { return *mesh_; }
  const InterfaceMesh1D& interface() const { return *interface_; }
  std::shared_ptr<const Mesh2D> mesh_ptr() const { return mesh_; }
  std::shared_ptr<const InterfaceMesh1D> interface_ptr() const { return interface_; }

  /// Scalar dof ids for a cell (2D) or segment (1D), in local basis order.
  std::vector<int> scalar_cell_dofs(int cell) const;
  /// Full dof ids; vector spaces interleave components as 2*scalar+c.
  std::vector<int> cell_dofs(int cell) const;

  const std::vector<int>& dirichlet_dofs() const { return dirichlet_dofs_; }
  std::vector<int> free_dofs() const;

  /// P2 edge dof id (scalar numbering) for a mesh edge.
  int edge_dof(const EdgeKey& k) const;

private:
  std::shared_ptr<const Mesh2D> mesh_;
  std::shared_ptr<const InterfaceMesh1D> interface_;
  Element element_ = Element::P1;
  int components_ = 1;
  int n_scalar_dofs_ = 0;
  std::map<EdgeKey, int> edge_index_;
  std::vector<int> dirichlet_dofs_;
};

using SpacePtr = std::shared_ptr<const FunctionSpace>;

struct AssembledForm {
  SparseMatrix matrix;
  SpacePtr row_space;
  SpacePtr col_space;
  std::string description;
};

enum class MassWeight { None, Constant, InverseCellVolume };

AssembledForm assemble_mass(const SpacePtr& space, MassWeight weight = MassWeight::None,
                            double constant = 1.0);
AssembledForm assemble_stiffness(const SpacePtr& space, double coefficient = 1.0);
AssembledForm assemble_divergence(const SpacePtr& velocity, const SpacePtr& pressure);

enum class TraceMode { Scalar, NormalComponent };
AssembledForm assemble_trace_coupling(const SpacePtr& domain_space, const SpacePtr& interface_space,
                                      TraceMode mode);
AssembledForm assemble_tangential_mass(const SpacePtr& velocity,
                                       const InterfaceMesh1D& interface, double weight_d);
AssembledForm assemble_normal_derivative_coupling(const SpacePtr& pressure,
                                                  const SpacePtr& multiplier, double coefficient_k);
AssembledForm assemble_p0_interface_stiffness(const SpacePtr& interface_space, bool closed_loop = false);

/// Restrict a form to the free dofs of its row/column spaces (elimination of
/// Dirichlet rows and columns).
AssembledForm apply_dirichlet(const AssembledForm& form);
Vector apply_dirichlet(const Vector& v, const SpacePtr& space);

/// Nodal interpolation of an analytic function (per component).
Vector interpolate(const SpacePtr& space,
                   const std::function<double(double, double, int)>& f);

/// Point evaluation of a finite element function with a bin-grid cell locator.
class FEFunction {
public:
  FEFunction(SpacePtr space, Vector coeffs);
  double value(double x, double y, int component = 0) const;
  std::array<double, 2> gradient(double x, double y, int component = 0) const;
  const Vector& coeffs() const { return coeffs_; }

private:
  int locate(double x, double y, double& xi, double& eta) const;
  SpacePtr space_;
  Vector coeffs_;
  double x0_, y0_, hx_, hy_;
  int nx_, ny_;
  std::vector<std::vector<int>> bins_;
};

}  // namespace fracprec
