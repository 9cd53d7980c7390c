#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracprec/fem.hpp"
#include "fracprec/problems.hpp"

#include <cmath>
#include <memory>

using namespace fracprec;

namespace {

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

std::shared_ptr<const Mesh2D> unit_mesh(int n, const std::string& bc = "") {
  Mesh2D m = generate_crossed(n, n, {0, 0, 1, 1});
  if (!bc.empty()) m = tag_scalar_problem_boundary(m, "babuska", bc);
  return std::make_shared<const Mesh2D>(m);
}

}  // namespace

TEST_CASE("triangle quadrature integrates monomials to degree 5 exactly") {
  const auto& q = tri_quadrature();
  double wsum = 0;
  for (const auto& p : q) wsum += p.w;
  CHECK(wsum == doctest::Approx(0.5).epsilon(1e-14));
  for (int a = 0; a <= 5; ++a)
    for (int b = 0; a + b <= 5; ++b) {
      double val = 0;
      for (const auto& p : q) val += p.w * std::pow(p.x, a) * std::pow(p.y, b);
      double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
      CHECK(val == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("segment quadrature integrates monomials to degree 5 exactly") {
  const auto& q = segment_quadrature();
  for (int k = 0; k <= 5; ++k) {
    double val = 0;
    for (const auto& [t, w] : q) val += w * std::pow(t, k);
    CHECK(val == doctest::Approx(1.0 / (k + 1)).epsilon(1e-13));
  }
}

TEST_CASE("function space dof counts on a crossed mesh") {
  auto mesh = unit_mesh(2);
  int nv = static_cast<int>(mesh->vertices.size());  // 9 grid + 4 centers
  CHECK(nv == 13);
  auto p1 = FunctionSpace::create(mesh, Element::P1);
  CHECK(p1->n_dofs() == nv);
  auto p2 = FunctionSpace::create(mesh, Element::P2);
  CHECK(p2->n_dofs() == 41);  // 13 vertices + 28 edges
  auto v2 = FunctionSpace::create(mesh, Element::VectorP2);
  CHECK(v2->components() == 2);
  CHECK(v2->n_dofs() == 2 * p2->n_dofs());
  auto p0 = FunctionSpace::create(mesh, Element::P0);
  CHECK(p0->n_dofs() == static_cast<int>(mesh->cells.size()));
}

TEST_CASE("mass matrices: total mass equals the area, interpolant norms are exact") {
  auto mesh = unit_mesh(2);
  for (Element e : {Element::P0, Element::P1, Element::P2}) {
    auto space = FunctionSpace::create(mesh, e);
    DenseMatrix m = assemble_mass(space).matrix.to_dense();
    CHECK(m.sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto p1 = FunctionSpace::create(mesh, Element::P1);
  Vector u = interpolate(p1, [](double x, double y, int) { return x + y; });
  DenseMatrix m1 = assemble_mass(p1).matrix.to_dense();
  CHECK(u.dot(m1 * u) == doctest::Approx(7.0 / 6.0).epsilon(1e-12));

  // Inverse-cell-volume weighting rescales each element contribution.
  DenseMatrix mh = assemble_mass(p1, MassWeight::InverseCellVolume).matrix.to_dense();
  double area = mesh->cell_area(0);
  CHECK(mh.sum() == doctest::Approx(1.0 / area).epsilon(1e-12));
}

TEST_CASE("stiffness matrix: constants in the kernel, exact Dirichlet energies") {
  auto mesh = unit_mesh(2);
  auto p2 = FunctionSpace::create(mesh, Element::P2);
  SparseMatrix a = assemble_stiffness(p2).matrix;
  Vector ones = Vector::Ones(a.cols());
  CHECK(a.apply(ones).norm() <= 1e-12);
  Vector u = interpolate(p2, [](double x, double, int) { return x * x; });
  CHECK(u.dot(a.apply(u)) == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
  SparseMatrix a3 = assemble_stiffness(p2, 3.0).matrix;
  CHECK(u.dot(a3.apply(u)) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("divergence form satisfies the constant-pressure divergence theorem") {
  auto mesh = unit_mesh(2);
  auto vel = FunctionSpace::create(mesh, Element::VectorP2);
  auto pre = FunctionSpace::create(mesh, Element::P1);
  SparseMatrix d = assemble_divergence(vel, pre).matrix;
  REQUIRE(d.rows() == pre->n_dofs());
  REQUIRE(d.cols() == vel->n_dofs());
  Vector u = interpolate(vel, [](double x, double y, int c) { return c == 0 ? x : y; });
  Vector du = d.apply(u);  // rows: integral of q_i * div(u) (up to overall sign)
  CHECK(std::abs(du.sum()) == doctest::Approx(2.0).epsilon(1e-12));
  // A divergence-free field pairs to zero with every pressure.
  Vector w = interpolate(vel, [](double x, double y, int c) { return c == 0 ? y : x; });
  CHECK(d.apply(w).norm() <= 1e-12);
}

TEST_CASE("scalar trace coupling against P1 and P0 multipliers") {
  auto mesh = unit_mesh(2, "neumann-intersect");
  auto p2 = FunctionSpace::create(mesh, Element::P2);
  auto iface = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh, "gamma"));
  auto l1 = FunctionSpace::create(iface, Element::P1);
  SparseMatrix t1 = assemble_trace_coupling(p2, l1, TraceMode::Scalar).matrix;
  Vector u = interpolate(p2, [](double, double y, int) { return y; });
  Vector tu = t1.apply(u);
  REQUIRE(tu.size() == 3);
  CHECK(tu[0] == doctest::Approx(1.0 / 24).epsilon(1e-12));
  CHECK(tu[1] == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(tu[2] == doctest::Approx(5.0 / 24).epsilon(1e-12));

  auto l0 = FunctionSpace::create(iface, Element::P0);
  SparseMatrix t0 = assemble_trace_coupling(p2, l0, TraceMode::Scalar).matrix;
  Vector tu0 = t0.apply(u);
  REQUIRE(tu0.size() == 2);
  CHECK(tu0[0] == doctest::Approx(0.125).epsilon(1e-12));
  CHECK(tu0[1] == doctest::Approx(0.375).epsilon(1e-12));
}

TEST_CASE("normal derivative coupling matches hand integrals on the left edge") {
  auto mesh = unit_mesh(2, "neumann-intersect");
  auto p2 = FunctionSpace::create(mesh, Element::P2);
  auto iface = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh, "gamma"));
  auto l1 = FunctionSpace::create(iface, Element::P1);
  SparseMatrix d = assemble_normal_derivative_coupling(p2, l1, 1.0).matrix;
  // u = x(1-x): dn u = -1 on Gamma (outward normal (-1,0)); rows are
  // -integral of each hat: (-h/2, -h, -h/2) with h = 1/2.
  Vector u = interpolate(p2, [](double x, double, int) { return x * (1 - x); });
  Vector du = d.apply(u);
  CHECK(du[0] == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(du[1] == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK(du[2] == doctest::Approx(-0.25).epsilon(1e-12));
  // u = xy: dn u = -y; against the three hats: -1/24, -1/4, -5/24.
  Vector u2 = interpolate(p2, [](double x, double y, int) { return x * y; });
  Vector du2 = d.apply(u2);
  CHECK(du2[0] == doctest::Approx(-1.0 / 24).epsilon(1e-12));
  CHECK(du2[1] == doctest::Approx(-0.25).epsilon(1e-12));
  CHECK(du2[2] == doctest::Approx(-5.0 / 24).epsilon(1e-12));
  // The coefficient scales the whole coupling.
  SparseMatrix dk = assemble_normal_derivative_coupling(p2, l1, 2.0).matrix;
  CHECK((dk.apply(u2) - 2.0 * du2).norm() <= 1e-13);
}

TEST_CASE("tangential interface mass measures the slip energy") {
  auto mesh = unit_mesh(2, "neumann-intersect");
  auto vel = FunctionSpace::create(mesh, Element::VectorP2);
  auto iface = extract_interface(*mesh, "gamma");
  SparseMatrix t = assemble_tangential_mass(vel, iface, 2.5).matrix;
  CHECK(t.is_symmetric());
  Vector u = interpolate(vel, [](double, double, int c) { return c == 0 ? 0.0 : 1.0; });
  CHECK(u.dot(t.apply(u)) == doctest::Approx(2.5).epsilon(1e-12));
  // A purely normal velocity carries no tangential energy.
  Vector w = interpolate(vel, [](double, double, int c) { return c == 0 ? 1.0 : 0.0; });
  CHECK(w.dot(t.apply(w)) <= 1e-12);
}

TEST_CASE("P0 interface jump form: symmetric, PSD, constants in the kernel") {
  auto mesh = unit_mesh(4, "neumann-intersect");
  auto iface = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh, "gamma"));
  auto l0 = FunctionSpace::create(iface, Element::P0);
  SparseMatrix j = assemble_p0_interface_stiffness(l0).matrix;
  CHECK(j.is_symmetric());
  // The open chain includes the exterior facet terms, so the form is SPD;
  // constants only lie in the kernel of the closed-loop variant.
  EigResult e = dense_sym_eig(j.to_dense());
  CHECK(e.eigenvalues[0] > 0);
  SparseMatrix loop = assemble_p0_interface_stiffness(l0, true).matrix;
  Vector ones = Vector::Ones(loop.cols());
  CHECK(loop.apply(ones).norm() <= 1e-12);
  EigResult el = dense_sym_eig(loop.to_dense());
  CHECK(el.eigenvalues[0] >= -1e-12);
}

TEST_CASE("Dirichlet elimination removes exactly the boundary dofs") {
  auto mesh = unit_mesh(2, "neumann-intersect");
  auto p2 = FunctionSpace::create(mesh, Element::P2, {"dirichlet"});
  // Dirichlet part is x = 1: three grid vertices plus two P2 edge dofs.
  CHECK(p2->dirichlet_dofs().size() == 5);
  AssembledForm a = assemble_stiffness(p2);
  AssembledForm ar = apply_dirichlet(a);
  CHECK(ar.matrix.rows() == p2->n_dofs() - 5);
  CHECK(static_cast<int>(p2->free_dofs().size()) == p2->n_dofs() - 5);
  // The reduced operator is SPD (Poincare via the Dirichlet part).
  EigResult e = dense_sym_eig(ar.matrix.to_dense());
  CHECK(e.eigenvalues[0] > 0);
}

TEST_CASE("point evaluation reproduces interpolated polynomials") {
  auto mesh = unit_mesh(3);
  auto p2 = FunctionSpace::create(mesh, Element::P2);
  auto f = [](double x, double y) { return x * x + 2 * x * y - y; };
  Vector u = interpolate(p2, [&](double x, double y, int) { return f(x, y); });
  FEFunction fe(p2, u);
  for (double x : {0.05, 0.37, 0.71, 0.96})
    for (double y : {0.11, 0.52, 0.88}) {
      CHECK(fe.value(x, y) == doctest::Approx(f(x, y)).epsilon(1e-11));
      auto g = fe.gradient(x, y);
      CHECK(g[0] == doctest::Approx(2 * x + 2 * y).epsilon(1e-10));
      CHECK(g[1] == doctest::Approx(2 * x - 1).epsilon(1e-10));
    }
}
