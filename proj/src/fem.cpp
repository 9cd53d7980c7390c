#include "fracprec/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fracprec {

namespace {

int n_scalar_basis_2d(Element e) {
  switch (e) {
    case Element::P0: return 1;
    case Element::P1: return 3;
    case Element::P2:
    case Element::VectorP2: return 6;
  }
  return 0;
}

void eval_basis_2d(Element e, double xi, double eta, double* v) {
  double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  switch (e) {
    case Element::P0:
      v[0] = 1.0;
      return;
    case Element::P1:
      v[0] = l0; v[1] = l1; v[2] = l2;
      return;
    case Element::P2:
    case Element::VectorP2:
      v[0] = l0 * (2 * l0 - 1);
      v[1] = l1 * (2 * l1 - 1);
      v[2] = l2 * (2 * l2 - 1);
      v[3] = 4 * l0 * l1;
      v[4] = 4 * l1 * l2;
      v[5] = 4 * l2 * l0;
      return;
  }
}

// reference gradients, layout g[i][0..1]
void eval_grad_2d(Element e, double xi, double eta, double (*g)[2]) {
  double l0 = 1.0 - xi - eta, l1 = xi, l2 = eta;
  switch (e) {
    case Element::P0:
      g[0][0] = g[0][1] = 0.0;
      return;
    case Element::P1:
      g[0][0] = -1; g[0][1] = -1;
      g[1][0] = 1;  g[1][1] = 0;
      g[2][0] = 0;  g[2][1] = 1;
      return;
    case Element::P2:
    case Element::VectorP2:
      g[0][0] = -(4 * l0 - 1); g[0][1] = -(4 * l0 - 1);
      g[1][0] = 4 * l1 - 1;    g[1][1] = 0;
      g[2][0] = 0;             g[2][1] = 4 * l2 - 1;
      g[3][0] = 4 * (l0 - l1); g[3][1] = -4 * l1;
      g[4][0] = 4 * l2;        g[4][1] = 4 * l1;
      g[5][0] = -4 * l2;       g[5][1] = 4 * (l0 - l2);
      return;
  }
}

struct CellGeometry {
  double j[2][2];     // Jacobian columns (p1-p0, p2-p0)
  double jinv_t[2][2];  // inverse transpose
  double det;
  Point2 p0;
};

CellGeometry cell_geometry(const Mesh2D& mesh, int c) {
  const auto& t = mesh.cells[c];
  const auto& a = mesh.vertices[t[0]];
  const auto& b = mesh.vertices[t[1]];
  const auto& d = mesh.vertices[t[2]];
  CellGeometry g;
  g.p0 = a;
  g.j[0][0] = b[0] - a[0]; g.j[0][1] = d[0] - a[0];
  g.j[1][0] = b[1] - a[1]; g.j[1][1] = d[1] - a[1];
  g.det = g.j[0][0] * g.j[1][1] - g.j[0][1] * g.j[1][0];
  double inv = 1.0 / g.det;
  // J^{-1} = inv * [[j11, -j01],[-j10, j00]]; transpose of that
  g.jinv_t[0][0] = inv * g.j[1][1];
  g.jinv_t[0][1] = -inv * g.j[1][0];
  g.jinv_t[1][0] = -inv * g.j[0][1];
  g.jinv_t[1][1] = inv * g.j[0][0];
  return g;
}

void physical_grads(const CellGeometry& g, Element e, double xi, double eta, double (*out)[2]) {
  double ref[6][2];
  eval_grad_2d(e, xi, eta, ref);
  int n = n_scalar_basis_2d(e);
  for (int i = 0; i < n; ++i) {
    out[i][0] = g.jinv_t[0][0] * ref[i][0] + g.jinv_t[0][1] * ref[i][1];
    out[i][1] = g.jinv_t[1][0] * ref[i][0] + g.jinv_t[1][1] * ref[i][1];
  }
}

void ref_coords(const CellGeometry& g, double x, double y, double& xi, double& eta) {
  double rx = x - g.p0[0], ry = y - g.p0[1];
  double inv = 1.0 / g.det;
  xi = inv * (g.j[1][1] * rx - g.j[0][1] * ry);
  eta = inv * (-g.j[1][0] * rx + g.j[0][0] * ry);
}

// interface basis along a segment parameter t in [0,1]
int n_basis_1d(Element e) { return e == Element::P0 ? 1 : 2; }
void eval_basis_1d(Element e, double t, double* v) {
  if (e == Element::P0) {
    v[0] = 1.0;
  } else {
    v[0] = 1.0 - t;
    v[1] = t;
  }
}

void check_interface_on_mesh(const Mesh2D& mesh, const InterfaceMesh1D& im) {
  for (int s = 0; s < im.n_segments(); ++s) {
    int c = im.parent_cells[s];
    if (c < 0 || c >= static_cast<int>(mesh.cells.size()))
      throw std::runtime_error("interface not on domain boundary: bad parent cell");
    const auto& pa = mesh.vertices[im.segments[s][0]];
    const auto& ca = im.coords[s];
    if (std::hypot(pa[0] - ca[0], pa[1] - ca[1]) > 1e-12)
      throw std::runtime_error("interface not on domain boundary: coordinate mismatch");
  }
}

}  // namespace

const std::vector<QuadPoint>& tri_quadrature() {
  // 7-point degree-5 rule, weights scaled to reference area 1/2
  static const std::vector<QuadPoint> rule = [] {
    std::vector<QuadPoint> q;
    double a1 = 0.0597158717897698, b1 = 0.4701420641051151, w1 = 0.1323941527885062;
    double a2 = 0.7974269853530873, b2 = 0.1012865073234563, w2 = 0.1259391805448272;
    q.push_back({1.0 / 3, 1.0 / 3, 0.225});
    q.push_back({a1, b1, w1});
    q.push_back({b1, a1, w1});
    q.push_back({b1, b1, w1});
    q.push_back({a2, b2, w2});
    q.push_back({b2, a2, w2});
    q.push_back({b2, b2, w2});
    for (auto& p : q) p.w *= 0.5;
    return q;
  }();
  return rule;
}

const std::vector<std::pair<double, double>>& segment_quadrature() {
  static const std::vector<std::pair<double, double>> rule = [] {
    double s = std::sqrt(3.0 / 5.0);
    return std::vector<std::pair<double, double>>{
        {0.5 * (1 - s), 5.0 / 18}, {0.5, 8.0 / 18}, {0.5 * (1 + s), 5.0 / 18}};
  }();
  return rule;
}

std::shared_ptr<const FunctionSpace> FunctionSpace::create(
    std::shared_ptr<const Mesh2D> mesh, Element element, const std::set<std::string>& dirichlet_tags) {
  auto s = std::make_shared<FunctionSpace>();
  s->mesh_ = std::move(mesh);
  s->element_ = element;
  s->components_ = element == Element::VectorP2 ? 2 : 1;
  const Mesh2D& m = *s->mesh_;
  int nv = static_cast<int>(m.vertices.size());
  if (element == Element::P0) {
    s->n_scalar_dofs_ = static_cast<int>(m.cells.size());
  } else if (element == Element::P1) {
    s->n_scalar_dofs_ = nv;
  } else {
    for (const auto& cell : m.cells)
      for (int e = 0; e < 3; ++e) {
        EdgeKey k = edge_key(cell[e], cell[(e + 1) % 3]);
        if (!s->edge_index_.count(k)) {
          int id = static_cast<int>(s->edge_index_.size());
          s->edge_index_[k] = id;
        }
      }
    s->n_scalar_dofs_ = nv + static_cast<int>(s->edge_index_.size());
  }
  if (!dirichlet_tags.empty()) {
    std::set<int> dd;
    for (const auto& [k, tag] : m.facet_tags) {
      if (!dirichlet_tags.count(tag)) continue;
      std::vector<int> scalar = {k.first, k.second};
      if (element == Element::P2 || element == Element::VectorP2)
        scalar.push_back(nv + s->edge_index_.at(k));
      if (element == Element::P0)
        throw std::runtime_error("Dirichlet conditions unsupported for P0 spaces");
      for (int sd : scalar)
        for (int c = 0; c < s->components_; ++c) dd.insert(s->components_ * sd + c);
    }
    s->dirichlet_dofs_.assign(dd.begin(), dd.end());
  }
  return s;
}

std::shared_ptr<const FunctionSpace> FunctionSpace::create(
    std::shared_ptr<const InterfaceMesh1D> im, Element element) {
  if (element != Element::P0 && element != Element::P1)
    throw std::invalid_argument("interface spaces are P0 or P1");
  auto s = std::make_shared<FunctionSpace>();
  s->interface_ = std::move(im);
  s->element_ = element;
  s->n_scalar_dofs_ = element == Element::P0 ? s->interface_->n_segments()
                                             : s->interface_->n_segments() + 1;
  return s;
}

int FunctionSpace::n_cells() const {
  return interface_ ? interface_->n_segments() : static_cast<int>(mesh_->cells.size());
}

std::vector<int> FunctionSpace::scalar_cell_dofs(int cell) const {
  if (interface_) {
    if (element_ == Element::P0) return {cell};
    return {cell, cell + 1};
  }
  const auto& t = mesh_->cells[cell];
  if (element_ == Element::P0) return {cell};
  if (element_ == Element::P1) return {t[0], t[1], t[2]};
  int nv = static_cast<int>(mesh_->vertices.size());
  return {t[0], t[1], t[2],
          nv + edge_index_.at(edge_key(t[0], t[1])),
          nv + edge_index_.at(edge_key(t[1], t[2])),
          nv + edge_index_.at(edge_key(t[2], t[0]))};
}

std::vector<int> FunctionSpace::cell_dofs(int cell) const {
  auto scalar = scalar_cell_dofs(cell);
  if (components_ == 1) return scalar;
  std::vector<int> full;
  full.reserve(scalar.size() * components_);
  for (int s : scalar)
    for (int c = 0; c < components_; ++c) full.push_back(components_ * s + c);
  return full;
}

std::vector<int> FunctionSpace::free_dofs() const {
  std::vector<int> keep;
  keep.reserve(n_dofs() - dirichlet_dofs_.size());
  std::size_t p = 0;
  for (int i = 0; i < n_dofs(); ++i) {
    if (p < dirichlet_dofs_.size() && dirichlet_dofs_[p] == i) {
      ++p;
      continue;
    }
    keep.push_back(i);
  }
  return keep;
}

int FunctionSpace::edge_dof(const EdgeKey& k) const {
  return static_cast<int>(mesh_->vertices.size()) + edge_index_.at(k);
}

AssembledForm assemble_mass(const SpacePtr& space, MassWeight weight, double constant) {
  std::vector<Triplet> trip;
  int comps = space->components();
  if (space->is_interface()) {
    const auto& im = space->interface();
    int nb = n_basis_1d(space->element());
    for (int s = 0; s < im.n_segments(); ++s) {
      double len = im.lengths[s];
      double w_c = weight == MassWeight::None ? 1.0
                   : weight == MassWeight::Constant ? constant
                                                    : 1.0 / len;
      auto dofs = space->scalar_cell_dofs(s);
      double v[2];
      for (const auto& [t, gw] : segment_quadrature()) {
        eval_basis_1d(space->element(), t, v);
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nb; ++j)
            trip.push_back({dofs[i], dofs[j], w_c * gw * len * v[i] * v[j]});
      }
    }
  } else {
    const auto& mesh = space->mesh();
    int nb = n_scalar_basis_2d(space->element());
    for (int c = 0; c < space->n_cells(); ++c) {
      auto g = cell_geometry(mesh, c);
      double area = 0.5 * g.det;
      double w_c = weight == MassWeight::None ? 1.0
                   : weight == MassWeight::Constant ? constant
                                                    : 1.0 / area;
      auto dofs = space->scalar_cell_dofs(c);
      double v[6];
      for (const auto& q : tri_quadrature()) {
        eval_basis_2d(space->element(), q.x, q.y, v);
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nb; ++j)
            for (int cc = 0; cc < comps; ++cc)
              trip.push_back({comps * dofs[i] + cc, comps * dofs[j] + cc,
                              w_c * q.w * g.det * v[i] * v[j]});
      }
    }
  }
  int n = space->n_dofs();
  return {SparseMatrix::from_triplets(n, n, trip), space, space, "mass"};
}

AssembledForm assemble_stiffness(const SpacePtr& space, double coefficient) {
  std::vector<Triplet> trip;
  int comps = space->components();
  if (space->is_interface()) {
    if (space->element() != Element::P1)
      throw std::invalid_argument("interface stiffness requires P1 (use the P0 jump form otherwise)");
    const auto& im = space->interface();
    for (int s = 0; s < im.n_segments(); ++s) {
      double k = coefficient / im.lengths[s];
      auto dofs = space->scalar_cell_dofs(s);
      trip.push_back({dofs[0], dofs[0], k});
      trip.push_back({dofs[1], dofs[1], k});
      trip.push_back({dofs[0], dofs[1], -k});
      trip.push_back({dofs[1], dofs[0], -k});
    }
  } else {
    if (space->element() == Element::P0)
      throw std::invalid_argument("stiffness undefined for P0 on a 2D mesh");
    const auto& mesh = space->mesh();
    int nb = n_scalar_basis_2d(space->element());
    for (int c = 0; c < space->n_cells(); ++c) {
      auto g = cell_geometry(mesh, c);
      auto dofs = space->scalar_cell_dofs(c);
      double grads[6][2];
      for (const auto& q : tri_quadrature()) {
        physical_grads(g, space->element(), q.x, q.y, grads);
        for (int i = 0; i < nb; ++i)
          for (int j = 0; j < nb; ++j) {
            double v = coefficient * q.w * g.det *
                       (grads[i][0] * grads[j][0] + grads[i][1] * grads[j][1]);
            for (int cc = 0; cc < comps; ++cc)
              trip.push_back({comps * dofs[i] + cc, comps * dofs[j] + cc, v});
          }
      }
    }
  }
  int n = space->n_dofs();
  return {SparseMatrix::from_triplets(n, n, trip), space, space, "stiffness"};
}

AssembledForm assemble_divergence(const SpacePtr& velocity, const SpacePtr& pressure) {
  if (velocity->element() != Element::VectorP2 || pressure->element() != Element::P1)
    throw std::invalid_argument("divergence form expects vector-P2 velocity and P1 pressure");
  if (&velocity->mesh() != &pressure->mesh())
    throw std::invalid_argument("divergence form: mismatched meshes");
  const auto& mesh = velocity->mesh();
  std::vector<Triplet> trip;
  for (int c = 0; c < velocity->n_cells(); ++c) {
    auto g = cell_geometry(mesh, c);
    auto vdofs = velocity->scalar_cell_dofs(c);
    auto pdofs = pressure->scalar_cell_dofs(c);
    double grads[6][2];
    double pv[3];
    for (const auto& q : tri_quadrature()) {
      physical_grads(g, Element::P2, q.x, q.y, grads);
      eval_basis_2d(Element::P1, q.x, q.y, pv);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 6; ++j)
          for (int cc = 0; cc < 2; ++cc)
            trip.push_back({pdofs[i], 2 * vdofs[j] + cc, q.w * g.det * grads[j][cc] * pv[i]});
    }
  }
  return {SparseMatrix::from_triplets(pressure->n_dofs(), velocity->n_dofs(), trip), pressure,
          velocity, "divergence"};
}

AssembledForm assemble_trace_coupling(const SpacePtr& domain_space, const SpacePtr& interface_space,
                                      TraceMode mode) {
  if (!interface_space->is_interface() || domain_space->is_interface())
    throw std::invalid_argument("trace coupling: wrong space kinds");
  if (mode == TraceMode::NormalComponent && domain_space->components() != 2)
    throw std::invalid_argument("normal-component trace requires a vector space");
  const auto& mesh = domain_space->mesh();
  const auto& im = interface_space->interface();
  check_interface_on_mesh(mesh, im);
  int nb1 = n_basis_1d(interface_space->element());
  int nb2 = n_scalar_basis_2d(domain_space->element());
  std::vector<Triplet> trip;
  for (int s = 0; s < im.n_segments(); ++s) {
    int cell = im.parent_cells[s];
    auto g = cell_geometry(mesh, cell);
    auto idofs = interface_space->scalar_cell_dofs(s);
    auto ddofs = domain_space->scalar_cell_dofs(cell);
    const auto& p0 = mesh.vertices[im.segments[s][0]];
    const auto& p1 = mesh.vertices[im.segments[s][1]];
    double len = im.lengths[s];
    double psi[2], phi[6];
    for (const auto& [t, gw] : segment_quadrature()) {
      double x = p0[0] + t * (p1[0] - p0[0]);
      double y = p0[1] + t * (p1[1] - p0[1]);
      double xi, eta;
      ref_coords(g, x, y, xi, eta);
      eval_basis_1d(interface_space->element(), t, psi);
      eval_basis_2d(domain_space->element(), xi, eta, phi);
      for (int i = 0; i < nb1; ++i)
        for (int j = 0; j < nb2; ++j) {
          if (mode == TraceMode::Scalar) {
            trip.push_back({idofs[i], ddofs[j], gw * len * psi[i] * phi[j]});
          } else {
            for (int cc = 0; cc < 2; ++cc)
              trip.push_back({idofs[i], 2 * ddofs[j] + cc,
                              gw * len * psi[i] * phi[j] * im.normals[s][cc]});
          }
        }
    }
  }
  return {SparseMatrix::from_triplets(interface_space->n_dofs(), domain_space->n_dofs(), trip),
          interface_space, domain_space, "trace"};
}

AssembledForm assemble_tangential_mass(const SpacePtr& velocity, const InterfaceMesh1D& im,
                                       double weight_d) {
  if (velocity->components() != 2)
    throw std::invalid_argument("tangential mass requires a vector space");
  const auto& mesh = velocity->mesh();
  check_interface_on_mesh(mesh, im);
  std::vector<Triplet> trip;
  for (int s = 0; s < im.n_segments(); ++s) {
    int cell = im.parent_cells[s];
    auto g = cell_geometry(mesh, cell);
    auto dofs = velocity->scalar_cell_dofs(cell);
    const auto& p0 = mesh.vertices[im.segments[s][0]];
    const auto& p1 = mesh.vertices[im.segments[s][1]];
    double len = im.lengths[s];
    double tau[2] = {-im.normals[s][1], im.normals[s][0]};
    double phi[6];
    for (const auto& [t, gw] : segment_quadrature()) {
      double x = p0[0] + t * (p1[0] - p0[0]);
      double y = p0[1] + t * (p1[1] - p0[1]);
      double xi, eta;
      ref_coords(g, x, y, xi, eta);
      eval_basis_2d(Element::P2, xi, eta, phi);
      for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
              trip.push_back({2 * dofs[i] + a, 2 * dofs[j] + b,
                              weight_d * gw * len * phi[i] * phi[j] * tau[a] * tau[b]});
    }
  }
  int n = velocity->n_dofs();
  return {SparseMatrix::from_triplets(n, n, trip), velocity, velocity, "tangential-mass"};
}

AssembledForm assemble_normal_derivative_coupling(const SpacePtr& pressure,
                                                  const SpacePtr& multiplier,
                                                  double coefficient_k) {
  if (!multiplier->is_interface() || pressure->components() != 1)
    throw std::invalid_argument("normal-derivative coupling: wrong space kinds");
  const auto& mesh = pressure->mesh();
  const auto& im = multiplier->interface();
  check_interface_on_mesh(mesh, im);
  int nb1 = n_basis_1d(multiplier->element());
  int nb2 = n_scalar_basis_2d(pressure->element());
  std::vector<Triplet> trip;
  for (int s = 0; s < im.n_segments(); ++s) {
    int cell = im.parent_cells[s];
    auto g = cell_geometry(mesh, cell);
    auto idofs = multiplier->scalar_cell_dofs(s);
    auto pdofs = pressure->scalar_cell_dofs(cell);
    const auto& p0 = mesh.vertices[im.segments[s][0]];
    const auto& p1 = mesh.vertices[im.segments[s][1]];
    double len = im.lengths[s];
    const auto& n = im.normals[s];
    double psi[2];
    double grads[6][2];
    for (const auto& [t, gw] : segment_quadrature()) {
      double x = p0[0] + t * (p1[0] - p0[0]);
      double y = p0[1] + t * (p1[1] - p0[1]);
      double xi, eta;
      ref_coords(g, x, y, xi, eta);
      eval_basis_1d(multiplier->element(), t, psi);
      physical_grads(g, pressure->element(), xi, eta, grads);
      for (int i = 0; i < nb1; ++i)
        for (int j = 0; j < nb2; ++j)
          trip.push_back({idofs[i], pdofs[j],
                          coefficient_k * gw * len * psi[i] *
                              (grads[j][0] * n[0] + grads[j][1] * n[1])});
    }
  }
  return {SparseMatrix::from_triplets(multiplier->n_dofs(), pressure->n_dofs(), trip), multiplier,
          pressure, "normal-derivative"};
}

AssembledForm assemble_p0_interface_stiffness(const SpacePtr& interface_space, bool closed_loop) {
  if (!interface_space->is_interface() || interface_space->element() != Element::P0)
    throw std::invalid_argument("P0 jump stiffness requires a P0 interface space");
  const auto& im = interface_space->interface();
  int n = im.n_segments();
  if (n < 1) throw std::invalid_argument("P0 jump stiffness: empty chain");
  std::vector<Triplet> trip;
  for (int f = 1; f < n; ++f) {
    double havg = 0.5 * (im.lengths[f - 1] + im.lengths[f]);
    double k = 1.0 / havg;
    trip.push_back({f - 1, f - 1, k});
    trip.push_back({f, f, k});
    trip.push_back({f - 1, f, -k});
    trip.push_back({f, f - 1, -k});
  }
  if (closed_loop && n > 1) {
    double havg = 0.5 * (im.lengths[n - 1] + im.lengths[0]);
    double k = 1.0 / havg;
    trip.push_back({n - 1, n - 1, k});
    trip.push_back({0, 0, k});
    trip.push_back({n - 1, 0, -k});
    trip.push_back({0, n - 1, -k});
  } else if (!closed_loop) {
    // exterior facets: jump = average = u|_K
    trip.push_back({0, 0, 1.0 / im.lengths[0]});
    trip.push_back({n - 1, n - 1, 1.0 / im.lengths[n - 1]});
  }
  return {SparseMatrix::from_triplets(n, n, trip), interface_space, interface_space, "p0-jump"};
}

AssembledForm apply_dirichlet(const AssembledForm& form) {
  auto rows = form.row_space->free_dofs();
  auto cols = form.col_space->free_dofs();
  return {form.matrix.restricted(rows, cols), form.row_space, form.col_space,
          form.description + "+reduced"};
}

Vector apply_dirichlet(const Vector& v, const SpacePtr& space) {
  auto keep = space->free_dofs();
  Vector r(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) r[i] = v[keep[i]];
  return r;
}

Vector interpolate(const SpacePtr& space, const std::function<double(double, double, int)>& f) {
  Vector u = Vector::Zero(space->n_dofs());
  int comps = space->components();
  if (space->is_interface()) {
    const auto& im = space->interface();
    if (space->element() == Element::P0) {
      for (int s = 0; s < im.n_segments(); ++s) {
        double x = 0.5 * (im.coords[s][0] + im.coords[s + 1][0]);
        double y = 0.5 * (im.coords[s][1] + im.coords[s + 1][1]);
        u[s] = f(x, y, 0);
      }
    } else {
      for (std::size_t v = 0; v < im.coords.size(); ++v)
        u[v] = f(im.coords[v][0], im.coords[v][1], 0);
    }
    return u;
  }
  const auto& mesh = space->mesh();
  if (space->element() == Element::P0) {
    for (int c = 0; c < space->n_cells(); ++c) {
      const auto& t = mesh.cells[c];
      double x = (mesh.vertices[t[0]][0] + mesh.vertices[t[1]][0] + mesh.vertices[t[2]][0]) / 3;
      double y = (mesh.vertices[t[0]][1] + mesh.vertices[t[1]][1] + mesh.vertices[t[2]][1]) / 3;
      u[c] = f(x, y, 0);
    }
    return u;
  }
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    for (int c = 0; c < comps; ++c)
      u[comps * static_cast<int>(v) + c] = f(mesh.vertices[v][0], mesh.vertices[v][1], c);
  if (space->element() == Element::P2 || space->element() == Element::VectorP2) {
    for (int cell = 0; cell < space->n_cells(); ++cell) {
      const auto& t = mesh.cells[cell];
      for (int e = 0; e < 3; ++e) {
        int a = t[e], b = t[(e + 1) % 3];
        int sd = space->edge_dof(edge_key(a, b));
        double x = 0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]);
        double y = 0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1]);
        for (int c = 0; c < comps; ++c) u[comps * sd + c] = f(x, y, c);
      }
    }
  }
  return u;
}

FEFunction::FEFunction(SpacePtr space, Vector coeffs)
    : space_(std::move(space)), coeffs_(std::move(coeffs)) {
  if (space_->is_interface()) throw std::invalid_argument("FEFunction requires a 2D space");
  if (coeffs_.size() != space_->n_dofs()) throw std::invalid_argument("FEFunction: size mismatch");
  const auto& mesh = space_->mesh();
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& v : mesh.vertices) {
    x0 = std::min(x0, v[0]); x1 = std::max(x1, v[0]);
    y0 = std::min(y0, v[1]); y1 = std::max(y1, v[1]);
  }
  int n = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(mesh.cells.size()))));
  nx_ = ny_ = n;
  x0_ = x0; y0_ = y0;
  hx_ = (x1 - x0) / n + 1e-300;
  hy_ = (y1 - y0) / n + 1e-300;
  bins_.resize(static_cast<std::size_t>(n) * n);
  for (int c = 0; c < space_->n_cells(); ++c) {
    const auto& t = mesh.cells[c];
    double cx0 = 1e300, cy0 = 1e300, cx1 = -1e300, cy1 = -1e300;
    for (int k = 0; k < 3; ++k) {
      cx0 = std::min(cx0, mesh.vertices[t[k]][0]); cx1 = std::max(cx1, mesh.vertices[t[k]][0]);
      cy0 = std::min(cy0, mesh.vertices[t[k]][1]); cy1 = std::max(cy1, mesh.vertices[t[k]][1]);
    }
    int i0 = std::clamp(static_cast<int>((cx0 - x0_) / hx_), 0, nx_ - 1);
    int i1 = std::clamp(static_cast<int>((cx1 - x0_) / hx_), 0, nx_ - 1);
    int j0 = std::clamp(static_cast<int>((cy0 - y0_) / hy_), 0, ny_ - 1);
    int j1 = std::clamp(static_cast<int>((cy1 - y0_) / hy_), 0, ny_ - 1);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) bins_[static_cast<std::size_t>(j) * nx_ + i].push_back(c);
  }
}

int FEFunction::locate(double x, double y, double& xi, double& eta) const {
  int i = std::clamp(static_cast<int>((x - x0_) / hx_), 0, nx_ - 1);
  int j = std::clamp(static_cast<int>((y - y0_) / hy_), 0, ny_ - 1);
  const auto& mesh = space_->mesh();
  const double tol = 1e-10;
  for (int c : bins_[static_cast<std::size_t>(j) * nx_ + i]) {
    auto g = cell_geometry(mesh, c);
    double lxi, leta;
    ref_coords(g, x, y, lxi, leta);
    if (lxi >= -tol && leta >= -tol && lxi + leta <= 1 + tol) {
      xi = lxi;
      eta = leta;
      return c;
    }
  }
  throw std::runtime_error("FEFunction: point outside mesh");
}

double FEFunction::value(double x, double y, int component) const {
  double xi, eta;
  int c = locate(x, y, xi, eta);
  auto dofs = space_->scalar_cell_dofs(c);
  double v[6];
  eval_basis_2d(space_->element(), xi, eta, v);
  double s = 0;
  int comps = space_->components();
  for (std::size_t k = 0; k < dofs.size(); ++k)
    s += v[k] * coeffs_[comps * dofs[k] + component];
  return s;
}

std::array<double, 2> FEFunction::gradient(double x, double y, int component) const {
  double xi, eta;
  int c = locate(x, y, xi, eta);
  auto g = cell_geometry(space_->mesh(), c);
  auto dofs = space_->scalar_cell_dofs(c);
  double grads[6][2];
  physical_grads(g, space_->element(), xi, eta, grads);
  std::array<double, 2> out{0, 0};
  int comps = space_->components();
  for (std::size_t k = 0; k < dofs.size(); ++k) {
    double u = coeffs_[comps * dofs[k] + component];
    out[0] += grads[k][0] * u;
    out[1] += grads[k][1] * u;
  }
  return out;
}

}  // namespace fracprec
