#include "fracprec/problems.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace fracprec {

namespace {

constexpr double kEdgeTol = 1e-9;

void add_block(std::vector<Triplet>& trip, const SparseMatrix& m, int roff, int coff,
               bool mirror) {
  for (int i = 0; i < m.rows(); ++i)
    for (int k = m.row_ptr()[i]; k < m.row_ptr()[i + 1]; ++k) {
      int j = m.col_idx()[k];
      double v = m.values()[k];
      trip.push_back({roff + i, coff + j, v});
      if (mirror) trip.push_back({coff + j, roff + i, v});
    }
}

std::vector<int> all_dofs(int n) {
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  return idx;
}

Element multiplier_element(const std::string& pairing) {
  if (pairing == "p2p1") return Element::P1;
  if (pairing == "p2p0") return Element::P0;
  throw std::invalid_argument("unknown element pairing: " + pairing);
}

/// Multiplier norm for the scalar problems (one term).
std::vector<NormTerm> scalar_norm_terms(const PrecondVariant& pv, HsBc bc) {
  switch (pv.kind) {
    case PrecondVariant::Kind::IdentityMass:
      return {{1.0, NormTermKind::Mass, 0.0, bc}};
    case PrecondVariant::Kind::HinvMass:
      return {{1.0, NormTermKind::MassHinv, 0.0, bc}};
    case PrecondVariant::Kind::Fractional:
      return {{1.0, NormTermKind::Hs, pv.s, bc}};
    default:
      throw std::invalid_argument("preconditioner variant " + pv.name() +
                                  " is only defined for the coupled problem");
  }
}

}  // namespace

double ParameterSet::bjs_weight() const {
  if (mu <= 0 || k <= 0 || alpha < 0)
    throw std::invalid_argument("ParameterSet: need mu > 0, K > 0, alpha >= 0");
  return alpha * std::sqrt(mu / k);
}

PrecondVariant PrecondVariant::parse(const std::string& name) {
  PrecondVariant pv;
  if (name == "identity-mass") {
    pv.kind = Kind::IdentityMass;
  } else if (name == "hinv-mass") {
    pv.kind = Kind::HinvMass;
  } else if (name == "naive-ds") {
    pv.kind = Kind::NaiveDS;
  } else if (name == "robust-ds") {
    pv.kind = Kind::RobustDS;
  } else if (name.rfind("fractional(", 0) == 0 && name.back() == ')') {
    pv.kind = Kind::Fractional;
    pv.s = std::stod(name.substr(11, name.size() - 12));
    if (pv.s < -1.0 || pv.s > 1.0)
      throw std::invalid_argument("fractional exponent outside [-1, 1]: " + name);
  } else {
    throw std::invalid_argument("unknown preconditioner variant: " + name);
  }
  return pv;
}

std::string PrecondVariant::name() const {
  switch (kind) {
    case Kind::IdentityMass:
      return "identity-mass";
    case Kind::HinvMass:
      return "hinv-mass";
    case Kind::Fractional: {
      std::ostringstream os;
      os << "fractional(" << s << ")";
      return os.str();
    }
    case Kind::NaiveDS:
      return "naive-ds";
    case Kind::RobustDS:
      return "robust-ds";
  }
  throw std::logic_error("unreachable");
}

int BlockSystem::total_dofs() const {
  int n = 0;
  for (int s : field_sizes) n += s;
  return n;
}

int BlockSystem::primal_dofs() const {
  int n = 0;
  for (int f = 0; f < n_primal_fields; ++f) n += field_sizes[f];
  return n;
}

int BlockSystem::dual_dofs() const { return total_dofs() - primal_dofs(); }

int BlockSystem::field_offset(int field) const {
  int off = 0;
  for (int f = 0; f < field; ++f) off += field_sizes[f];
  return off;
}

SparseMatrix BlockSystem::a_block() const {
  auto idx = all_dofs(primal_dofs());
  return op.restricted(idx, idx);
}

SparseMatrix BlockSystem::b_block() const {
  int np = primal_dofs();
  std::vector<int> rows(dual_dofs());
  std::iota(rows.begin(), rows.end(), np);
  return op.restricted(rows, all_dofs(np));
}

DenseMatrix BlockSystem::norm_dense() const {
  int n = total_dofs();
  DenseMatrix out = DenseMatrix::Zero(n, n);
  int off = 0;
  for (const auto& blk : norm_blocks) {
    int s = blk.size();
    out.block(off, off, s, s) = blk.is_dense ? blk.dense : blk.sparse.to_dense();
    off += s;
  }
  return out;
}

DenseMatrix BlockSystem::dual_norm_dense() const {
  int m = dual_dofs();
  DenseMatrix out = DenseMatrix::Zero(m, m);
  int off = 0;
  for (int f = n_primal_fields; f < static_cast<int>(norm_blocks.size()); ++f) {
    const auto& blk = norm_blocks[f];
    int s = blk.size();
    out.block(off, off, s, s) = blk.is_dense ? blk.dense : blk.sparse.to_dense();
    off += s;
  }
  return out;
}

std::string BlockSystem::dofs_per_field() const {
  std::ostringstream os;
  for (std::size_t f = 0; f < field_sizes.size(); ++f) {
    if (f) os << '+';
    os << field_sizes[f];
  }
  return os.str();
}

Mesh2D tag_scalar_problem_boundary(const Mesh2D& mesh, const std::string& problem,
                                   const std::string& bc) {
  auto on_gamma = [](double x, double) { return x < kEdgeTol; };
  std::vector<TagRule> rules{{"gamma", on_gamma}};
  if (problem == "l2-trace") {
    if (bc == "none")
      rules.push_back({"rest", [](double, double) { return true; }});
    else if (bc == "complement-of-gamma")
      rules.push_back({"dirichlet", [](double, double) { return true; }});
    else
      throw std::invalid_argument("l2-trace: unknown bc variant " + bc);
  } else if (problem == "babuska") {
    if (bc == "neumann-intersect") {
      rules.push_back({"dirichlet", [](double x, double) { return x > 1.0 - kEdgeTol; }});
      rules.push_back({"neumann", [](double, double) { return true; }});
    } else if (bc == "dirichlet-intersect") {
      rules.push_back({"dirichlet", [](double, double) { return true; }});
    } else {
      throw std::invalid_argument("babuska: unknown bc variant " + bc);
    }
  } else {
    throw std::invalid_argument("unknown scalar problem: " + problem);
  }
  return tag_boundary(mesh, rules);
}

BlockSystem build_l2_trace(std::shared_ptr<const Mesh2D> mesh, const ScalarProblemOptions& opt) {
  std::string bc = opt.bc.empty() ? "none" : opt.bc;
  std::set<std::string> dir_tags;
  if (bc == "complement-of-gamma")
    dir_tags = {"dirichlet"};
  else if (bc != "none")
    throw std::invalid_argument("l2-trace: unknown bc variant " + bc);

  auto v = FunctionSpace::create(mesh, Element::P2, dir_tags);
  auto iface = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh, "gamma", dir_tags));
  auto l = FunctionSpace::create(iface, multiplier_element(opt.pairing));
  // with the complement constrained, P1 multiplier dofs on the shared corner
  // vertices are dropped as well
  HsBc hs_bc = HsBc::DirichletEndpoints;
  auto lam_keep = interface_keep_dofs(l, hs_bc);

  SparseMatrix m_full = assemble_mass(v).matrix;
  SparseMatrix m_red = apply_dirichlet(assemble_mass(v)).matrix;
  SparseMatrix c = assemble_trace_coupling(v, l, TraceMode::Scalar)
                       .matrix.restricted(lam_keep, v->free_dofs());

  BlockSystem sys;
  sys.problem = "l2-trace";
  sys.pairing = opt.pairing;
  sys.bc = bc;
  sys.precond = opt.precond.name();
  sys.mesh_family = opt.mesh_family;
  sys.level = opt.level;
  sys.h = opt.h;
  sys.field_names = {"u", "lambda"};
  sys.field_sizes = {m_red.rows(), static_cast<int>(lam_keep.size())};
  sys.n_primal_fields = 1;

  std::vector<Triplet> trip;
  add_block(trip, m_red, 0, 0, false);
  add_block(trip, c, m_red.rows(), 0, true);
  int n = sys.total_dofs();
  sys.op = SparseMatrix::from_triplets(n, n, trip);

  sys.norm_blocks.resize(2);
  sys.norm_blocks[0].sparse = m_red;
  MultiplierNorm mult(l, scalar_norm_terms(opt.precond, hs_bc));
  sys.norm_blocks[1].is_dense = true;
  sys.norm_blocks[1].dense = mult.matrix();

  Vector ones_v = Vector::Ones(v->n_dofs());
  Vector b0 = apply_dirichlet(m_full.apply(ones_v), v);
  Vector b1_full = assemble_mass(l).matrix.apply(Vector::Ones(l->n_dofs()));
  sys.rhs = Vector::Zero(n);
  sys.rhs.head(b0.size()) = b0;
  for (std::size_t i = 0; i < lam_keep.size(); ++i)
    sys.rhs[m_red.rows() + static_cast<int>(i)] = b1_full[lam_keep[i]];
  return sys;
}

BlockSystem build_babuska(std::shared_ptr<const Mesh2D> mesh, const ScalarProblemOptions& opt) {
  std::string bc = opt.bc.empty() ? "neumann-intersect" : opt.bc;
  if (bc != "neumann-intersect" && bc != "dirichlet-intersect")
    throw std::invalid_argument("babuska: unknown bc variant " + bc);
  std::set<std::string> dir_tags{"dirichlet"};

  auto v = FunctionSpace::create(mesh, Element::P2, dir_tags);
  // the multiplier carries no boundary conditions in either variant
  auto iface = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh, "gamma"));
  auto l = FunctionSpace::create(iface, multiplier_element(opt.pairing));

  SparseMatrix a_full = assemble_stiffness(v).matrix;
  SparseMatrix a_red = apply_dirichlet(assemble_stiffness(v)).matrix;
  SparseMatrix d = apply_dirichlet(assemble_normal_derivative_coupling(v, l, 1.0)).matrix;

  BlockSystem sys;
  sys.problem = "babuska";
  sys.pairing = opt.pairing;
  sys.bc = bc;
  sys.precond = opt.precond.name();
  sys.mesh_family = opt.mesh_family;
  sys.level = opt.level;
  sys.h = opt.h;
  sys.field_names = {"u", "lambda"};
  sys.field_sizes = {a_red.rows(), l->n_dofs()};
  sys.n_primal_fields = 1;

  std::vector<Triplet> trip;
  add_block(trip, a_red, 0, 0, false);
  add_block(trip, d, a_red.rows(), 0, true);
  int n = sys.total_dofs();
  sys.op = SparseMatrix::from_triplets(n, n, trip);

  sys.norm_blocks.resize(2);
  sys.norm_blocks[0].sparse = a_red;
  MultiplierNorm mult(l, scalar_norm_terms(opt.precond, HsBc::None));
  sys.norm_blocks[1].is_dense = true;
  sys.norm_blocks[1].dense = mult.matrix();

  Vector b0 = apply_dirichlet(assemble_mass(v).matrix.apply(Vector::Ones(v->n_dofs())), v);
  Vector b1 = assemble_mass(l).matrix.apply(Vector::Ones(l->n_dofs()));
  sys.rhs = Vector::Zero(n);
  sys.rhs.head(b0.size()) = b0;
  sys.rhs.tail(b1.size()) = b1;
  return sys;
}

BlockSystem build_darcy_stokes(const DarcyStokesOptions& opt) {
  const ParameterSet& pr = opt.params;
  double d_weight = pr.bjs_weight();
  if (opt.precond.kind != PrecondVariant::Kind::NaiveDS &&
      opt.precond.kind != PrecondVariant::Kind::RobustDS)
    throw std::invalid_argument("darcy-stokes expects the naive-ds or robust-ds variant");
  int n_side = 1 << opt.level;

  auto mesh_f = std::make_shared<const Mesh2D>(tag_boundary(
      generate_crossed(n_side, n_side, {0, 0, 1, 1}),
      {{"dirichlet", [](double x, double) { return x < kEdgeTol; }},
       {"interface", [](double x, double) { return x > 1.0 - kEdgeTol; }},
       {"neumann", [](double, double) { return true; }}}));
  auto mesh_p = std::make_shared<const Mesh2D>(tag_boundary(
      generate_crossed(n_side, n_side, {1, 0, 2, 1}),
      {{"dirichlet", [](double x, double) { return x > 2.0 - kEdgeTol; }},
       {"interface", [](double x, double) { return x < 1.0 + kEdgeTol; }},
       {"neumann", [](double, double) { return true; }}}));

  auto vf = FunctionSpace::create(mesh_f, Element::VectorP2, {"dirichlet"});
  auto qp = FunctionSpace::create(mesh_p, Element::P2, {"dirichlet"});
  auto qf = FunctionSpace::create(mesh_f, Element::P1);

  auto iface_f = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh_f, "interface"));
  auto iface_p = std::make_shared<const InterfaceMesh1D>(extract_interface(*mesh_p, "interface"));
  if (iface_f->n_segments() != iface_p->n_segments())
    throw std::runtime_error("darcy-stokes: interface chains do not match");
  for (int s = 0; s < iface_f->n_segments(); ++s)
    if (std::abs(iface_f->lengths[s] - iface_p->lengths[s]) > 1e-12 ||
        std::abs(iface_f->coords[s][1] - iface_p->coords[s][1]) > 1e-12)
      throw std::runtime_error("darcy-stokes: interface chains do not match");
  auto lam = FunctionSpace::create(iface_f, Element::P0);
  auto lam_p = FunctionSpace::create(iface_p, Element::P0);

  SparseMatrix a_uu = assemble_stiffness(vf, pr.mu)
                          .matrix.plus(assemble_tangential_mass(vf, *iface_f, d_weight).matrix);
  auto vf_free = vf->free_dofs();
  a_uu = a_uu.restricted(vf_free, vf_free);
  SparseMatrix a_pp = apply_dirichlet(assemble_stiffness(qp, pr.k)).matrix;
  SparseMatrix b_div =
      assemble_divergence(vf, qf).matrix.restricted(all_dofs(qf->n_dofs()), vf_free);
  SparseMatrix c_tn = apply_dirichlet(assemble_trace_coupling(vf, lam, TraceMode::NormalComponent)).matrix;
  // assembled with the porous-side outward normal, so this already carries the
  // -K d/dn_f p_p sign of the mass-balance constraint
  SparseMatrix d_np = apply_dirichlet(assemble_normal_derivative_coupling(qp, lam_p, pr.k)).matrix;

  BlockSystem sys;
  sys.problem = "darcy-stokes";
  sys.mesh_family = "us";
  sys.level = opt.level;
  sys.h = 1.0 / n_side;
  sys.precond = opt.precond.name();
  sys.params = pr;
  sys.field_names = {"u_f", "p_p", "p_f", "lambda"};
  sys.field_sizes = {a_uu.rows(), a_pp.rows(), qf->n_dofs(), lam->n_dofs()};
  sys.n_primal_fields = 2;

  int o_uf = 0, o_pp = sys.field_offset(1), o_pf = sys.field_offset(2), o_lam = sys.field_offset(3);
  std::vector<Triplet> trip;
  add_block(trip, a_uu, o_uf, o_uf, false);
  add_block(trip, a_pp, o_pp, o_pp, false);
  add_block(trip, b_div, o_pf, o_uf, true);
  add_block(trip, c_tn, o_lam, o_uf, true);
  add_block(trip, d_np, o_lam, o_pp, true);
  int n = sys.total_dofs();
  sys.op = SparseMatrix::from_triplets(n, n, trip);

  sys.norm_blocks.resize(4);
  sys.norm_blocks[0].sparse = a_uu;
  sys.norm_blocks[1].sparse = a_pp;
  sys.norm_blocks[2].sparse = assemble_mass(qf, MassWeight::Constant, 1.0 / pr.mu).matrix;
  std::vector<NormTerm> lam_terms;
  lam_terms.push_back({1.0 / pr.mu, NormTermKind::Hs, -0.5, HsBc::None});
  if (opt.precond.kind == PrecondVariant::Kind::NaiveDS)
    lam_terms.push_back({pr.k, NormTermKind::Hs, 0.5, HsBc::None});
  else
    lam_terms.push_back({pr.k, NormTermKind::MassHinv, 0.0, HsBc::None});
  MultiplierNorm mult(lam, lam_terms);
  sys.norm_blocks[3].is_dense = true;
  sys.norm_blocks[3].dense = mult.matrix();

  // manufactured load: body force (1,1) in the fluid, unit source in the rock
  Vector bf_full = assemble_mass(vf).matrix.apply(Vector::Ones(vf->n_dofs()));
  Vector bp_full = assemble_mass(qp).matrix.apply(Vector::Ones(qp->n_dofs()));
  Vector bf = apply_dirichlet(bf_full, vf);
  Vector bp = apply_dirichlet(bp_full, qp);
  sys.rhs = Vector::Zero(n);
  sys.rhs.segment(o_uf, bf.size()) = bf;
  sys.rhs.segment(o_pp, bp.size()) = bp;
  return sys;
}

Vector build_rhs(const BlockSystem& system) { return system.rhs; }

}  // namespace fracprec
