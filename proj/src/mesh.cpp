#include "fracprec/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fracprec {

namespace {

double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]));
}

std::string fmt_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

double Mesh2D::cell_area(int c) const {
  const auto& t = cells[c];
  return signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
}

double Mesh2D::total_area() const {
  double s = 0;
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) s += cell_area(c);
  return s;
}

std::map<EdgeKey, int> Mesh2D::boundary_edges() const {
  std::map<EdgeKey, std::pair<int, int>> count;  // edge -> (count, a cell)
  for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
    const auto& t = cells[c];
    for (int e = 0; e < 3; ++e) {
      EdgeKey k = edge_key(t[e], t[(e + 1) % 3]);
      auto it = count.find(k);
      if (it == count.end())
        count[k] = {1, c};
      else
        it->second.first++;
    }
  }
  std::map<EdgeKey, int> result;
  for (const auto& [k, v] : count)
    if (v.first == 1) result[k] = v.second;
  return result;
}

double InterfaceMesh1D::total_length() const {
  double s = 0;
  for (double l : lengths) s += l;
  return s;
}

Mesh2D generate_crossed(int nx, int ny, const Rect& bounds) {
  if (nx < 1 || ny < 1) throw std::invalid_argument("generate_crossed: subdivision counts must be positive");
  if (bounds.x1 <= bounds.x0 || bounds.y1 <= bounds.y0)
    throw std::invalid_argument("generate_crossed: degenerate bounds");
  Mesh2D m;
  double hx = (bounds.x1 - bounds.x0) / nx;
  double hy = (bounds.y1 - bounds.y0) / ny;
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertices.push_back({bounds.x0 + i * hx, bounds.y0 + j * hy});
  int grid = (nx + 1) * (ny + 1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      m.vertices.push_back({bounds.x0 + (i + 0.5) * hx, bounds.y0 + (j + 0.5) * hy});
  auto v = [&](int i, int j) { return j * (nx + 1) + i; };
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      int bl = v(i, j), br = v(i + 1, j), tr = v(i + 1, j + 1), tl = v(i, j + 1);
      int c = grid + j * nx + i;
      m.cells.push_back({bl, br, c});
      m.cells.push_back({br, tr, c});
      m.cells.push_back({tr, tl, c});
      m.cells.push_back({tl, bl, c});
    }
  return m;
}

Mesh2D refine_uniform(const Mesh2D& mesh) {
  Mesh2D m;
  m.vertices = mesh.vertices;
  std::map<EdgeKey, int> midpoint;
  auto mid = [&](int a, int b) {
    EdgeKey k = edge_key(a, b);
    auto it = midpoint.find(k);
    if (it != midpoint.end()) return it->second;
    int id = static_cast<int>(m.vertices.size());
    m.vertices.push_back({0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                          0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])});
    midpoint[k] = id;
    return id;
  };
  bool regions = !mesh.cell_region.empty();
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    auto [a, b, d] = mesh.cells[c];
    int ab = mid(a, b), bd = mid(b, d), da = mid(d, a);
    m.cells.push_back({a, ab, da});
    m.cells.push_back({ab, b, bd});
    m.cells.push_back({da, bd, d});
    m.cells.push_back({ab, bd, da});
    if (regions)
      for (int k = 0; k < 4; ++k) m.cell_region.push_back(mesh.cell_region[c]);
  }
  for (const auto& [k, tag] : mesh.facet_tags) {
    auto it = midpoint.find(k);
    if (it == midpoint.end()) continue;  // tag on an edge no longer present
    m.facet_tags[edge_key(k.first, it->second)] = tag;
    m.facet_tags[edge_key(it->second, k.second)] = tag;
  }
  return m;
}

Mesh2D read_mesh(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open mesh file: " + path);
  std::string line;
  if (!std::getline(f, line) || line != "mesh2d 1")
    throw std::runtime_error("malformed mesh header in " + path);
  int nv, nc, nt;
  if (!(f >> nv >> nc >> nt) || nv < 0 || nc < 0 || nt < 0)
    throw std::runtime_error("malformed mesh counts in " + path);
  Mesh2D m;
  m.vertices.resize(nv);
  for (int i = 0; i < nv; ++i)
    if (!(f >> m.vertices[i][0] >> m.vertices[i][1]))
      throw std::runtime_error("malformed vertex line in " + path);
  std::getline(f, line);  // consume rest of last vertex line
  m.cells.resize(nc);
  bool any_region = false;
  std::vector<std::string> regions(nc);
  for (int i = 0; i < nc; ++i) {
    if (!std::getline(f, line)) throw std::runtime_error("missing cell line in " + path);
    std::istringstream ss(line);
    if (!(ss >> m.cells[i][0] >> m.cells[i][1] >> m.cells[i][2]))
      throw std::runtime_error("malformed cell line in " + path);
    if (ss >> regions[i]) any_region = true;
    for (int k = 0; k < 3; ++k)
      if (m.cells[i][k] < 0 || m.cells[i][k] >= nv)
        throw std::runtime_error("cell vertex index out of range in " + path);
    if (m.cell_area(i) <= 0) throw std::runtime_error("non-positive cell area in " + path);
  }
  if (any_region) m.cell_region = regions;
  for (int i = 0; i < nt; ++i) {
    int a, b;
    std::string tag;
    if (!(f >> a >> b >> tag)) throw std::runtime_error("malformed tag line in " + path);
    if (a < 0 || a >= nv || b < 0 || b >= nv)
      throw std::runtime_error("tag vertex index out of range in " + path);
    m.facet_tags[edge_key(a, b)] = tag;
  }
  return m;
}

void write_mesh(const Mesh2D& mesh, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write mesh file: " + path);
  f << "mesh2d 1\n";
  f << mesh.vertices.size() << ' ' << mesh.cells.size() << ' ' << mesh.facet_tags.size() << '\n';
  for (const auto& v : mesh.vertices) f << fmt_double(v[0]) << ' ' << fmt_double(v[1]) << '\n';
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    f << mesh.cells[c][0] << ' ' << mesh.cells[c][1] << ' ' << mesh.cells[c][2];
    if (!mesh.cell_region.empty() && !mesh.cell_region[c].empty()) f << ' ' << mesh.cell_region[c];
    f << '\n';
  }
  for (const auto& [k, tag] : mesh.facet_tags) f << k.first << ' ' << k.second << ' ' << tag << '\n';
}

Mesh2D tag_boundary(const Mesh2D& mesh, const std::vector<TagRule>& rules) {
  Mesh2D m = mesh;
  m.facet_tags.clear();
  for (const auto& [k, cell] : mesh.boundary_edges()) {
    double mx = 0.5 * (mesh.vertices[k.first][0] + mesh.vertices[k.second][0]);
    double my = 0.5 * (mesh.vertices[k.first][1] + mesh.vertices[k.second][1]);
    bool done = false;
    for (const auto& r : rules) {
      if (r.predicate(mx, my)) {
        m.facet_tags[k] = r.tag;
        done = true;
        break;
      }
    }
    if (!done) {
      std::ostringstream msg;
      msg << "tag_boundary: uncovered boundary edge (" << k.first << ", " << k.second
          << ") with midpoint (" << mx << ", " << my << ")";
      throw std::runtime_error(msg.str());
    }
  }
  return m;
}

InterfaceMesh1D extract_interface(const Mesh2D& mesh, const std::string& tag,
                                  const std::set<std::string>& dirichlet_tags) {
  auto boundary = mesh.boundary_edges();
  std::vector<std::pair<EdgeKey, int>> selected;
  for (const auto& [k, cell] : boundary) {
    auto it = mesh.facet_tags.find(k);
    if (it != mesh.facet_tags.end() && it->second == tag) selected.emplace_back(k, cell);
  }
  if (selected.empty()) throw std::runtime_error("extract_interface: no edges with tag " + tag);

  // vertex adjacency over the selected edges
  std::map<int, std::vector<int>> adj;  // vertex -> selected-edge indices
  for (std::size_t e = 0; e < selected.size(); ++e) {
    adj[selected[e].first.first].push_back(static_cast<int>(e));
    adj[selected[e].first.second].push_back(static_cast<int>(e));
  }
  int start = -1;
  for (const auto& [v, es] : adj) {
    if (es.size() > 2) throw std::runtime_error("extract_interface: branching edge set");
    if (es.size() == 1) {
      if (start < 0 || std::lexicographical_compare(
                           mesh.vertices[v].begin(), mesh.vertices[v].end(),
                           mesh.vertices[start].begin(), mesh.vertices[start].end()))
        start = v;
    }
  }
  if (start < 0) throw std::runtime_error("extract_interface: edge set forms a closed loop");

  InterfaceMesh1D im;
  std::vector<bool> used(selected.size(), false);
  int cur = start;
  im.chain_vertices.push_back(cur);
  for (;;) {
    int next_edge = -1;
    for (int e : adj[cur])
      if (!used[e]) { next_edge = e; break; }
    if (next_edge < 0) break;
    used[next_edge] = true;
    const auto& [k, cell] = selected[next_edge];
    int other = (k.first == cur) ? k.second : k.first;
    im.segments.push_back({cur, other});
    im.parent_facets.push_back(k);
    im.parent_cells.push_back(cell);
    double dx = mesh.vertices[other][0] - mesh.vertices[cur][0];
    double dy = mesh.vertices[other][1] - mesh.vertices[cur][1];
    double len = std::hypot(dx, dy);
    im.lengths.push_back(len);
    // outward normal from the ccw orientation of the owning cell
    const auto& t = mesh.cells[cell];
    int a = -1, b = -1;
    for (int e = 0; e < 3; ++e) {
      int p = t[e], q = t[(e + 1) % 3];
      if (edge_key(p, q) == k) { a = p; b = q; break; }
    }
    double ex = mesh.vertices[b][0] - mesh.vertices[a][0];
    double ey = mesh.vertices[b][1] - mesh.vertices[a][1];
    double el = std::hypot(ex, ey);
    im.normals.push_back({ey / el, -ex / el});
    im.chain_vertices.push_back(other);
    cur = other;
  }
  if (im.segments.size() != selected.size())
    throw std::runtime_error("extract_interface: disconnected edge set");
  for (int v : im.chain_vertices) im.coords.push_back(mesh.vertices[v]);

  auto touches_dirichlet = [&](int v) {
    for (const auto& [k, cell] : boundary) {
      if (k.first != v && k.second != v) continue;
      auto it = mesh.facet_tags.find(k);
      if (it != mesh.facet_tags.end() && dirichlet_tags.count(it->second)) return true;
    }
    return false;
  };
  im.endpoint_flags = {touches_dirichlet(im.chain_vertices.front()),
                       touches_dirichlet(im.chain_vertices.back())};
  return im;
}

void validate(const Mesh2D& mesh, bool require_tags) {
  int nv = static_cast<int>(mesh.vertices.size());
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    for (int k = 0; k < 3; ++k)
      if (mesh.cells[c][k] < 0 || mesh.cells[c][k] >= nv)
        throw std::runtime_error("validate: cell vertex index out of range");
    if (mesh.cell_area(static_cast<int>(c)) <= 0)
      throw std::runtime_error("validate: non-positive cell area");
  }
  // duplicate detection via lexicographic sort and window scan
  std::vector<int> order(nv);
  for (int i = 0; i < nv; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return mesh.vertices[a] < mesh.vertices[b];
  });
  for (int i = 0; i + 1 < nv; ++i) {
    const auto& p = mesh.vertices[order[i]];
    const auto& q = mesh.vertices[order[i + 1]];
    if (std::hypot(p[0] - q[0], p[1] - q[1]) < 1e-12)
      throw std::runtime_error("validate: duplicate vertices");
  }
  if (require_tags) {
    for (const auto& [k, cell] : mesh.boundary_edges())
      if (!mesh.facet_tags.count(k))
        throw std::runtime_error("validate: untagged boundary edge");
  }
}

}  // namespace fracprec
