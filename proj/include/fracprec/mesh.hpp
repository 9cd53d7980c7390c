#pragma once

#include <array>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace fracprec {

using Point2 = std::array<double, 2>;

struct Rect {
  double x0, y0, x1, y1;
};

/// Boundary edge key, stored with sorted vertex indices.
using EdgeKey = std::pair<int, int>;
inline EdgeKey edge_key(int a, int b) { return a < b ? EdgeKey{a, b} : EdgeKey{b, a}; }

struct Mesh2D {
  std::vector<Point2> vertices;
  std::vector<std::array<int, 3>> cells;  // counterclockwise
  std::map<EdgeKey, std::string> facet_tags;
  std::vector<std::string> cell_region;  // empty, or one label per cell

  double cell_area(int c) const;
  double total_area() const;
  /// Boundary edges (incident to exactly one cell) with their owning cell.
  std::map<EdgeKey, int> boundary_edges() const;
};

struct InterfaceMesh1D {
  std::vector<std::array<int, 2>> segments;  // parent vertex ids, ordered along the chain
  std::vector<double> lengths;
  std::vector<Point2> normals;            // unit, outward from the parent domain
  std::vector<EdgeKey> parent_facets;     // owning boundary edge per segment
  std::vector<int> parent_cells;          // owning 2D cell per segment
  std::array<bool, 2> endpoint_flags{false, false};
  std::vector<int> chain_vertices;        // parent vertex ids, size nseg+1
  std::vector<Point2> coords;             // coordinates of chain vertices

  int n_segments() const { return static_cast<int>(segments.size()); }
  double total_length() const;
};

Mesh2D generate_crossed(int nx, int ny, const Rect& bounds);

Mesh2D refine_uniform(const Mesh2D& mesh);

Mesh2D read_mesh(const std::string& path);
void write_mesh(const Mesh2D& mesh, const std::string& path);

struct TagRule {
  std::string tag;
  std::function<bool(double, double)> predicate;  // evaluated at the edge midpoint
};

/// Tag every boundary edge by the first matching rule; throws if an edge is
/// not covered.
Mesh2D tag_boundary(const Mesh2D& mesh, const std::vector<TagRule>& rules);

InterfaceMesh1D extract_interface(const Mesh2D& mesh, const std::string& tag,
                                  const std::set<std::string>& dirichlet_tags = {});

/// Structural checks: positive cell areas, in-range indices, no duplicate
/// vertices; with require_tags also every boundary edge tagged.
void validate(const Mesh2D& mesh, bool require_tags = false);

}  // namespace fracprec
