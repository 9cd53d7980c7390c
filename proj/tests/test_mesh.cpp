#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "fracprec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

using namespace fracprec;

namespace {

std::string data_dir() {
  const char* env = std::getenv("FRACPREC_DATA_DIR");
  return env ? env : "data";
}

double cell_diameter(const Mesh2D& m, int c) {
  double d = 0;
  for (int e = 0; e < 3; ++e) {
    Point2 a = m.vertices[m.cells[c][e]];
    Point2 b = m.vertices[m.cells[c][(e + 1) % 3]];
    d = std::max(d, std::hypot(a[0] - b[0], a[1] - b[1]));
  }
  return d;
}

}  // namespace

TEST_CASE("crossed generator: unit square counts and equal areas") {
  Mesh2D m = generate_crossed(1, 1, {0, 0, 1, 1});
  CHECK(m.vertices.size() == 5);
  CHECK(m.cells.size() == 4);
  for (int c = 0; c < 4; ++c) CHECK(m.cell_area(c) == doctest::Approx(0.25));
  validate(m);

  Mesh2D big = generate_crossed(4, 4, {0, 0, 1, 1});
  CHECK(big.cells.size() == 4 * 16);
  CHECK(big.vertices.size() == 5 * 5 + 16);
  double lo = 1e30, hi = 0;
  for (std::size_t c = 0; c < big.cells.size(); ++c) {
    lo = std::min(lo, big.cell_area(static_cast<int>(c)));
    hi = std::max(hi, big.cell_area(static_cast<int>(c)));
  }
  CHECK(hi / lo == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("crossed generator: rectangle counts and total area") {
  Mesh2D m = generate_crossed(2, 1, {0, 0, 2, 1});
  CHECK(m.vertices.size() == 8);
  CHECK(m.cells.size() == 8);
  CHECK(m.total_area() == doctest::Approx(2.0));
  CHECK_THROWS(generate_crossed(0, 1, {0, 0, 1, 1}));
}

TEST_CASE("every crossed cell is isosceles") {
  Mesh2D m = generate_crossed(3, 2, {0, 0, 1, 1});
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    std::vector<double> sides;
    for (int e = 0; e < 3; ++e) {
      Point2 a = m.vertices[m.cells[c][e]];
      Point2 b = m.vertices[m.cells[c][(e + 1) % 3]];
      sides.push_back(std::hypot(a[0] - b[0], a[1] - b[1]));
    }
    std::sort(sides.begin(), sides.end());
    bool isosceles = std::abs(sides[0] - sides[1]) < 1e-12 || std::abs(sides[1] - sides[2]) < 1e-12;
    CHECK(isosceles);
  }
}

TEST_CASE("uniform refinement: counts, area, composition") {
  Mesh2D m = generate_crossed(1, 1, {0, 0, 1, 1});
  Mesh2D r = refine_uniform(m);
  CHECK(r.cells.size() == 16);
  CHECK(r.total_area() == doctest::Approx(m.total_area()).epsilon(1e-12));
  Mesh2D rr = refine_uniform(r);
  CHECK(rr.cells.size() == m.cells.size() * 16);
  CHECK(rr.total_area() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("refinement of a crossed mesh matches the finer crossed mesh on cell count") {
  Mesh2D coarse = refine_uniform(generate_crossed(2, 2, {0, 0, 1, 1}));
  Mesh2D fine = generate_crossed(4, 4, {0, 0, 1, 1});
  CHECK(coarse.cells.size() == fine.cells.size());
  CHECK(coarse.total_area() == doctest::Approx(fine.total_area()));
}

TEST_CASE("refinement inherits boundary tags") {
  Mesh2D m = tag_boundary(generate_crossed(1, 1, {0, 0, 1, 1}),
                          {{"gamma", [](double x, double) { return x < 1e-12; }},
                           {"rest", [](double, double) { return true; }}});
  Mesh2D r = refine_uniform(m);
  int gamma = 0, rest = 0;
  for (const auto& [k, tag] : r.facet_tags) {
    if (tag == "gamma") ++gamma;
    if (tag == "rest") ++rest;
  }
  CHECK(gamma == 2);
  CHECK(rest == 6);
}

TEST_CASE("mesh file round trip") {
  Mesh2D m = generate_crossed(2, 2, {0, 0, 1, 1});
  std::string path = "roundtrip.msh";
  write_mesh(m, path);
  Mesh2D back = read_mesh(path);
  REQUIRE(back.vertices.size() == m.vertices.size());
  REQUIRE(back.cells.size() == m.cells.size());
  for (std::size_t v = 0; v < m.vertices.size(); ++v) {
    CHECK(back.vertices[v][0] == doctest::Approx(m.vertices[v][0]).epsilon(1e-15));
    CHECK(back.vertices[v][1] == doctest::Approx(m.vertices[v][1]).epsilon(1e-15));
  }
  CHECK(back.cells == m.cells);
  std::remove(path.c_str());
}

TEST_CASE("malformed mesh files are rejected") {
  {
    std::ofstream f("bad_header.msh");
    f << "mesh3d 1\n0 0 0\n";
  }
  CHECK_THROWS(read_mesh("bad_header.msh"));
  {
    std::ofstream f("bad_index.msh");
    f << "mesh2d 1\n5 1 0\n0 0\n1 0\n0 1\n1 1\n0.5 0.5\n0 1 99\n";
  }
  CHECK_THROWS(read_mesh("bad_index.msh"));
  CHECK_THROWS(read_mesh("no_such_file.msh"));
  std::remove("bad_header.msh");
  std::remove("bad_index.msh");
}

TEST_CASE("boundary tagging: first match wins and coverage is enforced") {
  Mesh2D m = generate_crossed(2, 2, {0, 0, 1, 1});
  Mesh2D tagged = tag_boundary(m, {{"gamma", [](double x, double) { return x < 1e-12; }},
                                   {"dirichlet", [](double, double) { return true; }}});
  int gamma = 0;
  for (const auto& [k, tag] : tagged.facet_tags)
    if (tag == "gamma") {
      ++gamma;
      CHECK(tagged.vertices[k.first][0] == doctest::Approx(0.0));
      CHECK(tagged.vertices[k.second][0] == doctest::Approx(0.0));
    }
  CHECK(gamma == 2);
  CHECK(tagged.facet_tags.size() == 8);
  CHECK_THROWS(tag_boundary(m, {{"left", [](double x, double) { return x < 1e-12; }}}));
}

TEST_CASE("interface extraction: chain, lengths, normals, endpoint flags") {
  Mesh2D m = tag_boundary(generate_crossed(2, 2, {0, 0, 1, 1}),
                          {{"gamma", [](double x, double) { return x < 1e-12; }},
                           {"dirichlet", [](double x, double) { return x > 1.0 - 1e-12; }},
                           {"neumann", [](double, double) { return true; }}});
  InterfaceMesh1D iface = extract_interface(m, "gamma", {"dirichlet"});
  CHECK(iface.n_segments() == 2);
  CHECK(iface.total_length() == doctest::Approx(1.0).epsilon(1e-12));
  for (int s = 0; s < iface.n_segments(); ++s) {
    CHECK(iface.lengths[s] == doctest::Approx(0.5));
    double norm = std::hypot(iface.normals[s][0], iface.normals[s][1]);
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
  }
  // Gamma meets only the Neumann edges here.
  CHECK(!iface.endpoint_flags[0]);
  CHECK(!iface.endpoint_flags[1]);
  CHECK(iface.chain_vertices.size() == 3);

  // With the whole complement Dirichlet, both endpoints are flagged.
  Mesh2D md = tag_boundary(generate_crossed(2, 2, {0, 0, 1, 1}),
                           {{"gamma", [](double x, double) { return x < 1e-12; }},
                            {"dirichlet", [](double, double) { return true; }}});
  InterfaceMesh1D ifd = extract_interface(md, "gamma", {"dirichlet"});
  CHECK(ifd.endpoint_flags[0]);
  CHECK(ifd.endpoint_flags[1]);
}

TEST_CASE("unstructured fixtures load, validate and cover the unit square") {
  for (std::string family : {"uu", "nu"}) {
    for (int level = 1; level <= 5; ++level) {
      Mesh2D m = read_mesh(data_dir() + "/" + family + "_l" + std::to_string(level) + ".msh");
      validate(m);
      CHECK(m.total_area() == doctest::Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("graded fixture is about 3x finer near the interface") {
  Mesh2D m = read_mesh(data_dir() + "/nu_l1.msh");
  double near = 0, far = 0;
  int n_near = 0, n_far = 0;
  for (std::size_t c = 0; c < m.cells.size(); ++c) {
    double cx = (m.vertices[m.cells[c][0]][0] + m.vertices[m.cells[c][1]][0] +
                 m.vertices[m.cells[c][2]][0]) /
                3.0;
    double d = cell_diameter(m, static_cast<int>(c));
    if (cx < 0.2) {
      near += d;
      ++n_near;
    } else if (cx > 0.4) {
      far += d;
      ++n_far;
    }
  }
  REQUIRE(n_near > 0);
  REQUIRE(n_far > 0);
  double ratio = (far / n_far) / (near / n_near);
  CHECK(ratio > 2.0);
  CHECK(ratio < 4.5);
}

TEST_CASE("fixture refinement levels quadruple the cell count") {
  for (std::string family : {"uu", "nu"}) {
    Mesh2D l1 = read_mesh(data_dir() + "/" + family + "_l1.msh");
    Mesh2D l2 = read_mesh(data_dir() + "/" + family + "_l2.msh");
    CHECK(l2.cells.size() == 4 * l1.cells.size());
  }
}
