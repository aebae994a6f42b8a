#include "doctest.h"

#include <cmath>
#include <sstream>

#include "curvlab/errors.hpp"
#include "curvlab/mesh.hpp"

using namespace curvlab;

TEST_CASE("genus-2 generator has the advertised counts") {
  for (int n : {3, 4, 6}) {
    TriangleMesh m = regular_octagon_genus2(n);
    CHECK(m.n_vertices() == 4 * n * n - 2);
    CHECK(m.n_faces() == 8 * n * n);
    CHECK(m.euler_characteristic() == -2);
    CHECK(m.genus() == 2);
    CHECK(2 * m.n_edges() == 3 * m.n_faces());
  }
}

TEST_CASE("flat torus generator has the advertised counts") {
  for (int n : {3, 5, 8}) {
    TriangleMesh m = flat_torus(n);
    CHECK(m.n_vertices() == n * n);
    CHECK(m.n_faces() == 2 * n * n);
    CHECK(m.euler_characteristic() == 0);
    CHECK(m.genus() == 1);
    CHECK(m.has_positions());
  }
}

TEST_CASE("generator strings parse and reject malformed input") {
  TriangleMesh m = make_generated_mesh("regular-octagon-genus2(3)");
  CHECK(m.genus() == 2);
  TriangleMesh t = make_generated_mesh("flat-torus(4)");
  CHECK(t.genus() == 1);
  CHECK_THROWS_AS((void)make_generated_mesh("regular-octagon-genus2(0)"), PreconditionError);
  CHECK_THROWS_AS((void)make_generated_mesh("moebius(3)"), PreconditionError);
  CHECK_THROWS_AS((void)make_generated_mesh("flat-torus(x)"), PreconditionError);
}

namespace {

TriangleMesh tetrahedron(double edge = 1.0) {
  std::vector<std::array<int, 3>> faces = {
      {0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
  std::vector<std::array<double, 3>> lengths;
  std::vector<std::tuple<int, int, double>> edges;
  for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})
    edges.emplace_back(a, b, edge);
  return TriangleMesh(4, faces, edges);
}

}  // namespace

TEST_CASE("mesh validation rejects broken input") {
  CHECK(tetrahedron().genus() == 0);

  // Triangle inequality violation on one edge.
  std::vector<std::array<int, 3>> faces = {
      {0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}};
  std::vector<std::tuple<int, int, double>> edges;
  for (auto [a, b] : {std::pair{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})
    edges.emplace_back(a, b, 1.0);
  std::get<2>(edges[0]) = 5.0;
  CHECK_THROWS_AS((void)TriangleMesh(4, faces, edges), PreconditionError);

  // Boundary edge (open surface).
  std::vector<std::array<int, 3>> open_faces = {{0, 1, 2}};
  std::vector<std::tuple<int, int, double>> open_edges = {
      {0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  CHECK_THROWS_AS((void)TriangleMesh(3, open_faces, open_edges), PreconditionError);

  // Nonpositive length.
  auto bad_edges = edges;
  std::get<2>(bad_edges[0]) = -1.0;
  CHECK_THROWS_AS((void)TriangleMesh(4, faces, bad_edges), PreconditionError);
}

TEST_CASE("angles and areas agree with the law of cosines") {
  TriangleMesh tet = tetrahedron(2.0);
  // Equilateral: every corner angle is pi/3, every face area sqrt(3).
  for (int f = 0; f < tet.n_faces(); ++f) {
    CHECK(tet.face_area(f) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-14));
    for (int c = 0; c < 3; ++c)
      CHECK(tet.corner_angle(f, c) ==
            doctest::Approx(std::acos(0.5)).epsilon(1e-14));
  }
}

TEST_CASE("intrinsic format round-trips edge lengths exactly") {
  TriangleMesh m = regular_octagon_genus2(3);
  std::ostringstream out;
  write_mesh(out, m, MeshFormat::kIntrinsic);
  std::istringstream in(out.str());
  TriangleMesh back = read_mesh(in, MeshFormat::kIntrinsic);
  REQUIRE(back.n_vertices() == m.n_vertices());
  REQUIRE(back.n_edges() == m.n_edges());
  REQUIRE(back.n_faces() == m.n_faces());
  for (int e = 0; e < m.n_edges(); ++e) {
    const auto& ea = m.edges()[e];
    CHECK(back.edge_length(back.edge_between(ea.a, ea.b)) == ea.length);
  }
}

TEST_CASE("vertex-position format round-trips positions exactly") {
  // A mesh whose intrinsic lengths equal Euclidean distances (no periodic
  // identifications), so the position format preserves the metric.
  TriangleMesh m = TriangleMesh::from_positions(
      {{0.125, 0.25, 0.0625},
       {1.0, 0.0, 0.0},
       {0.0, 1.0, 0.0},
       {0.3, 0.4, 1.0}},
      {{0, 2, 1}, {0, 1, 3}, {1, 2, 3}, {2, 0, 3}});
  std::ostringstream out;
  write_mesh(out, m, MeshFormat::kOff);
  std::istringstream in(out.str());
  TriangleMesh back = read_mesh(in, MeshFormat::kOff);
  REQUIRE(back.n_vertices() == m.n_vertices());
  REQUIRE(back.has_positions());
  for (int v = 0; v < m.n_vertices(); ++v)
    for (int k = 0; k < 3; ++k)
      CHECK(back.positions()[v][k] == m.positions()[v][k]);
  for (int e = 0; e < m.n_edges(); ++e) {
    const auto& ea = m.edges()[e];
    CHECK(back.edge_length(back.edge_between(ea.a, ea.b)) ==
          doctest::Approx(ea.length).epsilon(1e-15));
  }
}

TEST_CASE("mesh I/O reports missing files and garbage as I/O errors") {
  CHECK_THROWS_AS((void)read_mesh_file("definitely_not_here.mesh"), IoError);
  std::istringstream garbage("this is not a mesh");
  CHECK_THROWS_AS((void)read_mesh(garbage, MeshFormat::kOff), IoError);
  std::istringstream truncated("INTRINSIC\n10 3 2\n0 1 2\n");
  CHECK_THROWS_AS((void)read_mesh(truncated, MeshFormat::kIntrinsic), IoError);
}

TEST_CASE("adjacency queries are mutually consistent") {
  TriangleMesh m = regular_octagon_genus2(3);
  for (int v = 0; v < m.n_vertices(); ++v) {
    for (int w : m.vertex_neighbors(v)) {
      int e = m.edge_between(v, w);
      REQUIRE(e >= 0);
      const auto& ed = m.edges()[e];
      CHECK(((ed.a == v && ed.b == w) || (ed.a == w && ed.b == v)));
    }
    for (int f : m.vertex_faces(v)) {
      const auto& tri = m.faces()[f];
      CHECK((tri[0] == v || tri[1] == v || tri[2] == v));
    }
  }
  for (int f = 0; f < m.n_faces(); ++f) {
    auto fe = m.face_edges(f);
    for (int k = 0; k < 3; ++k) {
      const auto& ed = m.edges()[fe[k]];
      CHECK((ed.face[0] == f || ed.face[1] == f));
    }
  }
}
