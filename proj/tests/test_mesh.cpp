#include <doctest.h>

#include <cmath>

#include "hdg/error.hpp"
#include "hdg/mesh.hpp"

using hdg::Point;

TEST_SUITE("mesh") {

TEST_CASE("right-split counts follow from the cell pattern") {
  for (int n : {1, 2, 3, 8}) {
    const hdg::Mesh m = hdg::build_structured_mesh(n, hdg::MeshPattern::right_split);
    CHECK(m.num_vertices() == (n + 1) * (n + 1));
    CHECK(m.num_triangles() == 2 * n * n);
    CHECK(m.num_edges() == 3 * n * n + 2 * n);
    int boundary = 0;
    for (const auto& e : m.edges()) boundary += e.boundary();
    CHECK(boundary == 4 * n);
    CHECK_NOTHROW(m.validate());
  }
}

TEST_CASE("criss-cross counts") {
  for (int n : {1, 2, 5}) {
    const hdg::Mesh m = hdg::build_structured_mesh(n, hdg::MeshPattern::criss_cross);
    CHECK(m.num_vertices() == (n + 1) * (n + 1) + n * n);
    CHECK(m.num_triangles() == 4 * n * n);
    CHECK(m.num_edges() == 2 * n * (n + 1) + 4 * n * n);
    CHECK_NOTHROW(m.validate());
  }
}

TEST_CASE("edge normals and incidence signs") {
  const hdg::Mesh m = hdg::build_structured_mesh(4, hdg::MeshPattern::right_split);
  for (int t = 0; t < m.num_triangles(); ++t) {
    const auto& tri = m.triangles()[t];
    Point c = (m.vertices()[tri[0]] + m.vertices()[tri[1]] + m.vertices()[tri[2]]) / 3.0;
    for (int i = 0; i < 3; ++i) {
      const hdg::Edge& e = m.edges()[m.triangle_edges(t)[i]];
      // local edge i is opposite vertex i
      CHECK(e.v[0] != tri[i]);
      CHECK(e.v[1] != tri[i]);
      CHECK(e.v[0] < e.v[1]);
      const Point mid = 0.5 * (m.vertices()[e.v[0]] + m.vertices()[e.v[1]]);
      CHECK(m.outward_normal(t, i).dot(mid - c) > 0.0);
      CHECK(std::abs(e.normal.norm() - 1.0) < 1e-14);
      CHECK(std::abs(e.normal.dot(m.vertices()[e.v[1]] - m.vertices()[e.v[0]])) < 1e-14);
      const int expected = (e.left == t) ? 1 : -1;
      CHECK(m.triangle_edge_signs(t)[i] == expected);
    }
  }
  // boundary normals point out of the unit square
  for (const auto& e : m.edges()) {
    if (!e.boundary()) continue;
    const Point mid = 0.5 * (m.vertices()[e.v[0]] + m.vertices()[e.v[1]]);
    CHECK(e.normal.dot(mid - Point(0.5, 0.5)) > 0.0);
  }
}

TEST_CASE("total area and edge length sums") {
  const hdg::Mesh m = hdg::build_structured_mesh(6, hdg::MeshPattern::criss_cross);
  double area = 0.0, boundary = 0.0;
  for (int t = 0; t < m.num_triangles(); ++t) area += m.area(t);
  for (const auto& e : m.edges()) {
    if (e.boundary()) boundary += e.length;
  }
  CHECK(area == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(boundary == doctest::Approx(4.0).epsilon(1e-14));
}

TEST_CASE("mesh statistics") {
  const hdg::MeshStats s = hdg::mesh_stats(hdg::build_structured_mesh(4, hdg::MeshPattern::right_split));
  CHECK(s.h == doctest::Approx(std::sqrt(2.0) / 4).epsilon(1e-14));
  // right isoceles triangle with legs 1: diameter sqrt2, inradius (2 - sqrt2)/2
  CHECK(s.shape_ratio == doctest::Approx(std::sqrt(2.0) / ((2 - std::sqrt(2.0)) / 2)).epsilon(1e-12));
}

TEST_CASE("clockwise input triangles are reoriented") {
  const hdg::Mesh m({Point(0, 0), Point(1, 0), Point(0, 1)}, {{0, 2, 1}});
  CHECK(m.area(0) > 0.0);
  CHECK_NOTHROW(m.validate());
}

TEST_CASE("invalid topology is rejected") {
  SUBCASE("degenerate") {
    CHECK_THROWS_AS(hdg::Mesh({Point(0, 0), Point(1, 0), Point(2, 0)}, {{0, 1, 2}}), hdg::Error);
  }
  SUBCASE("non-manifold edge") {
    try {
      hdg::Mesh m({Point(0, 0), Point(1, 0), Point(0, 1), Point(1, 1), Point(0.5, -1)}, {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}});
      FAIL("expected an error");
    } catch (const hdg::Error& e) {
      CHECK(e.kind() == hdg::ErrorKind::topology);
    }
  }
  SUBCASE("missing vertex") {
    CHECK_THROWS_AS(hdg::Mesh({Point(0, 0), Point(1, 0)}, {{0, 1, 2}}), hdg::Error);
  }
}

TEST_CASE("Triangle format import") {
  const char* node0 =
      "# unit square\n"
      "4 2 0 0\n"
      "0 0.0 0.0\n"
      "1 1.0 0.0\n"
      "2 1.0 1.0\n"
      "3 0.0 1.0\n";
  const char* ele0 =
      "2 3 0\n"
      "0 0 1 2\n"
      "1 0 2 3\n";
  const hdg::Mesh m = hdg::import_mesh(node0, ele0);
  CHECK(m.num_triangles() == 2);
  CHECK(m.num_edges() == 5);

  const char* node1 =
      "4 2 0 1\n"
      "1 0.0 0.0 1\n"
      "2 1.0 0.0 1\n"
      "3 1.0 1.0 1\n"
      "4 0.0 1.0 1\n";
  const char* ele1 =
      "2 3 0\n"
      "1 1 3 2\n"  // clockwise
      "2 1 3 4\n";
  const hdg::Mesh m1 = hdg::import_mesh(node1, ele1);
  CHECK(m1.num_triangles() == 2);
  CHECK(m1.area(0) == doctest::Approx(0.5));

  try {
    hdg::import_mesh("4 2 0 0\n0 0 0\n1 1 zero\n", ele0);
    FAIL("expected a parse error");
  } catch (const hdg::Error& e) {
    CHECK(e.kind() == hdg::ErrorKind::parse);
  }
}

}
