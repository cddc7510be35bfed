#include "doctest.h"
#include "z2lab/cover.hpp"
#include "z2lab/mesh.hpp"

#include <cmath>
#include <set>

using namespace z2lab;

TEST_CASE("element counts follow the 4-to-1 subdivision") {
  const auto spec = build_cover_spec(Solid::Tetrahedron);
  const SphereMesh l0 = build_mesh(spec, 0);
  CHECK(l0.vertex_count() == 4);
  CHECK(l0.triangle_count() == 4);
  const SphereMesh l3 = build_mesh(spec, 3);
  CHECK(l3.triangle_count() == 256);
  CHECK(l3.vertex_count() == 130);  // V = 2 + F/2

  const auto ico = build_cover_spec(Solid::IcosahedronVertices);
  const SphereMesh i0 = build_mesh(ico, 0);
  CHECK(i0.vertex_count() == 12);
  CHECK(i0.triangle_count() == 20);
}

TEST_CASE("level out of range is rejected") {
  const auto spec = build_cover_spec(Solid::Tetrahedron);
  CHECK_THROWS_AS(build_mesh(spec, -1), std::invalid_argument);
  CHECK_THROWS_AS(build_mesh(spec, 9), std::invalid_argument);
}

TEST_CASE("euler characteristic, unit vertices and consistent orientation") {
  for (Solid s : {Solid::Tetrahedron, Solid::CubeVertices, Solid::IcosahedronVertices,
                  Solid::IcosahedronFaceMidpoints, Solid::TwoPoints}) {
    const auto spec = build_cover_spec(s);
    const SphereMesh mesh = build_mesh(spec, 2);
    const MeshTables tables = geometric_tables(mesh);
    CHECK(mesh.vertex_count() - tables.edge_count() + mesh.triangle_count() == 2);
    for (const Vec3& v : mesh.vertices) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
    // Orientation: every directed edge appears exactly once.
    std::set<std::pair<int, int>> directed;
    for (const auto& t : mesh.triangles) {
      for (int k = 0; k < 3; ++k) {
        const auto e = std::make_pair(t[k], t[(k + 1) % 3]);
        CHECK(directed.count(e) == 0);
        directed.insert(e);
      }
    }
    for (const auto& [a, b] : directed) CHECK(directed.count({b, a}) == 1);
    // Branch points are mesh vertices.
    for (std::size_t b = 0; b < spec.branch_points.size(); ++b) {
      const int v = mesh.branch_vertices[b];
      CHECK((mesh.vertices[v] - spec.branch_points[b]).norm() < 1e-9);
    }
  }
}

TEST_CASE("level-0 tetrahedron chord area is 8 sqrt(3) / 3") {
  const auto spec = build_cover_spec(Solid::Tetrahedron);
  const MeshTables tables = geometric_tables(build_mesh(spec, 0));
  CHECK(tables.total_area() == doctest::Approx(8.0 * std::sqrt(3.0) / 3.0).epsilon(1e-12));
  double lumped = 0.0;
  for (double a : tables.vertex_area) lumped += a;
  CHECK(lumped == doctest::Approx(tables.total_area()).epsilon(1e-13));
}

TEST_CASE("icosahedral mesh area converges to 4 pi") {
  const auto spec = build_cover_spec(Solid::IcosahedronVertices);
  const MeshTables tables = geometric_tables(build_mesh(spec, 6));
  CHECK(std::abs(tables.total_area() - 4.0 * M_PI) / (4.0 * M_PI) < 1e-3);
}

TEST_CASE("group rotations map the vertex set to itself") {
  for (Solid s : {Solid::Tetrahedron, Solid::CubeVertices, Solid::IcosahedronVertices}) {
    const auto spec = build_cover_spec(s);
    const SphereMesh mesh = build_mesh(spec, 2);
    const VertexLocator locator(mesh.vertices);
    double worst = 0.0;
    for (const Mat3& g : mesh.group_rotations) {
      for (const Vec3& v : mesh.vertices) {
        const int w = locator.find(g * v, 1e-9);
        REQUIRE(w >= 0);
        worst = std::max(worst, (mesh.vertices[w] - g * v).norm());
      }
    }
    CHECK(worst < 1e-12);  // snapped
  }
}

TEST_CASE("refinement nesting: coarser vertices are a prefix") {
  const auto spec = build_cover_spec(Solid::IcosahedronVertices);
  const SphereMesh l2 = build_mesh(spec, 2);
  const SphereMesh l3 = build_mesh(spec, 3);
  for (int v = 0; v < l2.vertex_count(); ++v) {
    CHECK((l2.vertices[v] - l3.vertices[v]).norm() < 1e-9);
  }
}

TEST_CASE("minimum triangle angle stays above 20 degrees") {
  for (Solid s : {Solid::Tetrahedron, Solid::CubeVertices, Solid::IcosahedronVertices,
                  Solid::IcosahedronFaceMidpoints}) {
    const auto spec = build_cover_spec(s);
    for (int level : {0, 2, 4}) {
      const MeshTables tables = geometric_tables(build_mesh(spec, level));
      CHECK(tables.min_triangle_angle > 20.0 * M_PI / 180.0);
    }
  }
}

TEST_CASE("mesh ascii export round-trips counts") {
  const auto spec = build_cover_spec(Solid::TwoPoints);
  const SphereMesh mesh = build_mesh(spec, 1);
  const std::string text = mesh_to_ascii(mesh);
  int vlines = 0, flines = 0;
  for (std::size_t i = 0; i + 1 < text.size(); ++i) {
    if (text[i] == '\n') {
      if (text[i + 1] == 'v') ++vlines;
      if (text[i + 1] == 'f') ++flines;
    }
  }
  if (text.rfind("v ", 0) == 0) ++vlines;
  CHECK(vlines == mesh.vertex_count());
  CHECK(flines == mesh.triangle_count());
}
