#include "doctest.h"
#include "z2lab/solids.hpp"

#include <cmath>
#include <set>

using namespace z2lab;

TEST_CASE("tetrahedron vertices are the canonical four points") {
  const Polyhedron t = branch_polyhedron(Solid::Tetrahedron);
  REQUIRE(t.vertices.size() == 4);
  CHECK((t.vertices[0] - Vec3(0, 0, 1)).norm() == doctest::Approx(0.0).epsilon(1e-15));
  const double s2 = std::sqrt(2.0), s3 = std::sqrt(3.0);
  CHECK((t.vertices[1] - Vec3(-s2 / 3, s2 / s3, -1.0 / 3)).norm() < 1e-15);
  CHECK((t.vertices[3] - Vec3(2 * s2 / 3, 0, -1.0 / 3)).norm() < 1e-15);
  for (const auto& v : t.vertices) CHECK(std::abs(v.norm() - 1.0) < 1e-12);
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      CHECK(t.vertices[i].dot(t.vertices[j]) == doctest::Approx(-1.0 / 3).epsilon(1e-12));
    }
  }
}

TEST_CASE("cube vertex dot products take the brute-force value set") {
  const Polyhedron c = branch_polyhedron(Solid::CubeVertices);
  REQUIRE(c.vertices.size() == 8);
  // Oracle: enumerate all distinct pairs of the inscribed cube.
  std::set<int> thousandths;
  for (int i = 0; i < 8; ++i) {
    for (int j = i + 1; j < 8; ++j) {
      thousandths.insert(static_cast<int>(std::lround(c.vertices[i].dot(c.vertices[j]) * 3)));
    }
  }
  CHECK(thousandths == std::set<int>{-3, -1, 1});  // dots in {-1, -1/3, +1/3}
}

TEST_CASE("polyhedron faces are outward oriented and edge-consistent") {
  for (Solid s : {Solid::Tetrahedron, Solid::CubeVertices, Solid::IcosahedronVertices,
                  Solid::IcosahedronFaceMidpoints}) {
    const Polyhedron p = branch_polyhedron(s);
    std::set<std::pair<int, int>> directed;
    for (const auto& f : p.faces) {
      Vec3 c = Vec3::Zero();
      for (int v : f) c += p.vertices[v];
      const Vec3 n = (p.vertices[f[1]] - p.vertices[f[0]]).cross(p.vertices[f[2]] - p.vertices[f[0]]);
      CHECK(n.dot(c) > 0.0);
      for (std::size_t k = 0; k < f.size(); ++k) {
        const auto e = std::make_pair(f[k], f[(k + 1) % f.size()]);
        CHECK(directed.count(e) == 0);  // each directed edge used once
        directed.insert(e);
      }
    }
    // Every directed edge has its reverse (closed surface).
    for (const auto& [a, b] : directed) CHECK(directed.count({b, a}) == 1);
  }
}

TEST_CASE("rotation groups close at the right orders") {
  CHECK(rotation_group(GroupName::Tetrahedral).size() == 12);
  CHECK(rotation_group(GroupName::Octahedral).size() == 24);
  CHECK(rotation_group(GroupName::Icosahedral).size() == 60);
  CHECK(rotation_group(GroupName::Axial, 5).size() == 5);
}

TEST_CASE("branch rotation fixes its pole and has the stated order") {
  const Polyhedron ico = branch_polyhedron(Solid::IcosahedronVertices);
  const Mat3 r = branch_rotation(ico.vertices[2], 5);
  CHECK((r * ico.vertices[2] - ico.vertices[2]).norm() < 1e-14);
  Mat3 acc = Mat3::Identity();
  for (int k = 0; k < 5; ++k) acc = r * acc;
  CHECK((acc - Mat3::Identity()).cwiseAbs().maxCoeff() < 1e-13);
}
