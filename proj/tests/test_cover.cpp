#include "doctest.h"
#include "z2lab/cover.hpp"
#include "z2lab/mesh.hpp"

#include <cmath>
#include <map>
#include <set>

using namespace z2lab;

namespace {

struct Setup {
  BranchedCoverSpec spec;
  SphereMesh mesh;
  MeshTables tables;
  SignCocycle cocycle;
  Setup(Solid s, int level, double angle = M_PI)
      : spec(build_cover_spec(s, angle)),
        mesh(build_mesh(spec, level)),
        tables(geometric_tables(mesh)),
        cocycle(build_sign_cocycle(spec, mesh, tables)) {}
};

bool equal_on_free(const LiftedSymmetry& a, const LiftedSymmetry& b,
                   const std::vector<int>& branch) {
  std::set<int> bset(branch.begin(), branch.end());
  for (std::size_t v = 0; v < a.permutation.size(); ++v) {
    if (a.permutation[v] != b.permutation[v]) return false;
    if (!bset.count(static_cast<int>(v)) && a.vertex_sign[v] != b.vertex_sign[v]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("cover spec invariants") {
  for (Solid s : {Solid::Tetrahedron, Solid::CubeVertices, Solid::IcosahedronVertices,
                  Solid::IcosahedronFaceMidpoints, Solid::TwoPoints}) {
    const auto spec = build_cover_spec(s);
    CHECK(spec.branch_points.size() % 2 == 0);
    for (const Vec3& p : spec.branch_points) CHECK(std::abs(p.norm() - 1.0) < 1e-12);
    // Every branch point is the endpoint of exactly one cut.
    const SphereMesh base = build_mesh(spec, 0);
    std::map<int, int> endpoint_uses;
    std::set<std::pair<int, int>> used_edges;
    for (const auto& cut : spec.cuts) {
      CHECK(cut.size() >= 2);
      CHECK(cut.front() != cut.back());
      ++endpoint_uses[cut.front()];
      ++endpoint_uses[cut.back()];
      for (std::size_t k = 0; k + 1 < cut.size(); ++k) {
        const auto e = std::minmax(cut[k], cut[k + 1]);
        CHECK(used_edges.count(e) == 0);  // pairwise edge-disjoint
        used_edges.insert(e);
      }
    }
    for (int b : base.branch_vertices) CHECK(endpoint_uses[b] == 1);
  }
  CHECK(build_cover_spec(Solid::TwoPoints, M_PI).branch_points[1].z() == -1.0);
  CHECK_THROWS_AS(build_cover_spec(Solid::TwoPoints, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(build_cover_spec(Solid::TwoPoints, 4.0), std::invalid_argument);
}

TEST_CASE("cocycle holonomy is -1 at branch links, +1 at faces and far links") {
  for (Solid s : {Solid::Tetrahedron, Solid::CubeVertices, Solid::IcosahedronVertices,
                  Solid::IcosahedronFaceMidpoints, Solid::TwoPoints}) {
    for (int level : {0, 1, 2}) {
      const Setup su(s, level);
      std::set<int> branch(su.mesh.branch_vertices.begin(), su.mesh.branch_vertices.end());
      std::set<int> near;
      for (int p : su.mesh.branch_vertices) {
        for (int k = su.tables.adj_offset[p]; k < su.tables.adj_offset[p + 1]; ++k) {
          near.insert(su.tables.adj_vertex[k]);
        }
      }
      for (int v = 0; v < su.mesh.vertex_count(); ++v) {
        const int h = link_holonomy(su.cocycle, su.mesh, su.tables, v);
        if (branch.count(v)) {
          CHECK(h == -1);
        } else if (!near.count(v)) {
          CHECK(h == 1);
        }
      }
      // Symmetric cocycle: sign(u,v) == sign(v,u) by construction (one
      // value per unordered edge); face products away from branch corners:
      for (const auto& tri : su.mesh.triangles) {
        if (branch.count(tri[0]) || branch.count(tri[1]) || branch.count(tri[2])) continue;
        CHECK(su.cocycle.sign(su.tables, tri[0], tri[1]) *
                  su.cocycle.sign(su.tables, tri[1], tri[2]) *
                  su.cocycle.sign(su.tables, tri[2], tri[0]) ==
              1);
      }
    }
  }
}

TEST_CASE("odd-degree branch configurations have no residual link defects") {
  for (Solid s : {Solid::Tetrahedron, Solid::IcosahedronVertices, Solid::TwoPoints}) {
    for (int level : {1, 2, 3}) {
      const Setup su(s, level);
      CHECK(link_defects(su.cocycle, su.mesh, su.tables).empty());
    }
  }
}

TEST_CASE("residual defects sit only next to even-degree branch points") {
  for (Solid s : {Solid::CubeVertices, Solid::IcosahedronFaceMidpoints}) {
    const Setup su(s, 2);
    std::set<int> near;
    for (int p : su.mesh.branch_vertices) {
      for (int k = su.tables.adj_offset[p]; k < su.tables.adj_offset[p + 1]; ++k) {
        near.insert(su.tables.adj_vertex[k]);
      }
    }
    for (int v : link_defects(su.cocycle, su.mesh, su.tables)) CHECK(near.count(v) == 1);
  }
}

TEST_CASE("two-points: holonomy -1 at both poles, +1 around equatorial faces") {
  const Setup su(Solid::TwoPoints, 1);
  CHECK(link_holonomy(su.cocycle, su.mesh, su.tables, su.mesh.branch_vertices[0]) == -1);
  CHECK(link_holonomy(su.cocycle, su.mesh, su.tables, su.mesh.branch_vertices[1]) == -1);
  for (const auto& tri : su.mesh.triangles) {
    bool equatorial = true;
    for (int c : tri) equatorial = equatorial && std::abs(su.mesh.vertices[c].z()) < 0.5;
    if (equatorial) {
      CHECK(su.cocycle.sign(su.tables, tri[0], tri[1]) *
                su.cocycle.sign(su.tables, tri[1], tri[2]) *
                su.cocycle.sign(su.tables, tri[2], tri[0]) ==
            1);
    }
  }
}

TEST_CASE("cube-vertices: product of all link holonomies is +1") {
  const Setup su(Solid::CubeVertices, 1);
  int prod = 1;
  for (int b : su.mesh.branch_vertices) prod *= link_holonomy(su.cocycle, su.mesh, su.tables, b);
  CHECK(prod == 1);  // even branch count
}

TEST_CASE("rerouted cuts give a gauge-equivalent cocycle") {
  for (Solid s : {Solid::Tetrahedron, Solid::TwoPoints}) {
    const Setup su(s, 3);
    const SignCocycle alt = build_sign_cocycle(su.spec, su.mesh, su.tables, true);
    bool differs = false;
    for (int e = 0; e < su.tables.edge_count(); ++e) {
      differs = differs || (alt.edge_sign[e] != su.cocycle.edge_sign[e]);
    }
    CHECK(differs);
    const auto eta = gauge_between(su.cocycle, alt, su.mesh, su.tables);
    REQUIRE(!eta.empty());
    // eta realizes the coboundary on every edge between free vertices.
    std::set<int> branch(su.mesh.branch_vertices.begin(), su.mesh.branch_vertices.end());
    for (int e = 0; e < su.tables.edge_count(); ++e) {
      const auto [u, v] = su.tables.edges[e];
      if (branch.count(u) || branch.count(v)) continue;
      CHECK(int(eta[u]) * int(eta[v]) * alt.edge_sign[e] == su.cocycle.edge_sign[e]);
    }
  }
}

TEST_CASE("lifted generators satisfy the group relations") {
  for (Solid s : {Solid::Tetrahedron, Solid::IcosahedronVertices}) {
    const Setup su(s, 2);
    const auto lifts = lift_group_action(su.spec, su.mesh, su.tables, su.cocycle);
    REQUIRE(lifts.size() == su.spec.branch_points.size() + 1);
    const LiftedSymmetry& deck = lifts.back();
    for (std::size_t v = 0; v < deck.permutation.size(); ++v) {
      CHECK(deck.permutation[v] == static_cast<int>(v));
      CHECK(deck.vertex_sign[v] == -1);
    }
    const int order = branch_rotation_order(s);
    for (std::size_t b = 0; b < su.spec.branch_points.size(); ++b) {
      // Compatibility on free-vertex edges.
      std::set<int> branch(su.mesh.branch_vertices.begin(), su.mesh.branch_vertices.end());
      const auto& lift = lifts[b];
      for (int e = 0; e < su.tables.edge_count(); ++e) {
        const auto [i, j] = su.tables.edges[e];
        if (branch.count(i) || branch.count(j)) continue;
        CHECK(int(lift.vertex_sign[i]) * int(lift.vertex_sign[j]) *
                  su.cocycle.sign(su.tables, lift.permutation[i], lift.permutation[j]) ==
              su.cocycle.edge_sign[e]);
      }
      // (-1, a_p)^order = deck, ^(2 order) = identity.
      LiftedSymmetry power = lift;
      for (int k = 1; k < order; ++k) power = compose(power, lift);
      CHECK(equal_on_free(power, deck, su.mesh.branch_vertices));
      LiftedSymmetry full = power;
      for (int k = 0; k < order; ++k) full = compose(full, lift);
      LiftedSymmetry identity;
      identity.permutation.resize(su.mesh.vertex_count());
      identity.vertex_sign.assign(su.mesh.vertex_count(), 1);
      for (int v = 0; v < su.mesh.vertex_count(); ++v) identity.permutation[v] = v;
      CHECK(equal_on_free(full, identity, su.mesh.branch_vertices));
    }
  }
}

TEST_CASE("icosahedral generator lift has order ten with deck at the fifth power") {
  const Setup su(Solid::IcosahedronVertices, 1);
  const auto lifts = lift_group_action(su.spec, su.mesh, su.tables, su.cocycle);
  LiftedSymmetry power = lifts[0];
  for (int k = 1; k < 5; ++k) power = compose(power, lifts[0]);
  CHECK(equal_on_free(power, lifts.back(), su.mesh.branch_vertices));
}

TEST_CASE("face sign labelings exist, alternate, and flip across sheets") {
  const std::map<Solid, int> cover_faces = {
      {Solid::Tetrahedron, 8},
      {Solid::CubeVertices, 12},
      {Solid::IcosahedronVertices, 40},
      {Solid::IcosahedronFaceMidpoints, 24},
  };
  for (const auto& [solid, expected] : cover_faces) {
    const auto spec = build_cover_spec(solid);
    const FaceSignLabeling lab = find_face_sign_labeling(spec);
    CHECK(2 * lab.base_face_count == expected);
    // Sheets over any base face carry opposite signs.
    for (int f = 0; f < lab.base_face_count; ++f) {
      CHECK(int(lab.sign[f][0]) * int(lab.sign[f][1]) == -1);
    }
    CHECK(lab.sign[0][0] == 1);  // normalization
    CHECK(equivariant_sector_dimension_check(spec, lab));
    // A single flipped face breaks the sector property.
    FaceSignLabeling broken = lab;
    broken.sign[0][0] = static_cast<std::int8_t>(-broken.sign[0][0]);
    CHECK_FALSE(equivariant_sector_dimension_check(spec, broken));
  }
}

TEST_CASE("cover json export carries branch points and cocycle") {
  const Setup su(Solid::Tetrahedron, 1);
  const std::string j = cover_to_json(su.spec, &su.mesh, &su.tables, &su.cocycle);
  CHECK(j.find("\"branch_points\"") != std::string::npos);
  CHECK(j.find("\"cocycle\"") != std::string::npos);
  CHECK(j.find("\"cuts\"") != std::string::npos);
}
