#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "z2lab/solids.hpp"

namespace z2lab {

struct SphereMesh;
struct MeshTables;

/// Branch set on S^2 together with the cut system that realizes the real
/// line bundle with holonomy -1 around every branch point.
///
/// Cuts are vertex paths on the level-0 base mesh; each path joins two
/// distinct branch points, the paths are pairwise edge-disjoint, and every
/// branch point is the endpoint of exactly one cut.
struct BranchedCoverSpec {
  Solid solid = Solid::Tetrahedron;
  double two_point_angle = M_PI;  // only meaningful for TwoPoints
  std::vector<Vec3> branch_points;
  std::vector<std::vector<int>> cuts;  // vertex indices on the base mesh
  GroupName group_name = GroupName::Tetrahedral;
};

/// One sign per unordered mesh edge, indexed like MeshTables::edges.
/// Encodes the line bundle: the product of signs around the vertex link of
/// a branch point is -1, around any other vertex +1.
struct SignCocycle {
  std::vector<std::int8_t> edge_sign;

  int sign(const MeshTables& tables, int u, int v) const;
};

/// A mesh symmetry lifted to the line bundle: vertex permutation plus a
/// per-vertex sign intertwining the cocycle. Twisted sections vanish at
/// branch vertices, so signs there are conventional: +1 for transported
/// lifts, -1 for the deck element.
struct LiftedSymmetry {
  std::vector<int> permutation;  // vertex -> image vertex
  std::vector<std::int8_t> vertex_sign;
  std::string group_element_label;
};

/// Composition: apply h first, then g.
LiftedSymmetry compose(const LiftedSymmetry& g, const LiftedSymmetry& h);

/// Sign labels on the faces of the branched double cover of the branch
/// polyhedron: one sign per (base face, sheet) pair.
struct FaceSignLabeling {
  int base_face_count = 0;
  // sign[face][sheet], sheet 0 = '+', sheet 1 = '-'.
  std::vector<std::array<std::int8_t, 2>> sign;
  // cut edges of the polyhedron realizing the cover (a perfect matching
  // of the branch vertices); crossing one of these swaps sheets.
  std::vector<std::pair<int, int>> cut_edges;
};

/// Builds the branch set, deterministic cut pairing, and symmetry-group
/// label for one of the supported configurations.
BranchedCoverSpec build_cover_spec(Solid solid, double two_point_angle = M_PI);

/// Sign cocycle on `mesh` with edge_sign = -1 exactly on the edges crossed
/// by the (refined) cut paths. `alternate_routes` reroutes every cut
/// through a different deterministic path; the result is gauge-equivalent.
SignCocycle build_sign_cocycle(const BranchedCoverSpec& spec, const SphereMesh& mesh,
                               const MeshTables& tables, bool alternate_routes = false);

/// Link-cycle sign product around `v` (holonomy of the loop around v).
int link_holonomy(const SignCocycle& cocycle, const SphereMesh& mesh,
                  const MeshTables& tables, int v);

/// Vertices whose link product differs from the normalization (-1 at
/// branch points, +1 elsewhere). After construction this is empty except
/// possibly at neighbors of even-degree branch points, where a GF(2)
/// parity obstruction can make the +1 normalization unattainable; those
/// edges couple only to Dirichlet-zero branch values.
std::vector<int> link_defects(const SignCocycle& cocycle, const SphereMesh& mesh,
                              const MeshTables& tables);

/// Solves edge-wise for a vertex sign field eta with
/// eta_i * eta_j = a(i,j) * b(i,j) over all edges not touching a branch
/// vertex; returns empty if the two cocycles are not gauge-equivalent on
/// the punctured mesh.
std::vector<std::int8_t> gauge_between(const SignCocycle& a, const SignCocycle& b,
                                       const SphereMesh& mesh, const MeshTables& tables);

/// Lifts of the generators (-1, a_p) for every branch point p, normalized
/// so that the order(a_p)-th power is the deck element, plus the deck
/// element itself (last entry). Signs are fixed by spanning-tree transport
/// from vertex 0 with base sign +1.
std::vector<LiftedSymmetry> lift_group_action(const BranchedCoverSpec& spec,
                                              const SphereMesh& mesh,
                                              const MeshTables& tables,
                                              const SignCocycle& cocycle);

/// Lift of one rotation R of the mesh, with transported signs; `flip`
/// multiplies all signs by -1.
LiftedSymmetry lift_rotation(const Mat3& rotation, const std::string& label,
                             const SphereMesh& mesh, const MeshTables& tables,
                             const SignCocycle& cocycle, bool flip = false);

/// Two-coloring of the cover faces of the branch polyhedron such that no
/// two adjacent cover faces carry the same sign. Throws if the adjacency
/// graph fails to be bipartite.
FaceSignLabeling find_face_sign_labeling(const BranchedCoverSpec& spec);

/// True iff the step section defined by the labeling changes sign under
/// the cover lift of every generator (-1, a_p) (so the symmetric sector is
/// nonempty).
bool equivariant_sector_dimension_check(const BranchedCoverSpec& spec,
                                        const FaceSignLabeling& labeling);

/// JSON document for the cover spec and optionally a cocycle (see
/// docs/FORMATS.md).
std::string cover_to_json(const BranchedCoverSpec& spec, const SphereMesh* mesh = nullptr,
                          const MeshTables* tables = nullptr,
                          const SignCocycle* cocycle = nullptr);

}  // namespace z2lab
