#pragma once

#include <array>
#include <string>
#include <unordered_map>
#include <vector>

#include "z2lab/cover.hpp"
#include "z2lab/solids.hpp"

namespace z2lab {

/// Geodesic triangulation of S^2 refining the base polyhedron of a branch
/// configuration. Vertices of level L are a prefix of the vertices of
/// level L+1; branch points are mesh vertices at every level; the rotation
/// group of the configuration maps the vertex set to itself.
struct SphereMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<int, 3>> triangles;
  int refinement_level = 0;
  Solid solid = Solid::Tetrahedron;
  GroupName symmetric_under = GroupName::Tetrahedral;
  std::vector<int> branch_vertices;   // mesh indices of the branch points
  std::vector<Mat3> group_rotations;  // identity first

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int triangle_count() const { return static_cast<int>(triangles.size()); }

  /// Index of the mesh vertex within `tol` of x; -1 if none.
  int find_vertex(const Vec3& x, double tol = 1e-9) const;
};

/// Per-element tables for operator assembly and traversal.
struct MeshTables {
  std::vector<std::pair<int, int>> edges;  // canonical (i < j), sorted
  std::vector<double> cotan_weight;        // per edge, chord geometry
  std::vector<double> vertex_area;         // lumped (barycentric), flat
  std::vector<double> triangle_area;       // flat chord-triangle areas
  // CSR adjacency: for vertex v, neighbors with edge ids.
  std::vector<int> adj_offset;
  std::vector<int> adj_vertex;
  std::vector<int> adj_edge;
  // The one or two triangles containing each edge.
  std::vector<std::array<int, 2>> edge_triangles;
  // Triangle adjacency across edges: neighbor[t][k] shares the edge
  // opposite corner k (-1 on boundary; closed surfaces have none).
  std::vector<std::array<int, 3>> triangle_neighbor;
  // CSR incidence: triangles containing each vertex.
  std::vector<int> vt_offset;
  std::vector<int> vt_list;
  // Geodesic (round-sphere) distance from each vertex to each branch point.
  std::vector<std::vector<double>> branch_distance;  // [branch][vertex]
  double mean_edge_length = 0.0;
  double min_triangle_angle = 0.0;  // radians

  int edge_count() const { return static_cast<int>(edges.size()); }
  int edge_index(int u, int v) const;  // -1 if not an edge
  double total_area() const;
};

/// Hash-grid point locator over a fixed vertex list.
class VertexLocator {
 public:
  explicit VertexLocator(const std::vector<Vec3>& verts);
  /// Index of the vertex within `tol` of x (nearest if several); -1 if none.
  int find(const Vec3& x, double tol = 1e-9) const;

 private:
  const std::vector<Vec3>& verts_;
  double cell_ = 1e-5;
  std::unordered_map<long long, std::vector<int>> grid_;
  long long key(double x, double y, double z) const;
};

/// Builds the level-`level` mesh for the configuration: midpoint 4-to-1
/// subdivision of the base polyhedron with spherical projection, followed
/// by an orbit-averaging snap that makes the rotation-group invariance
/// exact at working precision.
SphereMesh build_mesh(const BranchedCoverSpec& spec, int level);

MeshTables geometric_tables(const SphereMesh& mesh);

/// ASCII polygon export: header, "v x y z" lines, "f i j k" lines with
/// 0-based indices. Optional sidecar per-vertex scalar CSV is written by
/// the caller (see docs/FORMATS.md).
std::string mesh_to_ascii(const SphereMesh& mesh);

}  // namespace z2lab
