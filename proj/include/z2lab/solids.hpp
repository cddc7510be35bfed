#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace z2lab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class Solid {
  Tetrahedron,
  CubeVertices,
  IcosahedronVertices,
  IcosahedronFaceMidpoints,
  TwoPoints,
};

enum class GroupName { Tetrahedral, Octahedral, Icosahedral, Axial };

std::string to_string(Solid s);
std::string to_string(GroupName g);
Solid solid_from_string(const std::string& name);

/// Combinatorial cell structure of a convex polyhedron inscribed in S^2.
/// Faces are vertex-index polygons with outward (counterclockwise from
/// outside) orientation.
struct Polyhedron {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
};

/// The polyhedron whose vertex set is the branch set of `solid`:
/// tetrahedron, cube, icosahedron, or dodecahedron (face midpoints case).
/// Not defined for TwoPoints.
Polyhedron branch_polyhedron(Solid solid);

/// Rodrigues rotation about `axis` (unit vector) by `angle`, right-handed.
Mat3 rotation_about(const Vec3& axis, double angle);

/// Clockwise rotation by 2*pi/order about the oriented ray through p,
/// as seen looking from outside the sphere down onto p.
Mat3 branch_rotation(const Vec3& p, int order);

/// Rotation order of the branch-point stabilizer generator a_p.
int branch_rotation_order(Solid solid);

/// Full rotation group of the solid's configuration, generated by closure.
/// Tetrahedral: 12, Octahedral: 24, Icosahedral: 60. Axial(m): cyclic about
/// the z axis. The identity is always element 0.
std::vector<Mat3> rotation_group(GroupName g, int axial_order = 4);

/// Group closure of an arbitrary generator set (matrix product, matched to
/// tolerance 1e-9). Throws if the closure exceeds `max_order`.
std::vector<Mat3> group_closure(const std::vector<Mat3>& generators,
                                std::size_t max_order = 256);

}  // namespace z2lab
