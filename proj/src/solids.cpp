#include "z2lab/solids.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace z2lab {

std::string to_string(Solid s) {
  switch (s) {
    case Solid::Tetrahedron: return "tetrahedron";
    case Solid::CubeVertices: return "cube-vertices";
    case Solid::IcosahedronVertices: return "icosahedron-vertices";
    case Solid::IcosahedronFaceMidpoints: return "icosahedron-face-midpoints";
    case Solid::TwoPoints: return "two-points";
  }
  throw std::invalid_argument("unknown solid");
}

std::string to_string(GroupName g) {
  switch (g) {
    case GroupName::Tetrahedral: return "tetrahedral";
    case GroupName::Octahedral: return "octahedral";
    case GroupName::Icosahedral: return "icosahedral";
    case GroupName::Axial: return "axial";
  }
  throw std::invalid_argument("unknown group");
}

Solid solid_from_string(const std::string& name) {
  if (name == "tetrahedron") return Solid::Tetrahedron;
  if (name == "cube-vertices") return Solid::CubeVertices;
  if (name == "icosahedron-vertices") return Solid::IcosahedronVertices;
  if (name == "icosahedron-face-midpoints") return Solid::IcosahedronFaceMidpoints;
  if (name == "two-points") return Solid::TwoPoints;
  throw std::invalid_argument("unsupported solid label: " + name);
}

namespace {

// Reverses any face whose normal points inward, so all faces end up
// counterclockwise as seen from outside the sphere.
void orient_outward(Polyhedron& p) {
  for (auto& f : p.faces) {
    Vec3 c = Vec3::Zero();
    for (int i : f) c += p.vertices[i];
    c /= static_cast<double>(f.size());
    const Vec3 n = (p.vertices[f[1]] - p.vertices[f[0]])
                       .cross(p.vertices[f[2]] - p.vertices[f[0]]);
    if (n.dot(c) < 0.0) std::reverse(f.begin(), f.end());
  }
}

Polyhedron make_tetrahedron() {
  const double s2 = std::sqrt(2.0);
  const double s3 = std::sqrt(3.0);
  Polyhedron p;
  p.vertices = {
      Vec3(0.0, 0.0, 1.0),
      Vec3(-s2 / 3.0, s2 / s3, -1.0 / 3.0),
      Vec3(-s2 / 3.0, -s2 / s3, -1.0 / 3.0),
      Vec3(2.0 * s2 / 3.0, 0.0, -1.0 / 3.0),
  };
  // Outward-oriented faces of the regular tetrahedron above.
  p.faces = {{0, 1, 2}, {0, 2, 3}, {0, 3, 1}, {1, 3, 2}};
  orient_outward(p);
  return p;
}

Polyhedron make_cube() {
  const double s = 1.0 / std::sqrt(3.0);
  Polyhedron p;
  for (int i = 0; i < 8; ++i) {
    p.vertices.emplace_back((i & 1) ? s : -s, (i & 2) ? s : -s, (i & 4) ? s : -s);
  }
  // Index bit k selects the sign of coordinate k. Outward quads:
  p.faces = {
      {0, 2, 6, 4},  // x = -s
      {1, 5, 7, 3},  // x = +s
      {0, 4, 5, 1},  // y = -s
      {2, 3, 7, 6},  // y = +s
      {0, 1, 3, 2},  // z = -s
      {4, 6, 7, 5},  // z = +s
  };
  orient_outward(p);
  return p;
}

Polyhedron make_icosahedron() {
  const double phi = 0.5 * (1.0 + std::sqrt(5.0));
  const double nrm = std::sqrt(1.0 + phi * phi);
  const double a = 1.0 / nrm;
  const double b = phi / nrm;
  Polyhedron p;
  p.vertices = {
      Vec3(-a, b, 0),  Vec3(a, b, 0),  Vec3(-a, -b, 0), Vec3(a, -b, 0),
      Vec3(0, -a, b),  Vec3(0, a, b),  Vec3(0, -a, -b), Vec3(0, a, -b),
      Vec3(b, 0, -a),  Vec3(b, 0, a),  Vec3(-b, 0, -a), Vec3(-b, 0, a),
  };
  p.faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  orient_outward(p);
  return p;
}

// Dodecahedron realized as the face-centroid dual of the icosahedron:
// vertex j = normalized centroid of icosahedron face j, one pentagon per
// icosahedron vertex.
Polyhedron make_dodecahedron() {
  const Polyhedron ico = make_icosahedron();
  Polyhedron p;
  for (const auto& f : ico.faces) {
    Vec3 c = ico.vertices[f[0]] + ico.vertices[f[1]] + ico.vertices[f[2]];
    p.vertices.push_back(c.normalized());
  }
  for (int v = 0; v < static_cast<int>(ico.vertices.size()); ++v) {
    std::vector<int> incident;
    for (int j = 0; j < static_cast<int>(ico.faces.size()); ++j) {
      const auto& f = ico.faces[j];
      if (f[0] == v || f[1] == v || f[2] == v) incident.push_back(j);
    }
    // Order the pentagon counterclockwise around the icosahedron vertex.
    const Vec3 n = ico.vertices[v];
    Vec3 ref = (p.vertices[incident[0]] - n * n.dot(p.vertices[incident[0]])).normalized();
    Vec3 ref2 = n.cross(ref);
    std::map<double, int> by_angle;
    for (int j : incident) {
      const Vec3& c = p.vertices[j];
      by_angle[std::atan2(c.dot(ref2), c.dot(ref))] = j;
    }
    std::vector<int> ring;
    for (const auto& [ang, j] : by_angle) ring.push_back(j);
    p.faces.push_back(ring);
  }
  orient_outward(p);
  return p;
}

}  // namespace

Polyhedron branch_polyhedron(Solid solid) {
  switch (solid) {
    case Solid::Tetrahedron: return make_tetrahedron();
    case Solid::CubeVertices: return make_cube();
    case Solid::IcosahedronVertices: return make_icosahedron();
    case Solid::IcosahedronFaceMidpoints: return make_dodecahedron();
    case Solid::TwoPoints:
      throw std::invalid_argument("two-points branch set has no polyhedron");
  }
  throw std::invalid_argument("unknown solid");
}

Mat3 rotation_about(const Vec3& axis, double angle) {
  return Eigen::AngleAxisd(angle, axis.normalized()).toRotationMatrix();
}

Mat3 branch_rotation(const Vec3& p, int order) {
  // Clockwise seen from outside = negative angle in the right-handed sense.
  return rotation_about(p, -2.0 * M_PI / order);
}

int branch_rotation_order(Solid solid) {
  switch (solid) {
    case Solid::Tetrahedron:
    case Solid::CubeVertices:
    case Solid::IcosahedronFaceMidpoints:
      return 3;
    case Solid::IcosahedronVertices:
      return 5;
    case Solid::TwoPoints:
      return 0;  // continuous stabilizer; no finite generator
  }
  throw std::invalid_argument("unknown solid");
}

std::vector<Mat3> group_closure(const std::vector<Mat3>& generators,
                                std::size_t max_order) {
  std::vector<Mat3> elems;
  elems.push_back(Mat3::Identity());
  auto find = [&elems](const Mat3& m) -> int {
    for (std::size_t i = 0; i < elems.size(); ++i) {
      if ((elems[i] - m).cwiseAbs().maxCoeff() < 1e-9) return static_cast<int>(i);
    }
    return -1;
  };
  bool grew = true;
  while (grew) {
    grew = false;
    for (std::size_t i = 0; i < elems.size(); ++i) {
      for (const Mat3& g : generators) {
        Mat3 m = g * elems[i];
        if (find(m) < 0) {
          elems.push_back(m);
          grew = true;
          if (elems.size() > max_order) {
            throw std::runtime_error("group closure exceeded maximum order");
          }
        }
      }
    }
  }
  return elems;
}

std::vector<Mat3> rotation_group(GroupName g, int axial_order) {
  switch (g) {
    case GroupName::Tetrahedral: {
      const Polyhedron t = make_tetrahedron();
      std::vector<Mat3> gens;
      for (const auto& v : t.vertices) gens.push_back(branch_rotation(v, 3));
      auto grp = group_closure(gens);
      if (grp.size() != 12) throw std::runtime_error("tetrahedral closure != 12");
      return grp;
    }
    case GroupName::Octahedral: {
      const Polyhedron c = make_cube();
      std::vector<Mat3> gens;
      for (const auto& v : c.vertices) gens.push_back(branch_rotation(v, 3));
      gens.push_back(rotation_about(Vec3(0, 0, 1), M_PI / 2.0));
      auto grp = group_closure(gens);
      if (grp.size() != 24) throw std::runtime_error("octahedral closure != 24");
      return grp;
    }
    case GroupName::Icosahedral: {
      const Polyhedron ico = make_icosahedron();
      std::vector<Mat3> gens;
      // Two order-5 rotations about non-antipodal vertex axes.
      gens.push_back(branch_rotation(ico.vertices[0], 5));
      gens.push_back(branch_rotation(ico.vertices[1], 5));
      auto grp = group_closure(gens);
      if (grp.size() != 60) throw std::runtime_error("icosahedral closure != 60");
      return grp;
    }
    case GroupName::Axial: {
      std::vector<Mat3> grp;
      for (int k = 0; k < axial_order; ++k) {
        grp.push_back(rotation_about(Vec3(0, 0, 1), 2.0 * M_PI * k / axial_order));
      }
      return grp;
    }
  }
  throw std::invalid_argument("unknown group");
}

}  // namespace z2lab
