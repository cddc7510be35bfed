#include "z2lab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace z2lab {

namespace {
long long pack_cells(long long ix, long long iy, long long iz) {
  return (ix << 42) | (iy << 21) | iz;
}
long long cell_index(double coord, double cell) {
  // Coordinates live in [-1, 1]; the +2 shift keeps indices positive.
  return static_cast<long long>(std::floor((coord + 2.0) / cell));
}
}  // namespace

long long VertexLocator::key(double x, double y, double z) const {
  return pack_cells(cell_index(x, cell_), cell_index(y, cell_), cell_index(z, cell_));
}

VertexLocator::VertexLocator(const std::vector<Vec3>& verts) : verts_(verts) {
  grid_.reserve(verts.size() * 2);
  for (int i = 0; i < static_cast<int>(verts.size()); ++i) {
    grid_[key(verts[i].x(), verts[i].y(), verts[i].z())].push_back(i);
  }
}

int VertexLocator::find(const Vec3& x, double tol) const {
  const long long ix = cell_index(x.x(), cell_);
  const long long iy = cell_index(x.y(), cell_);
  const long long iz = cell_index(x.z(), cell_);
  int best = -1;
  double best_d = tol;
  // Probe integer-shifted neighbor cells (coordinate re-addition could
  // round across cell boundaries).
  for (long long dx = -1; dx <= 1; ++dx) {
    for (long long dy = -1; dy <= 1; ++dy) {
      for (long long dz = -1; dz <= 1; ++dz) {
        const auto it = grid_.find(pack_cells(ix + dx, iy + dy, iz + dz));
        if (it == grid_.end()) continue;
        for (int i : it->second) {
          const double d = (verts_[i] - x).norm();
          if (d <= best_d) {
            best_d = d;
            best = i;
          }
        }
      }
    }
  }
  return best;
}

namespace {

// Triangulates the base polyhedron for the configuration. Triangular faces
// are kept as-is; square and pentagonal faces are fanned around their
// normalized centroid, which keeps the full rotation group.
std::vector<std::array<int, 3>> base_triangulation(const Polyhedron& poly,
                                                   std::vector<Vec3>& verts) {
  verts = poly.vertices;
  std::vector<std::array<int, 3>> tris;
  for (const auto& f : poly.faces) {
    if (f.size() == 3) {
      tris.push_back({f[0], f[1], f[2]});
      continue;
    }
    Vec3 c = Vec3::Zero();
    for (int i : f) c += verts[i];
    const int ci = static_cast<int>(verts.size());
    verts.push_back(c.normalized());
    for (std::size_t k = 0; k < f.size(); ++k) {
      tris.push_back({f[k], f[(k + 1) % f.size()], ci});
    }
  }
  return tris;
}

// Base mesh for TwoPoints(angle): a pentagonal bipyramid with apexes at
// the two branch points and the ring on their bisector great circle. The
// odd apex degree keeps the full link-holonomy normalization attainable
// (even-degree branch vertices hit a GF(2) parity obstruction).
void two_point_base(double angle, std::vector<Vec3>& verts,
                    std::vector<std::array<int, 3>>& tris) {
  const bool antipodal = std::abs(angle - M_PI) < 1e-12;
  const Vec3 p1(0, 0, 1);
  const Vec3 p2 = antipodal ? Vec3(0, 0, -1) : Vec3(std::sin(angle), 0, std::cos(angle));
  Vec3 axis = p1 - p2;  // ring plane normal
  axis.normalize();
  Vec3 e1 = p1 - axis * axis.dot(p1);
  const double n1 = e1.norm();
  if (n1 < 1e-12) {
    e1 = Vec3(1, 0, 0);  // antipodal pair: any equatorial direction
  } else {
    e1 /= n1;
  }
  // Ring on the bisector circle, equidistant from both apexes.
  Vec3 e2 = axis.cross(e1);
  verts = {p1, p2};
  const int m = 5;
  for (int k = 0; k < m; ++k) {
    const double t = 2.0 * M_PI * k / m;
    verts.push_back((std::cos(t) * e1 + std::sin(t) * e2).normalized());
  }
  for (int k = 0; k < m; ++k) {
    const int a = 2 + k, b = 2 + (k + 1) % m;
    tris.push_back({0, a, b});
    tris.push_back({1, b, a});
  }
}

void subdivide(std::vector<Vec3>& verts, std::vector<std::array<int, 3>>& tris) {
  std::map<std::pair<int, int>, int> midpoint;
  auto mid = [&](int a, int b) {
    const auto key = std::minmax(a, b);
    auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int idx = static_cast<int>(verts.size());
    verts.push_back((0.5 * (verts[a] + verts[b])).normalized());
    midpoint.emplace(key, idx);
    return idx;
  };
  std::vector<std::array<int, 3>> out;
  out.reserve(tris.size() * 4);
  for (const auto& t : tris) {
    const int ab = mid(t[0], t[1]), bc = mid(t[1], t[2]), ca = mid(t[2], t[0]);
    out.push_back({t[0], ab, ca});
    out.push_back({t[1], bc, ab});
    out.push_back({t[2], ca, bc});
    out.push_back({ab, bc, ca});
  }
  tris = std::move(out);
}

// Averages each group orbit and rewrites its vertices as exact rotations
// of the averaged representative. Returns the largest adjustment made.
double snap_orbits(std::vector<Vec3>& verts, const std::vector<Mat3>& group) {
  if (group.size() <= 1) return 0.0;
  const VertexLocator index(verts);
  const int n = static_cast<int>(verts.size());
  std::vector<char> done(n, 0);
  double max_adjust = 0.0;
  for (int v = 0; v < n; ++v) {
    if (done[v]) continue;
    // Orbit of v: image index and the rotation that produced it.
    std::vector<std::pair<int, const Mat3*>> orbit;
    for (const Mat3& g : group) {
      const Vec3 img = g * verts[v];
      const int w = index.find(img, 1e-9);
      if (w < 0) throw std::runtime_error("mesh vertex set is not group invariant");
      bool seen = false;
      for (const auto& [u, gm] : orbit) seen = seen || (u == w);
      if (!seen) orbit.emplace_back(w, &g);
    }
    Vec3 avg = Vec3::Zero();
    for (const auto& [w, g] : orbit) avg += g->transpose() * verts[w];
    avg.normalize();
    for (const auto& [w, g] : orbit) {
      const Vec3 snapped = (*g) * avg;
      max_adjust = std::max(max_adjust, (snapped - verts[w]).norm());
      verts[w] = snapped;
      done[w] = 1;
    }
  }
  return max_adjust;
}

}  // namespace

int SphereMesh::find_vertex(const Vec3& x, double tol) const {
  const VertexLocator index(vertices);
  return index.find(x, tol);
}

SphereMesh build_mesh(const BranchedCoverSpec& spec, int level) {
  if (level < 0 || level > 8) throw std::invalid_argument("refinement level out of [0,8]");
  SphereMesh mesh;
  mesh.solid = spec.solid;
  mesh.symmetric_under = spec.group_name;
  mesh.refinement_level = level;

  if (spec.solid == Solid::TwoPoints) {
    two_point_base(spec.two_point_angle, mesh.vertices, mesh.triangles);
    const bool antipodal = std::abs(spec.two_point_angle - M_PI) < 1e-12;
    mesh.group_rotations =
        antipodal ? rotation_group(GroupName::Axial, 5) : std::vector<Mat3>{Mat3::Identity()};
  } else {
    const Polyhedron poly = branch_polyhedron(spec.solid);
    mesh.triangles = base_triangulation(poly, mesh.vertices);
    mesh.group_rotations = rotation_group(spec.group_name);
  }

  for (int l = 0; l < level; ++l) subdivide(mesh.vertices, mesh.triangles);

  const double adjust = snap_orbits(mesh.vertices, mesh.group_rotations);
  if (adjust > 1e-9) throw std::runtime_error("orbit snap moved a vertex by more than 1e-9");

  for (const Vec3& p : spec.branch_points) {
    const int v = mesh.find_vertex(p, 1e-9);
    if (v < 0) throw std::runtime_error("branch point is not a mesh vertex");
    mesh.branch_vertices.push_back(v);
  }
  return mesh;
}

int MeshTables::edge_index(int u, int v) const {
  for (int k = adj_offset[u]; k < adj_offset[u + 1]; ++k) {
    if (adj_vertex[k] == v) return adj_edge[k];
  }
  return -1;
}

double MeshTables::total_area() const {
  double s = 0.0;
  for (double a : triangle_area) s += a;
  return s;
}

MeshTables geometric_tables(const SphereMesh& mesh) {
  MeshTables t;
  const int nv = mesh.vertex_count();

  std::map<std::pair<int, int>, int> edge_id;
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) {
      const auto key = std::minmax(tri[k], tri[(k + 1) % 3]);
      edge_id.emplace(key, 0);
    }
  }
  t.edges.reserve(edge_id.size());
  for (auto& [key, id] : edge_id) {
    id = static_cast<int>(t.edges.size());
    t.edges.push_back(key);
  }

  t.cotan_weight.assign(t.edges.size(), 0.0);
  t.vertex_area.assign(nv, 0.0);
  t.triangle_area.assign(mesh.triangle_count(), 0.0);
  t.edge_triangles.assign(t.edges.size(), {-1, -1});
  t.triangle_neighbor.assign(mesh.triangle_count(), {-1, -1, -1});
  t.min_triangle_angle = M_PI;

  for (int ti = 0; ti < mesh.triangle_count(); ++ti) {
    const auto& tri = mesh.triangles[ti];
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const double area = 0.5 * (b - a).cross(c - a).norm();
    if (area < 1e-14) throw std::runtime_error("degenerate triangle in mesh");
    t.triangle_area[ti] = area;
    for (int k = 0; k < 3; ++k) {
      t.vertex_area[tri[k]] += area / 3.0;
      // Corner k is opposite edge (k+1, k+2); cot(angle at k) contributes
      // half to that edge's weight.
      const Vec3& pk = mesh.vertices[tri[k]];
      const Vec3 u = mesh.vertices[tri[(k + 1) % 3]] - pk;
      const Vec3 v = mesh.vertices[tri[(k + 2) % 3]] - pk;
      const double cot = u.dot(v) / u.cross(v).norm();
      const int e = edge_id.at(std::minmax(tri[(k + 1) % 3], tri[(k + 2) % 3]));
      t.cotan_weight[e] += 0.5 * cot;
      t.min_triangle_angle = std::min(t.min_triangle_angle, std::atan2(u.cross(v).norm(), u.dot(v)));
      auto& et = t.edge_triangles[e];
      if (et[0] < 0) {
        et[0] = ti;
      } else if (et[1] < 0) {
        et[1] = ti;
      } else {
        throw std::runtime_error("non-manifold edge");
      }
    }
  }

  for (int ti = 0; ti < mesh.triangle_count(); ++ti) {
    const auto& tri = mesh.triangles[ti];
    for (int k = 0; k < 3; ++k) {
      const int e = edge_id.at(std::minmax(tri[(k + 1) % 3], tri[(k + 2) % 3]));
      const auto& et = t.edge_triangles[e];
      t.triangle_neighbor[ti][k] = (et[0] == ti) ? et[1] : et[0];
    }
  }

  // CSR adjacency in edge order; neighbor lists come out sorted because
  // the canonical edge list is sorted.
  std::vector<int> degree(nv, 0);
  for (const auto& [u, v] : t.edges) {
    ++degree[u];
    ++degree[v];
  }
  t.adj_offset.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) t.adj_offset[v + 1] = t.adj_offset[v] + degree[v];
  t.adj_vertex.assign(t.adj_offset[nv], 0);
  t.adj_edge.assign(t.adj_offset[nv], 0);
  std::vector<int> cursor(t.adj_offset.begin(), t.adj_offset.end() - 1);
  for (int e = 0; e < t.edge_count(); ++e) {
    const auto [u, v] = t.edges[e];
    t.adj_vertex[cursor[u]] = v;
    t.adj_edge[cursor[u]++] = e;
    t.adj_vertex[cursor[v]] = u;
    t.adj_edge[cursor[v]++] = e;
  }

  std::vector<int> tdeg(nv, 0);
  for (const auto& tri : mesh.triangles) {
    for (int k = 0; k < 3; ++k) ++tdeg[tri[k]];
  }
  t.vt_offset.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) t.vt_offset[v + 1] = t.vt_offset[v] + tdeg[v];
  t.vt_list.assign(t.vt_offset[nv], 0);
  std::vector<int> tcur(t.vt_offset.begin(), t.vt_offset.end() - 1);
  for (int ti = 0; ti < mesh.triangle_count(); ++ti) {
    for (int k = 0; k < 3; ++k) t.vt_list[tcur[mesh.triangles[ti][k]]++] = ti;
  }

  double edge_sum = 0.0;
  for (const auto& [u, v] : t.edges) edge_sum += (mesh.vertices[u] - mesh.vertices[v]).norm();
  t.mean_edge_length = edge_sum / t.edge_count();

  t.branch_distance.resize(mesh.branch_vertices.size());
  for (std::size_t b = 0; b < mesh.branch_vertices.size(); ++b) {
    const Vec3& p = mesh.vertices[mesh.branch_vertices[b]];
    auto& d = t.branch_distance[b];
    d.resize(nv);
    for (int v = 0; v < nv; ++v) {
      d[v] = std::acos(std::clamp(p.dot(mesh.vertices[v]), -1.0, 1.0));
    }
  }
  return t;
}

std::string mesh_to_ascii(const SphereMesh& mesh) {
  std::ostringstream os;
  os << "# z2lab sphere mesh: solid=" << to_string(mesh.solid)
     << " level=" << mesh.refinement_level << " vertices=" << mesh.vertex_count()
     << " triangles=" << mesh.triangle_count() << " (0-based face indices)\n";
  os.precision(17);
  for (const Vec3& v : mesh.vertices) {
    os << "v " << v.x() << " " << v.y() << " " << v.z() << "\n";
  }
  for (const auto& tri : mesh.triangles) {
    os << "f " << tri[0] << " " << tri[1] << " " << tri[2] << "\n";
  }
  return os.str();
}

}  // namespace z2lab
