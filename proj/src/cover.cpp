#include "z2lab/cover.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "z2lab/mesh.hpp"

namespace z2lab {

namespace {

bool lex_less(const Vec3& a, const Vec3& b) {
  if (a.x() != b.x()) return a.x() < b.x();
  if (a.y() != b.y()) return a.y() < b.y();
  return a.z() < b.z();
}

// Lexicographic-minimal shortest path between s and t. `banned_edge` marks
// unusable edges; interior vertices may not come from `blocked` (branch
// points other than the endpoints). When `prefer_max` is set the walk
// breaks ties toward the largest vertex index instead.
std::vector<int> shortest_path(const MeshTables& tables, int nv, int s, int t,
                               const std::vector<char>& banned_edge,
                               const std::vector<char>& blocked, bool prefer_max) {
  std::vector<int> dist(nv, -1);
  std::deque<int> queue;
  dist[t] = 0;
  queue.push_back(t);
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    if (u != t && blocked[u]) continue;  // cannot pass through
    for (int k = tables.adj_offset[u]; k < tables.adj_offset[u + 1]; ++k) {
      if (banned_edge[tables.adj_edge[k]]) continue;
      const int w = tables.adj_vertex[k];
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        queue.push_back(w);
      }
    }
  }
  if (dist[s] < 0) throw std::runtime_error("cut path not realizable on mesh");
  std::vector<int> path{s};
  int cur = s;
  while (cur != t) {
    int best = -1;
    for (int k = tables.adj_offset[cur]; k < tables.adj_offset[cur + 1]; ++k) {
      if (banned_edge[tables.adj_edge[k]]) continue;
      const int w = tables.adj_vertex[k];
      if (dist[w] != dist[cur] - 1) continue;
      if (w != t && blocked[w]) continue;
      if (best < 0 || (prefer_max ? w > best : w < best)) best = w;
    }
    if (best < 0) throw std::runtime_error("cut path walk failed");
    path.push_back(best);
    cur = best;
  }
  return path;
}

// Neighbors of v in counterclockwise rotational order (seen from outside),
// derived from the consistent outward orientation of the triangles.
std::vector<int> ccw_ring(const SphereMesh& mesh, const MeshTables& tables, int v) {
  const int t0 = tables.vt_list[tables.vt_offset[v]];
  const auto corner_of = [&](int ti) {
    const auto& tri = mesh.triangles[ti];
    for (int k = 0; k < 3; ++k) {
      if (tri[k] == v) return k;
    }
    throw std::logic_error("triangle does not contain vertex");
  };
  std::vector<int> ring;
  int ti = t0;
  do {
    const auto& tri = mesh.triangles[ti];
    const int k = corner_of(ti);
    const int a = tri[(k + 1) % 3];  // CCW successor around v: a -> b
    const int b = tri[(k + 2) % 3];
    ring.push_back(a);
    // Next triangle counterclockwise shares edge (v, b), i.e. is the
    // neighbor opposite corner a.
    ti = tables.triangle_neighbor[ti][(k + 1) % 3];
    if (ti < 0) throw std::runtime_error("open vertex fan");
  } while (ti != t0);
  return ring;
}

// Flips the cocycle along one cut path by the left-fan rule: at every
// interior path vertex, the edges strictly between the outgoing and the
// incoming path edge (in CCW order) are crossed by the offset cut curve.
// This leaves wrong link parities only at vertices adjacent to the path
// endpoints (their link polygons pass through the branch point);
// repair_branch_neighborhoods fixes those afterwards.
void apply_cut_path(const SphereMesh& mesh, const MeshTables& tables,
                    const std::vector<int>& path, std::vector<std::int8_t>& sign) {
  if (path.size() < 3) {
    throw std::runtime_error("cut path without interior vertices (branch points adjacent)");
  }
  for (std::size_t i = 1; i + 1 < path.size(); ++i) {
    const int v = path[i];
    const int prev = path[i - 1];
    const int next = path[i + 1];
    const std::vector<int> ring = ccw_ring(mesh, tables, v);
    const int n = static_cast<int>(ring.size());
    int j_next = -1;
    for (int j = 0; j < n; ++j) {
      if (ring[j] == next) j_next = j;
    }
    if (j_next < 0) throw std::logic_error("path vertex ring mismatch");
    for (int j = (j_next + 1) % n; ring[j] != prev; j = (j + 1) % n) {
      const int e = tables.edge_index(v, ring[j]);
      sign[e] = -sign[e];
    }
  }
}

// Joint GF(2) repair of the link parities around the branch points.
// Variables are the spoke edges (p, x); flipping one toggles exactly the
// link parities of the two common neighbors of p and x, and only faces
// with a branch corner (which are unconstrained). Link parities at
// vertices adjacent to an even-degree branch point can be obstructed (the
// spoke toggles split into two parity classes); such leftovers are
// harmless because spoke edges couple to Dirichlet-zero values. Returns
// false only if a defect lies outside the branch 1-rings or at a branch
// point itself.
bool repair_branch_neighborhoods(const SphereMesh& mesh, const MeshTables& tables,
                                 std::vector<std::int8_t>& sign) {
  const int nv = mesh.vertex_count();
  std::vector<char> is_branch(nv, 0);
  for (int b : mesh.branch_vertices) is_branch[b] = 1;

  SignCocycle view{sign};
  std::vector<char> near_branch(nv, 0);
  std::vector<int> spokes;  // edge ids, the GF(2) variables
  for (int p : mesh.branch_vertices) {
    for (int k = tables.adj_offset[p]; k < tables.adj_offset[p + 1]; ++k) {
      near_branch[tables.adj_vertex[k]] = 1;
      spokes.push_back(tables.adj_edge[k]);
    }
  }

  bool any_defect = false;
  for (int v = 0; v < nv; ++v) {
    const int want = is_branch[v] ? -1 : 1;
    if (link_holonomy(view, mesh, tables, v) == want) continue;
    if (is_branch[v] || !near_branch[v]) return false;  // unrepairable here
    any_defect = true;
  }
  if (!any_defect) return true;

  // Constraint rows over all vertices adjacent to a branch point.
  std::vector<int> rows;
  for (int v = 0; v < nv; ++v) {
    if (near_branch[v] && !is_branch[v]) rows.push_back(v);
  }
  std::vector<std::vector<char>> A(rows.size(), std::vector<char>(spokes.size(), 0));
  std::vector<char> rhs(rows.size(), 0);
  std::vector<int> row_of(nv, -1);
  for (std::size_t r = 0; r < rows.size(); ++r) row_of[rows[r]] = static_cast<int>(r);
  for (int v : rows) {
    rhs[row_of[v]] = (link_holonomy(view, mesh, tables, v) == 1) ? 0 : 1;
  }
  for (std::size_t s = 0; s < spokes.size(); ++s) {
    const auto [p, x] = tables.edges[spokes[s]];
    // Common neighbors of p and x == third corners of the two triangles
    // containing the spoke.
    for (int t : tables.edge_triangles[spokes[s]]) {
      for (int c : mesh.triangles[t]) {
        if (c != p && c != x && row_of[c] >= 0) A[row_of[c]][s] ^= 1;
      }
    }
  }

  // Gaussian elimination; unsatisfiable rows are left as defects.
  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(spokes.size());
  std::vector<int> pivot_col(nr, -1);
  int rank = 0;
  for (int col = 0; col < nc && rank < nr; ++col) {
    int piv = -1;
    for (int r = rank; r < nr; ++r) {
      if (A[r][col]) {
        piv = r;
        break;
      }
    }
    if (piv < 0) continue;
    std::swap(A[piv], A[rank]);
    std::swap(rhs[piv], rhs[rank]);
    for (int r = 0; r < nr; ++r) {
      if (r != rank && A[r][col]) {
        for (int c = col; c < nc; ++c) A[r][c] ^= A[rank][c];
        rhs[r] ^= rhs[rank];
      }
    }
    pivot_col[rank] = col;
    ++rank;
  }
  for (int r = 0; r < rank; ++r) {
    if (rhs[r]) {
      const int e = spokes[pivot_col[r]];
      sign[e] = static_cast<std::int8_t>(-sign[e]);
    }
  }
  return true;
}

// Direct GF(2) solve of the holonomy constraints; used at level 0 where
// branch points are mutually adjacent and no edge path has an interior
// vertex. Hard rows: branch links and faces free of branch corners. Soft
// rows (non-branch links, all branch-adjacent at level 0) are satisfied
// when attainable.
std::vector<std::int8_t> solve_cocycle_gf2(const SphereMesh& mesh, const MeshTables& tables) {
  const int ne = tables.edge_count();
  std::vector<char> is_branch(mesh.vertex_count(), 0);
  for (int b : mesh.branch_vertices) is_branch[b] = 1;

  auto link_row = [&](int v) {
    std::vector<char> row(ne, 0);
    for (int k = tables.vt_offset[v]; k < tables.vt_offset[v + 1]; ++k) {
      const auto& tri = mesh.triangles[tables.vt_list[k]];
      int a = -1, b = -1;
      for (int c : tri) {
        if (c == v) continue;
        (a < 0 ? a : b) = c;
      }
      row[tables.edge_index(a, b)] ^= 1;
    }
    return row;
  };

  std::vector<std::vector<char>> rows;
  std::vector<char> rhs;
  std::vector<char> soft;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!is_branch[v]) continue;
    rows.push_back(link_row(v));
    rhs.push_back(1);
    soft.push_back(0);
  }
  for (const auto& tri : mesh.triangles) {
    if (is_branch[tri[0]] || is_branch[tri[1]] || is_branch[tri[2]]) continue;
    std::vector<char> row(ne, 0);
    row[tables.edge_index(tri[0], tri[1])] ^= 1;
    row[tables.edge_index(tri[1], tri[2])] ^= 1;
    row[tables.edge_index(tri[2], tri[0])] ^= 1;
    rows.push_back(std::move(row));
    rhs.push_back(0);
    soft.push_back(0);
  }
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (is_branch[v]) continue;
    rows.push_back(link_row(v));
    rhs.push_back(0);
    soft.push_back(1);
  }

  const int nrows = static_cast<int>(rows.size());
  std::vector<int> pivot_col(nrows, -1);
  int rank = 0;
  // Two passes: hard rows claim pivots first, then soft rows; a soft row
  // that reduces to 0 = 1 is an unattainable normalization and dropped.
  for (int phase = 0; phase < 2; ++phase) {
    for (int col = 0; col < ne && rank < nrows; ++col) {
      int piv = -1;
      for (int r = rank; r < nrows; ++r) {
        if (rows[r][col] && (phase == 1 || !soft[r])) {
          piv = r;
          break;
        }
      }
      if (piv < 0) continue;
      std::swap(rows[piv], rows[rank]);
      std::swap(rhs[piv], rhs[rank]);
      std::swap(soft[piv], soft[rank]);
      for (int r = 0; r < nrows; ++r) {
        if (r != rank && rows[r][col]) {
          for (int c = col; c < ne; ++c) rows[r][c] ^= rows[rank][c];
          rhs[r] ^= rhs[rank];
        }
      }
      pivot_col[rank] = col;
      ++rank;
    }
    if (phase == 0) {
      for (int r = rank; r < nrows; ++r) {
        if (rhs[r] && !soft[r]) {
          throw std::runtime_error("level-0 cocycle system inconsistent");
        }
      }
    }
  }
  std::vector<std::int8_t> sign(ne, 1);
  for (int r = 0; r < rank; ++r) {
    if (rhs[r]) sign[pivot_col[r]] = -1;
  }
  return sign;
}

// Pairs the branch points in sorted order, each with the first unmatched
// partner admitting an edge-disjoint path that avoids the other branch
// points, backtracking when a greedy commitment strands a later pair.
struct CutSearch {
  const SphereMesh& base;
  const MeshTables& tables;
  std::vector<int> order;
  std::vector<char> banned;
  std::vector<char> blocked;
  std::vector<char> matched;
  std::vector<std::vector<int>> cuts;

  bool match_from(std::size_t i) {
    while (i < order.size() && matched[i]) ++i;
    if (i >= order.size()) return true;
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      if (matched[j]) continue;
      std::vector<int> path;
      try {
        path = shortest_path(tables, base.vertex_count(), order[i], order[j], banned,
                             blocked, /*prefer_max=*/false);
      } catch (const std::runtime_error&) {
        continue;
      }
      matched[i] = matched[j] = 1;
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        banned[tables.edge_index(path[k], path[k + 1])] = 1;
      }
      cuts.push_back(path);
      if (match_from(i + 1)) return true;
      cuts.pop_back();
      for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        banned[tables.edge_index(path[k], path[k + 1])] = 0;
      }
      matched[i] = matched[j] = 0;
    }
    return false;
  }
};

std::vector<std::vector<int>> deterministic_cuts(const SphereMesh& base,
                                                 const MeshTables& tables,
                                                 const std::vector<int>& branch_vertices) {
  CutSearch search{base, tables, {}, {}, {}, {}, {}};
  search.order = branch_vertices;
  std::sort(search.order.begin(), search.order.end(), [&](int a, int b) {
    return lex_less(base.vertices[a], base.vertices[b]);
  });
  search.banned.assign(tables.edge_count(), 0);
  search.blocked.assign(base.vertex_count(), 0);
  for (int b : branch_vertices) search.blocked[b] = 1;
  search.matched.assign(search.order.size(), 0);
  if (!search.match_from(0)) {
    throw std::runtime_error("no edge-disjoint cut pairing exists on the base mesh");
  }
  return search.cuts;
}

// Refines a base-mesh cut path to the target mesh by repeated midpoint
// insertion; the midpoints are found by position lookup.
std::vector<int> refine_path(const std::vector<int>& base_path, const SphereMesh& mesh,
                             const VertexLocator& locator) {
  std::vector<int> path = base_path;
  for (int l = 0; l < mesh.refinement_level; ++l) {
    std::vector<int> next;
    next.reserve(path.size() * 2);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const Vec3 mid =
          (0.5 * (mesh.vertices[path[i]] + mesh.vertices[path[i + 1]])).normalized();
      const int m = locator.find(mid, 1e-8);
      if (m < 0) throw std::runtime_error("cut path not realizable on mesh");
      next.push_back(path[i]);
      next.push_back(m);
    }
    next.push_back(path.back());
    path = std::move(next);
  }
  return path;
}

}  // namespace

int SignCocycle::sign(const MeshTables& tables, int u, int v) const {
  const int e = tables.edge_index(u, v);
  if (e < 0) throw std::invalid_argument("not a mesh edge");
  return edge_sign[e];
}

LiftedSymmetry compose(const LiftedSymmetry& g, const LiftedSymmetry& h) {
  const std::size_t n = g.permutation.size();
  LiftedSymmetry out;
  out.permutation.resize(n);
  out.vertex_sign.resize(n);
  out.group_element_label = g.group_element_label + "*" + h.group_element_label;
  for (std::size_t v = 0; v < n; ++v) {
    out.permutation[v] = g.permutation[h.permutation[v]];
    out.vertex_sign[v] =
        static_cast<std::int8_t>(h.vertex_sign[v] * g.vertex_sign[h.permutation[v]]);
  }
  return out;
}

BranchedCoverSpec build_cover_spec(Solid solid, double two_point_angle) {
  BranchedCoverSpec spec;
  spec.solid = solid;
  switch (solid) {
    case Solid::Tetrahedron: spec.group_name = GroupName::Tetrahedral; break;
    case Solid::CubeVertices: spec.group_name = GroupName::Octahedral; break;
    case Solid::IcosahedronVertices:
    case Solid::IcosahedronFaceMidpoints: spec.group_name = GroupName::Icosahedral; break;
    case Solid::TwoPoints: spec.group_name = GroupName::Axial; break;
  }
  if (solid == Solid::TwoPoints) {
    if (!(two_point_angle > 0.0 && two_point_angle <= M_PI)) {
      throw std::invalid_argument("two-point angle must lie in (0, pi]");
    }
    spec.two_point_angle = two_point_angle;
    spec.branch_points.emplace_back(0, 0, 1);
    if (std::abs(two_point_angle - M_PI) < 1e-12) {
      spec.branch_points.emplace_back(0, 0, -1);
    } else {
      spec.branch_points.emplace_back(std::sin(two_point_angle), 0.0,
                                      std::cos(two_point_angle));
    }
  } else {
    spec.branch_points = branch_polyhedron(solid).vertices;
  }

  const SphereMesh base = build_mesh(spec, 0);
  const MeshTables tables = geometric_tables(base);
  spec.cuts = deterministic_cuts(base, tables, base.branch_vertices);
  return spec;
}

SignCocycle build_sign_cocycle(const BranchedCoverSpec& spec, const SphereMesh& mesh,
                               const MeshTables& tables, bool alternate_routes) {
  SignCocycle cocycle;
  cocycle.edge_sign.assign(tables.edge_count(), 1);

  if (mesh.refinement_level == 0) {
    if (alternate_routes) {
      throw std::invalid_argument("alternate cut routes need refinement level >= 1");
    }
    cocycle.edge_sign = solve_cocycle_gf2(mesh, tables);
  } else {
    const VertexLocator locator(mesh.vertices);
    std::vector<std::vector<int>> paths;
    for (const auto& cut : spec.cuts) paths.push_back(refine_path(cut, mesh, locator));
    if (alternate_routes) {
      // Reroute every cut away from the midpoint edge of its default path.
      std::vector<char> banned(tables.edge_count(), 0);
      std::vector<char> blocked(mesh.vertex_count(), 0);
      for (int b : mesh.branch_vertices) blocked[b] = 1;
      std::vector<std::vector<int>> rerouted;
      for (const auto& p : paths) {
        const std::size_t m = p.size() / 2;
        banned[tables.edge_index(p[m - 1], p[m])] = 1;
        rerouted.push_back(shortest_path(tables, mesh.vertex_count(), p.front(), p.back(),
                                         banned, blocked, /*prefer_max=*/true));
        for (std::size_t k = 0; k + 1 < rerouted.back().size(); ++k) {
          banned[tables.edge_index(rerouted.back()[k], rerouted.back()[k + 1])] = 1;
        }
      }
      paths = std::move(rerouted);
    }
    for (const auto& p : paths) apply_cut_path(mesh, tables, p, cocycle.edge_sign);
    if (!repair_branch_neighborhoods(mesh, tables, cocycle.edge_sign)) {
      throw std::runtime_error("cocycle endpoint repair failed");
    }
  }

  // Hard invariants: -1 holonomy at branch links, +1 face products away
  // from branch corners, +1 links away from the branch 1-rings.
  std::vector<char> is_branch(mesh.vertex_count(), 0);
  for (int b : mesh.branch_vertices) is_branch[b] = 1;
  std::vector<char> near_branch(mesh.vertex_count(), 0);
  for (int p : mesh.branch_vertices) {
    for (int k = tables.adj_offset[p]; k < tables.adj_offset[p + 1]; ++k) {
      near_branch[tables.adj_vertex[k]] = 1;
    }
  }
  for (int v : link_defects(cocycle, mesh, tables)) {
    if (is_branch[v] || !near_branch[v]) {
      throw std::runtime_error("cocycle construction produced wrong holonomy");
    }
  }
  for (const auto& tri : mesh.triangles) {
    if (is_branch[tri[0]] || is_branch[tri[1]] || is_branch[tri[2]]) continue;
    const int p = cocycle.sign(tables, tri[0], tri[1]) *
                  cocycle.sign(tables, tri[1], tri[2]) * cocycle.sign(tables, tri[2], tri[0]);
    if (p != 1) throw std::runtime_error("cocycle construction produced wrong face product");
  }
  return cocycle;
}

int link_holonomy(const SignCocycle& cocycle, const SphereMesh& mesh,
                  const MeshTables& tables, int v) {
  int prod = 1;
  for (int k = tables.vt_offset[v]; k < tables.vt_offset[v + 1]; ++k) {
    const auto& tri = mesh.triangles[tables.vt_list[k]];
    int a = -1, b = -1;
    for (int c : tri) {
      if (c == v) continue;
      (a < 0 ? a : b) = c;
    }
    prod *= cocycle.edge_sign[tables.edge_index(a, b)];
  }
  return prod;
}

std::vector<int> link_defects(const SignCocycle& cocycle, const SphereMesh& mesh,
                              const MeshTables& tables) {
  std::vector<char> is_branch(mesh.vertex_count(), 0);
  for (int b : mesh.branch_vertices) is_branch[b] = 1;
  std::vector<int> out;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const int want = is_branch[v] ? -1 : 1;
    if (link_holonomy(cocycle, mesh, tables, v) != want) out.push_back(v);
  }
  return out;
}

std::vector<std::int8_t> gauge_between(const SignCocycle& a, const SignCocycle& b,
                                       const SphereMesh& mesh, const MeshTables& tables) {
  const int nv = mesh.vertex_count();
  std::vector<char> is_branch(nv, 0);
  for (int v : mesh.branch_vertices) is_branch[v] = 1;

  std::vector<std::int8_t> eta(nv, 0);
  std::deque<int> queue;
  for (int seed = 0; seed < nv; ++seed) {
    if (is_branch[seed] || eta[seed] != 0) continue;
    eta[seed] = 1;
    queue.push_back(seed);
    while (!queue.empty()) {
      const int u = queue.front();
      queue.pop_front();
      for (int k = tables.adj_offset[u]; k < tables.adj_offset[u + 1]; ++k) {
        const int w = tables.adj_vertex[k];
        if (is_branch[w]) continue;
        const int e = tables.adj_edge[k];
        const std::int8_t want =
            static_cast<std::int8_t>(eta[u] * a.edge_sign[e] * b.edge_sign[e]);
        if (eta[w] == 0) {
          eta[w] = want;
          queue.push_back(w);
        } else if (eta[w] != want) {
          return {};
        }
      }
    }
  }
  for (int v : mesh.branch_vertices) eta[v] = 1;
  return eta;
}

LiftedSymmetry lift_rotation(const Mat3& rotation, const std::string& label,
                             const SphereMesh& mesh, const MeshTables& tables,
                             const SignCocycle& cocycle, bool flip) {
  const int nv = mesh.vertex_count();
  const VertexLocator locator(mesh.vertices);
  LiftedSymmetry lift;
  lift.group_element_label = label;
  lift.permutation.resize(nv);
  for (int v = 0; v < nv; ++v) {
    const int w = locator.find(rotation * mesh.vertices[v], 1e-9);
    if (w < 0) throw std::runtime_error("mesh is not invariant under the rotation");
    lift.permutation[v] = w;
  }
  // Adjacency and branch-set preservation.
  for (const auto& [u, v] : tables.edges) {
    if (tables.edge_index(lift.permutation[u], lift.permutation[v]) < 0) {
      throw std::runtime_error("rotation permutation does not preserve adjacency");
    }
  }
  std::vector<char> is_branch(nv, 0);
  for (int v : mesh.branch_vertices) is_branch[v] = 1;
  for (int v : mesh.branch_vertices) {
    if (!is_branch[lift.permutation[v]]) {
      throw std::runtime_error("rotation does not preserve the branch set");
    }
  }

  // Transported signs over the punctured mesh: base vertex 0 (first
  // non-branch vertex), base sign +1.
  lift.vertex_sign.assign(nv, 0);
  int base = -1;
  for (int v = 0; v < nv && base < 0; ++v) {
    if (!is_branch[v]) base = v;
  }
  lift.vertex_sign[base] = 1;
  std::deque<int> queue{base};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int k = tables.adj_offset[u]; k < tables.adj_offset[u + 1]; ++k) {
      const int w = tables.adj_vertex[k];
      if (is_branch[w]) continue;
      const int sig = cocycle.edge_sign[tables.adj_edge[k]];
      const int sig_img = cocycle.sign(tables, lift.permutation[u], lift.permutation[w]);
      const std::int8_t want = static_cast<std::int8_t>(lift.vertex_sign[u] * sig * sig_img);
      if (lift.vertex_sign[w] == 0) {
        lift.vertex_sign[w] = want;
        queue.push_back(w);
      } else if (lift.vertex_sign[w] != want) {
        throw std::runtime_error("sign transport inconsistency (invalid cocycle)");
      }
    }
  }
  for (int v : mesh.branch_vertices) lift.vertex_sign[v] = 1;
  if (flip) {
    for (auto& s : lift.vertex_sign) s = static_cast<std::int8_t>(-s);
  }
  return lift;
}

std::vector<LiftedSymmetry> lift_group_action(const BranchedCoverSpec& spec,
                                              const SphereMesh& mesh,
                                              const MeshTables& tables,
                                              const SignCocycle& cocycle) {
  const int order = branch_rotation_order(spec.solid);
  if (order == 0) {
    throw std::invalid_argument("two-points configuration has no finite generator set");
  }
  std::vector<LiftedSymmetry> lifts;
  for (std::size_t b = 0; b < spec.branch_points.size(); ++b) {
    const Mat3 rot = branch_rotation(spec.branch_points[b], order);
    LiftedSymmetry lift =
        lift_rotation(rot, "(-1,a" + std::to_string(b + 1) + ")", mesh, tables, cocycle);
    // Normalize the coset: (-1, a_p)^order must be the deck element, not
    // the identity. Signs at branch vertices are conventional, so test the
    // constant sign of the power at a free vertex.
    LiftedSymmetry power = lift;
    for (int k = 1; k < order; ++k) power = compose(power, lift);
    std::vector<char> is_branch(mesh.vertex_count(), 0);
    for (int v : mesh.branch_vertices) is_branch[v] = 1;
    int base = 0;
    while (is_branch[base]) ++base;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (power.permutation[v] != v) {
        throw std::runtime_error("generator power is not a deck-or-identity lift");
      }
    }
    if (power.vertex_sign[base] == 1) {
      for (auto& s : lift.vertex_sign) s = static_cast<std::int8_t>(-s);
    }
    lifts.push_back(std::move(lift));
  }
  LiftedSymmetry deck;
  deck.group_element_label = "(-1,id)";
  deck.permutation.resize(mesh.vertex_count());
  deck.vertex_sign.assign(mesh.vertex_count(), -1);
  for (int v = 0; v < mesh.vertex_count(); ++v) deck.permutation[v] = v;
  lifts.push_back(std::move(deck));
  return lifts;
}

namespace {

// Branch-polyhedron combinatorics shared by the labeling operations.
struct PolyCombinatorics {
  Polyhedron poly;
  std::vector<std::pair<int, int>> matching;              // cut edges
  std::map<std::pair<int, int>, std::pair<int, int>> edge_faces;  // edge -> two faces
  std::vector<std::vector<int>> vertex_faces;

  explicit PolyCombinatorics(Solid solid) : poly(branch_polyhedron(solid)) {
    for (int f = 0; f < static_cast<int>(poly.faces.size()); ++f) {
      const auto& face = poly.faces[f];
      for (std::size_t k = 0; k < face.size(); ++k) {
        const auto key = std::minmax(face[k], face[(k + 1) % face.size()]);
        auto it = edge_faces.find(key);
        if (it == edge_faces.end()) {
          edge_faces.emplace(key, std::make_pair(f, -1));
        } else {
          it->second.second = f;
        }
      }
    }
    vertex_faces.resize(poly.vertices.size());
    for (int f = 0; f < static_cast<int>(poly.faces.size()); ++f) {
      for (int v : poly.faces[f]) vertex_faces[v].push_back(f);
    }
    matching = perfect_matching();
  }

  // Lexicographically first perfect matching of the 1-skeleton.
  std::vector<std::pair<int, int>> perfect_matching() const {
    const int nv = static_cast<int>(poly.vertices.size());
    std::vector<std::vector<int>> nbr(nv);
    for (const auto& [e, ff] : edge_faces) {
      nbr[e.first].push_back(e.second);
      nbr[e.second].push_back(e.first);
    }
    for (auto& list : nbr) std::sort(list.begin(), list.end());
    std::vector<int> mate(nv, -1);
    std::vector<std::pair<int, int>> out;
    if (!match_rec(0, nbr, mate, out)) throw std::runtime_error("no perfect matching");
    return out;
  }

  static bool match_rec(int v, const std::vector<std::vector<int>>& nbr,
                        std::vector<int>& mate, std::vector<std::pair<int, int>>& out) {
    const int nv = static_cast<int>(nbr.size());
    while (v < nv && mate[v] >= 0) ++v;
    if (v >= nv) return true;
    for (int w : nbr[v]) {
      if (mate[w] >= 0) continue;
      mate[v] = w;
      mate[w] = v;
      out.emplace_back(v, w);
      if (match_rec(v + 1, nbr, mate, out)) return true;
      out.pop_back();
      mate[v] = -1;
      mate[w] = -1;
    }
    return false;
  }

  int sheet_twist(int u, int v) const {
    const auto key = std::minmax(u, v);
    for (const auto& [a, b] : matching) {
      if (std::minmax(a, b) == key) return -1;
    }
    return 1;
  }
};

// A symmetry of the branch polyhedron lifted to cover faces:
// (F, s) -> (face_perm[F], s * sheet_sign[F]).
struct CoverFaceLift {
  std::vector<int> face_perm;
  std::vector<std::int8_t> sheet_sign;
};

CoverFaceLift lift_on_cover_faces(const PolyCombinatorics& pc, const Mat3& rotation) {
  const int nf = static_cast<int>(pc.poly.faces.size());
  std::vector<Vec3> centroids(nf);
  for (int f = 0; f < nf; ++f) {
    Vec3 c = Vec3::Zero();
    for (int v : pc.poly.faces[f]) c += pc.poly.vertices[v];
    centroids[f] = c.normalized();
  }
  CoverFaceLift lift;
  lift.face_perm.assign(nf, -1);
  for (int f = 0; f < nf; ++f) {
    const Vec3 img = rotation * centroids[f];
    for (int g = 0; g < nf; ++g) {
      if ((centroids[g] - img).norm() < 1e-9) lift.face_perm[f] = g;
    }
    if (lift.face_perm[f] < 0) throw std::runtime_error("rotation does not permute faces");
  }
  // Vertex permutation, for transporting the sheet twist across edges.
  const int nv = static_cast<int>(pc.poly.vertices.size());
  std::vector<int> vperm(nv, -1);
  for (int v = 0; v < nv; ++v) {
    const Vec3 img = rotation * pc.poly.vertices[v];
    for (int w = 0; w < nv; ++w) {
      if ((pc.poly.vertices[w] - img).norm() < 1e-9) vperm[v] = w;
    }
    if (vperm[v] < 0) throw std::runtime_error("rotation does not permute vertices");
  }
  // Solve sheet_sign by BFS over face adjacency:
  // sheet_sign[F] * sheet_sign[F'] = twist(e) * twist(rot e).
  lift.sheet_sign.assign(nf, 0);
  lift.sheet_sign[0] = 1;
  std::deque<int> queue{0};
  while (!queue.empty()) {
    const int f = queue.front();
    queue.pop_front();
    const auto& face = pc.poly.faces[f];
    for (std::size_t k = 0; k < face.size(); ++k) {
      const int u = face[k], v = face[(k + 1) % face.size()];
      const auto [fa, fb] = pc.edge_faces.at(std::minmax(u, v));
      const int g = (fa == f) ? fb : fa;
      const std::int8_t want = static_cast<std::int8_t>(
          lift.sheet_sign[f] * pc.sheet_twist(u, v) * pc.sheet_twist(vperm[u], vperm[v]));
      if (lift.sheet_sign[g] == 0) {
        lift.sheet_sign[g] = want;
        queue.push_back(g);
      } else if (lift.sheet_sign[g] != want) {
        throw std::runtime_error("cover face lift inconsistent");
      }
    }
  }
  return lift;
}

CoverFaceLift compose_cover(const CoverFaceLift& g, const CoverFaceLift& h) {
  CoverFaceLift out;
  const int nf = static_cast<int>(g.face_perm.size());
  out.face_perm.resize(nf);
  out.sheet_sign.resize(nf);
  for (int f = 0; f < nf; ++f) {
    out.face_perm[f] = g.face_perm[h.face_perm[f]];
    out.sheet_sign[f] =
        static_cast<std::int8_t>(h.sheet_sign[f] * g.sheet_sign[h.face_perm[f]]);
  }
  return out;
}

bool cover_lift_is_identity(const CoverFaceLift& l) {
  for (std::size_t f = 0; f < l.face_perm.size(); ++f) {
    if (l.face_perm[f] != static_cast<int>(f) || l.sheet_sign[f] != 1) return false;
  }
  return true;
}

bool cover_lift_is_deck(const CoverFaceLift& l) {
  for (std::size_t f = 0; f < l.face_perm.size(); ++f) {
    if (l.face_perm[f] != static_cast<int>(f) || l.sheet_sign[f] != -1) return false;
  }
  return true;
}

}  // namespace

FaceSignLabeling find_face_sign_labeling(const BranchedCoverSpec& spec) {
  if (spec.solid == Solid::TwoPoints) {
    throw std::invalid_argument("face labeling needs a polyhedral branch set");
  }
  const PolyCombinatorics pc(spec.solid);
  const int nf = static_cast<int>(pc.poly.faces.size());

  FaceSignLabeling lab;
  lab.base_face_count = nf;
  lab.cut_edges = pc.matching;
  lab.sign.assign(nf, {0, 0});

  // 2-color cover faces (F, sheet) by BFS; adjacent cover faces must
  // carry opposite signs.
  std::deque<std::pair<int, int>> queue;
  lab.sign[0][0] = 1;
  queue.emplace_back(0, 0);
  auto& sign = lab.sign;
  while (!queue.empty()) {
    const auto [f, s] = queue.front();
    queue.pop_front();
    const auto& face = pc.poly.faces[f];
    for (std::size_t k = 0; k < face.size(); ++k) {
      const int u = face[k], v = face[(k + 1) % face.size()];
      const auto [fa, fb] = pc.edge_faces.at(std::minmax(u, v));
      const int g = (fa == f) ? fb : fa;
      const int s2 = (pc.sheet_twist(u, v) < 0) ? 1 - s : s;
      const std::int8_t want = static_cast<std::int8_t>(-sign[f][s]);
      if (sign[g][s2] == 0) {
        sign[g][s2] = want;
        queue.emplace_back(g, s2);
      } else if (sign[g][s2] != want) {
        throw std::runtime_error("cover face adjacency graph is not bipartite");
      }
    }
  }
  for (int f = 0; f < nf; ++f) {
    if (sign[f][0] == 0 || sign[f][1] == 0) {
      throw std::runtime_error("cover face graph is disconnected");
    }
  }
  return lab;
}

bool equivariant_sector_dimension_check(const BranchedCoverSpec& spec,
                                        const FaceSignLabeling& labeling) {
  const PolyCombinatorics pc(spec.solid);
  const int order = branch_rotation_order(spec.solid);
  const int nf = labeling.base_face_count;
  for (const Vec3& p : spec.branch_points) {
    CoverFaceLift lift = lift_on_cover_faces(pc, branch_rotation(p, order));
    CoverFaceLift power = lift;
    for (int k = 1; k < order; ++k) power = compose_cover(power, lift);
    if (cover_lift_is_identity(power)) {
      for (auto& s : lift.sheet_sign) s = static_cast<std::int8_t>(-s);
    } else if (!cover_lift_is_deck(power)) {
      throw std::runtime_error("cover generator power is neither identity nor deck");
    }
    // The step section built from the labeling must change sign.
    for (int f = 0; f < nf; ++f) {
      for (int s = 0; s < 2; ++s) {
        const int fi = lift.face_perm[f];
        const int si = (lift.sheet_sign[f] < 0) ? 1 - s : s;
        if (labeling.sign[fi][si] != -labeling.sign[f][s]) return false;
      }
    }
  }
  return true;
}

std::string cover_to_json(const BranchedCoverSpec& spec, const SphereMesh* mesh,
                          const MeshTables* tables, const SignCocycle* cocycle) {
  std::ostringstream os;
  os.precision(17);
  os << "{\n  \"schema\": 1,\n  \"solid\": \"" << to_string(spec.solid) << "\",\n";
  os << "  \"group\": \"" << to_string(spec.group_name) << "\",\n";
  if (spec.solid == Solid::TwoPoints) {
    os << "  \"two_point_angle\": " << spec.two_point_angle << ",\n";
  }
  os << "  \"branch_points\": [";
  for (std::size_t i = 0; i < spec.branch_points.size(); ++i) {
    const Vec3& p = spec.branch_points[i];
    os << (i ? ", " : "") << "[" << p.x() << ", " << p.y() << ", " << p.z() << "]";
  }
  os << "],\n  \"cuts\": [";
  for (std::size_t i = 0; i < spec.cuts.size(); ++i) {
    os << (i ? ", " : "") << "[";
    for (std::size_t k = 0; k < spec.cuts[i].size(); ++k) {
      os << (k ? ", " : "") << spec.cuts[i][k];
    }
    os << "]";
  }
  os << "]";
  if (mesh != nullptr && tables != nullptr && cocycle != nullptr) {
    os << ",\n  \"level\": " << mesh->refinement_level << ",\n  \"cocycle\": [";
    for (int e = 0; e < tables->edge_count(); ++e) {
      os << (e ? ", " : "") << "[" << tables->edges[e].first << ", "
         << tables->edges[e].second << ", " << static_cast<int>(cocycle->edge_sign[e])
         << "]";
    }
    os << "]";
  }
  os << "\n}\n";
  return os.str();
}

}  // namespace z2lab
