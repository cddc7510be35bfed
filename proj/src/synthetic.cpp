#include "z2lab/synthetic.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace z2lab {

double quintic_bump(double r, double r_cutoff) {
  if (r <= 0.5 * r_cutoff) return 1.0;
  if (r >= r_cutoff) return 0.0;
  const double t = (r - 0.5 * r_cutoff) / (0.5 * r_cutoff);
  return 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t);
}

// Both sections below use a joint spanning-tree continuation: gauge sign
// via the cocycle and a continued angle along the same tree. The two
// transports realize the same holonomy homomorphism, so the product
// gauge * f(continued angle) is a well-defined twisted section.

TwistedSection synthetic_axial_section(const SphereMesh& mesh, const MeshTables& tables,
                                       const SignCocycle& cocycle, int k, Complex amplitude) {
  if (mesh.solid != Solid::TwoPoints) {
    throw std::invalid_argument("axial synthetic section needs the two-point configuration");
  }
  const Vec3& p0 = mesh.vertices[mesh.branch_vertices[0]];
  const Vec3& p1 = mesh.vertices[mesh.branch_vertices[1]];
  if ((p0 + p1).norm() > 1e-9) {
    throw std::invalid_argument("axial synthetic section needs antipodal branch points");
  }
  const double nu = k + 0.5;
  const int nv = mesh.vertex_count();
  std::vector<char> is_branch(nv, 0);
  for (int v : mesh.branch_vertices) is_branch[v] = 1;

  std::vector<char> visited(nv, 0);
  std::vector<double> angle(nv, 0.0);
  std::vector<double> gauge(nv, 1.0);
  auto principal = [&](int v) { return std::atan2(mesh.vertices[v].y(), mesh.vertices[v].x()); };

  int base = 0;
  while (is_branch[base]) ++base;
  visited[base] = 1;
  angle[base] = principal(base);
  std::deque<int> queue{base};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int t = tables.adj_offset[u]; t < tables.adj_offset[u + 1]; ++t) {
      const int w = tables.adj_vertex[t];
      if (is_branch[w] || visited[w]) continue;
      double d = principal(w) - principal(u);
      if (d > M_PI) d -= 2.0 * M_PI;
      if (d < -M_PI) d += 2.0 * M_PI;
      angle[w] = angle[u] + d;
      gauge[w] = gauge[u] * cocycle.edge_sign[tables.adj_edge[t]];
      visited[w] = 1;
      queue.push_back(w);
    }
  }

  TwistedSection out;
  out.values = Eigen::VectorXd::Zero(nv);
  for (int v = 0; v < nv; ++v) {
    if (is_branch[v] || !visited[v]) continue;
    const double rho = std::hypot(mesh.vertices[v].x(), mesh.vertices[v].y());
    out.values[v] =
        gauge[v] * std::pow(rho, nu) * (amplitude * std::exp(Complex(0, nu * angle[v]))).real();
  }
  return out;
}

TwistedSection synthetic_local_section(const SphereMesh& mesh, const MeshTables& tables,
                                       const SignCocycle& cocycle, int branch_index, int n,
                                       Complex amplitude, double r_cutoff) {
  const int nv = mesh.vertex_count();
  const Vec3 p = mesh.vertices[mesh.branch_vertices[branch_index]];
  const TangentFrame frame = tangent_frame(p);
  const auto& dist = tables.branch_distance[branch_index];
  const double nu = n + 0.5;

  std::vector<char> is_branch(nv, 0);
  for (int v : mesh.branch_vertices) is_branch[v] = 1;
  std::vector<char> in_domain(nv, 0);
  for (int v = 0; v < nv; ++v) {
    in_domain[v] = (!is_branch[v] && dist[v] < r_cutoff) ? 1 : 0;
  }

  auto principal = [&](int v) {
    const Vec3 d = mesh.vertices[v] - p * p.dot(mesh.vertices[v]);
    return std::atan2(d.dot(frame.e2), d.dot(frame.e1));
  };

  std::vector<char> visited(nv, 0);
  std::vector<double> angle(nv, 0.0);
  std::vector<double> gauge(nv, 1.0);
  int base = -1;
  for (int v = 0; v < nv && base < 0; ++v) {
    if (in_domain[v]) base = v;
  }
  if (base < 0) throw std::invalid_argument("cutoff radius leaves no vertices");
  visited[base] = 1;
  angle[base] = principal(base);
  std::deque<int> queue{base};
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    for (int t = tables.adj_offset[u]; t < tables.adj_offset[u + 1]; ++t) {
      const int w = tables.adj_vertex[t];
      if (!in_domain[w] || visited[w]) continue;
      double d = principal(w) - principal(u);
      if (d > M_PI) d -= 2.0 * M_PI;
      if (d < -M_PI) d += 2.0 * M_PI;
      angle[w] = angle[u] + d;
      gauge[w] = gauge[u] * cocycle.edge_sign[tables.adj_edge[t]];
      visited[w] = 1;
      queue.push_back(w);
    }
  }

  TwistedSection out;
  out.values = Eigen::VectorXd::Zero(nv);
  for (int v = 0; v < nv; ++v) {
    if (!visited[v]) continue;
    out.values[v] = gauge[v] * std::pow(dist[v], nu) *
                    (amplitude * std::exp(Complex(0, nu * angle[v]))).real() *
                    quintic_bump(dist[v], r_cutoff);
  }
  return out;
}

}  // namespace z2lab
