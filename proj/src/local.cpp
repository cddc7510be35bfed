#include "z2lab/local.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace z2lab {

namespace {

// Inverse stereographic projection (from the south pole), Eq.-style
// u = (x1 + i x2) / (1 + x3).
Vec3 from_stereographic(const Complex& u) {
  const double n2 = std::norm(u);
  return Vec3(2.0 * u.real(), 2.0 * u.imag(), 1.0 - n2) / (1.0 + n2);
}

}  // namespace

TangentFrame tangent_frame(const Vec3& p) {
  TangentFrame f;
  if (1.0 + p.z() > 1e-9) {
    const Complex up((p.x()) / (1.0 + p.z()), (p.y()) / (1.0 + p.z()));
    // Push the chart axis directions through the inverse projection.
    const double eps = 1e-6;
    const Vec3 base = from_stereographic(up);
    f.e1 = (from_stereographic(up + eps) - base) / eps;
    f.e2 = (from_stereographic(up + Complex(0, eps)) - base) / eps;
    f.e1 -= p * p.dot(f.e1);
    f.e1.normalize();
    f.e2 -= p * (p.dot(f.e2));
    f.e2 -= f.e1 * f.e1.dot(f.e2);
    f.e2.normalize();
    f.description = "stereographic chart axes at u_p";
  } else {
    // South pole: conjugate the chart by the half turn about the x axis.
    f.e1 = Vec3(1, 0, 0);
    f.e2 = Vec3(0, -1, 0);
    f.description = "south pole frame (x-axis half-turn conjugate)";
  }
  return f;
}

namespace {

// Barycentric coordinates of the radial projection of direction s onto
// the flat triangle t (positive scale factor dropped).
Eigen::Vector3d radial_barycentric(const SphereMesh& mesh, int t, const Vec3& s) {
  const auto& tri = mesh.triangles[t];
  Eigen::Matrix3d M;
  M.col(0) = mesh.vertices[tri[0]];
  M.col(1) = mesh.vertices[tri[1]];
  M.col(2) = mesh.vertices[tri[2]];
  Eigen::Vector3d x = M.fullPivLu().solve(s);
  const double sum = x.sum();
  if (std::abs(sum) < 1e-14) throw std::runtime_error("degenerate barycentric solve");
  return x / sum;
}

struct Walker {
  const SphereMesh& mesh;
  const MeshTables& tables;
  const SignCocycle& cocycle;
  int triangle = -1;
  double transport = 1.0;  // cumulative gauge factor into current triangle

  // Local gauge of vertex c within triangle t: +1 at the lowest-index
  // corner, cocycle signs to the others. Requires face sign product +1.
  double local_gauge(int t, int v) const {
    const auto& tri = mesh.triangles[t];
    const int c0 = std::min({tri[0], tri[1], tri[2]});
    if (v == c0) return 1.0;
    return cocycle.sign(tables, c0, v);
  }

  void check_face(int t) const {
    const auto& tri = mesh.triangles[t];
    const int p = cocycle.sign(tables, tri[0], tri[1]) * cocycle.sign(tables, tri[1], tri[2]) *
                  cocycle.sign(tables, tri[2], tri[0]);
    if (p != 1) {
      throw std::runtime_error("circle sampling touched a branch corner (radius too small)");
    }
  }

  // Walks from the current triangle to the one containing direction s,
  // accumulating the gauge transport across each crossed edge.
  Eigen::Vector3d walk_to(const Vec3& s) {
    for (int step = 0; step < 256; ++step) {
      const Eigen::Vector3d b = radial_barycentric(mesh, triangle, s);
      int worst = 0;
      for (int c = 1; c < 3; ++c) {
        if (b[c] < b[worst]) worst = c;
      }
      if (b[worst] >= -1e-13) return b.cwiseMax(0.0);
      const int next = tables.triangle_neighbor[triangle][worst];
      if (next < 0) throw std::runtime_error("walk left the mesh");
      check_face(next);
      // Transport across the shared edge via a common vertex.
      const auto& tri = mesh.triangles[triangle];
      const int shared = tri[(worst + 1) % 3];
      transport *= local_gauge(triangle, shared) * local_gauge(next, shared);
      triangle = next;
    }
    throw std::runtime_error("triangle walk did not terminate");
  }
};

// Largest edge length among edges near the geodesic circle of radius r
// about the branch point (the meshes are graded: triangles near the
// branch corners are much smaller than the global mean).
double local_edge_cap(const SphereMesh& mesh, const MeshTables& tables, int branch_index,
                      double r) {
  const auto& dist = tables.branch_distance[branch_index];
  double cap = 0.0;
  for (const auto& [u, v] : tables.edges) {
    const double len = (mesh.vertices[u] - mesh.vertices[v]).norm();
    const double lo = std::min(dist[u], dist[v]) - 0.2 * len;
    const double hi = std::max(dist[u], dist[v]) + 0.2 * len;
    if (r >= lo && r <= hi) cap = std::max(cap, len);
  }
  return cap;
}

int locate_triangle(const SphereMesh& mesh, const MeshTables& tables, const Vec3& s) {
  const double cap = std::cos(std::min(1.0, 4.0 * tables.mean_edge_length));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3 c = (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]])
                       .normalized();
    if (c.dot(s) < cap) continue;
    const Eigen::Vector3d b = radial_barycentric(mesh, t, s);
    if (b.minCoeff() >= -1e-12) return t;
  }
  throw std::runtime_error("no containing triangle found");
}

}  // namespace

CircleSampling sample_circle(const SphereMesh& mesh, const MeshTables& tables,
                             const SignCocycle& cocycle, int branch_index, double r,
                             int sample_count, double frame_rotation) {
  if (branch_index < 0 || branch_index >= static_cast<int>(mesh.branch_vertices.size())) {
    throw std::invalid_argument("branch index out of range");
  }
  if (r < 3.0 * local_edge_cap(mesh, tables, branch_index, r)) {
    throw std::invalid_argument("circle radius too small for this mesh (< 3 edge lengths)");
  }
  const Vec3 p = mesh.vertices[mesh.branch_vertices[branch_index]];
  for (std::size_t b = 0; b < mesh.branch_vertices.size(); ++b) {
    if (static_cast<int>(b) == branch_index) continue;
    const double sep = std::acos(
        std::clamp(p.dot(mesh.vertices[mesh.branch_vertices[b]]), -1.0, 1.0));
    if (r > sep / 4.0) {
      throw std::invalid_argument("circle radius exceeds a quarter of the branch separation");
    }
  }

  CircleSampling out;
  out.radius = r;
  out.frame = tangent_frame(p);
  if (frame_rotation != 0.0) {
    const Vec3 e1 = std::cos(frame_rotation) * out.frame.e1 + std::sin(frame_rotation) * out.frame.e2;
    const Vec3 e2 = -std::sin(frame_rotation) * out.frame.e1 + std::cos(frame_rotation) * out.frame.e2;
    out.frame.e1 = e1;
    out.frame.e2 = e2;
  }
  auto point_at = [&](double theta) {
    return (std::cos(r) * p +
            std::sin(r) * (std::cos(theta) * out.frame.e1 + std::sin(theta) * out.frame.e2))
        .normalized();
  };

  // A fixed fractional offset keeps samples away from mesh edges so the
  // loop closure lands back in the starting triangle.
  const double offset = 0.37 / sample_count;
  auto theta_of = [&](int k) { return 2.0 * M_PI * (static_cast<double>(k) / sample_count + offset); };

  Walker walker{mesh, tables, cocycle, locate_triangle(mesh, tables, point_at(theta_of(0))), 1.0};
  walker.check_face(walker.triangle);

  // March in sub-steps small enough that the straight walk between
  // consecutive targets stays local.
  const double circumference = 2.0 * M_PI * std::sin(r);
  const int substeps = std::max(
      1, static_cast<int>(std::ceil(circumference / (sample_count * 0.5 * tables.mean_edge_length))));

  out.samples.reserve(sample_count);
  for (int k = 0; k < sample_count; ++k) {
    const double theta = theta_of(k);
    if (k > 0) {
      const double prev = theta_of(k - 1);
      for (int s = 1; s < substeps; ++s) {
        walker.walk_to(point_at(prev + (theta - prev) * s / substeps));
      }
    }
    const Eigen::Vector3d b = walker.walk_to(point_at(theta));
    CircleSample smp;
    smp.theta = theta;
    smp.triangle = walker.triangle;
    const auto& tri = mesh.triangles[walker.triangle];
    for (int c = 0; c < 3; ++c) {
      smp.vertices[c] = tri[c];
      smp.transported_weight[c] = b[c] * walker.transport * walker.local_gauge(walker.triangle, tri[c]);
    }
    out.samples.push_back(smp);
  }

  // Close the loop: the cumulative transport over a full turn must be -1.
  const int start_triangle = out.samples.front().triangle;
  const double last = theta_of(sample_count - 1);
  const double full = theta_of(sample_count);
  for (int s = 1; s <= substeps; ++s) {
    walker.walk_to(point_at(last + (full - last) * s / substeps));
  }
  if (walker.triangle != start_triangle || walker.transport != -1.0) {
    throw std::runtime_error("circle transport inconsistency (holonomy not -1)");
  }
  return out;
}

double interpolate(const CircleSample& sample, const Eigen::VectorXd& values) {
  double v = 0.0;
  for (int c = 0; c < 3; ++c) v += sample.transported_weight[c] * values[sample.vertices[c]];
  return v;
}

std::map<int, Complex> circle_modes(const TwistedSection& section, const SphereMesh& mesh,
                                    const MeshTables& tables, const SignCocycle& cocycle,
                                    int branch_index, double r, int n_max,
                                    double frame_rotation) {
  const int count = 8 * (n_max + 1);
  const CircleSampling circle =
      sample_circle(mesh, tables, cocycle, branch_index, r, count, frame_rotation);
  std::map<int, Complex> modes;
  for (int n = 0; n <= n_max; ++n) {
    const double nu = n + 0.5;
    Complex acc(0.0, 0.0);
    for (const auto& smp : circle.samples) {
      acc += interpolate(smp, section.values) *
             Complex(std::cos(nu * smp.theta), -std::sin(nu * smp.theta));
    }
    modes[n] = acc * (2.0 / count);
  }
  return modes;
}

std::vector<int> allowed_residues(int rotation_order) {
  if (rotation_order != 3 && rotation_order != 5) {
    throw std::invalid_argument("supported rotation orders are 3 and 5");
  }
  std::vector<int> out;
  for (int n = 0; n < rotation_order; ++n) {
    if ((2 * n + 1 - rotation_order) % (2 * rotation_order) == 0) out.push_back(n);
  }
  return out;
}

std::vector<double> default_radii(const SphereMesh& mesh, const MeshTables& tables, int count) {
  double min_sep = M_PI;
  const auto& bv = mesh.branch_vertices;
  for (std::size_t a = 0; a < bv.size(); ++a) {
    for (std::size_t b = a + 1; b < bv.size(); ++b) {
      min_sep = std::min(min_sep, std::acos(std::clamp(
                                      mesh.vertices[bv[a]].dot(mesh.vertices[bv[b]]), -1.0, 1.0)));
    }
  }
  // Schedule r0 * 2^{-j/2}, kept inside the sampling preconditions
  // (below a quarter separation, above 3 local edge lengths).
  const double r0 = min_sep / 3.0;
  std::vector<double> radii;
  for (int j = 0; static_cast<int>(radii.size()) < count && j < 2 * count + 10; ++j) {
    const double r = r0 * std::pow(2.0, -0.5 * j);
    if (r > 0.999 * min_sep / 4.0) continue;
    if (r < 3.0 * local_edge_cap(mesh, tables, 0, r)) continue;
    radii.push_back(r);
  }
  if (radii.size() < 4) {
    throw std::invalid_argument("mesh too coarse for the radius schedule (need 4 radii)");
  }
  return radii;
}

LocalExpansion analyze_branch_point(const TwistedSection& section, const SphereMesh& mesh,
                                    const MeshTables& tables, const SignCocycle& cocycle,
                                    int branch_index, int n_max,
                                    const std::vector<double>* radii_in) {
  LocalExpansion out;
  out.branch_index = branch_index;
  out.point = mesh.vertices[mesh.branch_vertices[branch_index]];
  out.radii = radii_in ? *radii_in : default_radii(mesh, tables);
  out.frame = tangent_frame(out.point).description;
  for (double r : out.radii) {
    const auto modes = circle_modes(section, mesh, tables, cocycle, branch_index, r, n_max);
    for (const auto& [n, c] : modes) out.mode_coeffs[{r, n}] = c;
  }
  fit_exponent(out);
  return out;
}

void fit_exponent(LocalExpansion& expansion) {
  if (expansion.radii.size() < 4) throw std::invalid_argument("need at least 4 radii");
  const double span = expansion.radii.front() / expansion.radii.back();
  if (span < 2.0) throw std::invalid_argument("radii must span at least a factor of 2");

  // Dominant mode: largest amplitude at the smallest radius.
  const double r_min = *std::min_element(expansion.radii.begin(), expansion.radii.end());
  int dominant = 0;
  double best = -1.0;
  for (const auto& [key, c] : expansion.mode_coeffs) {
    if (key.first == r_min && std::abs(c) > best) {
      best = std::abs(c);
      dominant = key.second;
    }
  }
  if (best < 1e-10) throw std::runtime_error("dominant mode amplitude below noise floor");
  expansion.dominant_mode = dominant;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const int n = static_cast<int>(expansion.radii.size());
  for (double r : expansion.radii) {
    const double a = std::abs(expansion.mode_coeffs.at({r, dominant}));
    if (a < 1e-14) throw std::runtime_error("dominant mode amplitude below noise floor");
    const double x = std::log(r), y = std::log(a);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double intercept = (sy - slope * sx) / n;
  expansion.fitted_exponent = slope;
  double resid = 0.0;
  for (double r : expansion.radii) {
    const double a = std::abs(expansion.mode_coeffs.at({r, dominant}));
    resid = std::max(resid, std::abs(std::log(a) - (intercept + slope * std::log(r))));
  }
  expansion.fit_residual = resid;
  expansion.leading_coeff =
      expansion.mode_coeffs.at({r_min, dominant}) / std::pow(r_min, slope);
}

double differential_exponent(const TwistedSection& section, const SphereMesh& mesh,
                             const MeshTables& tables, const SignCocycle& cocycle,
                             int branch_index, const std::vector<double>& radii) {
  if (radii.size() < 4) throw std::invalid_argument("need at least 4 radii");

  // Per-triangle gradient magnitude of the linear interpolant (gauge
  // independent).
  auto triangle_gradient_norm = [&](int t) {
    const auto& tri = mesh.triangles[t];
    const int c0 = std::min({tri[0], tri[1], tri[2]});
    const Vec3& a = mesh.vertices[tri[0]];
    const Vec3& b = mesh.vertices[tri[1]];
    const Vec3& c = mesh.vertices[tri[2]];
    const Vec3 n = (b - a).cross(c - a);
    const double area2 = n.norm();
    Vec3 grad = Vec3::Zero();
    for (int k = 0; k < 3; ++k) {
      const int v = tri[k];
      const double gauge = (v == c0) ? 1.0 : cocycle.sign(tables, c0, v);
      // Gradient of the hat function of corner k inside the flat triangle:
      // n x e_k / |n|^2 with e_k the opposite edge.
      const Vec3 edge = mesh.vertices[tri[(k + 2) % 3]] - mesh.vertices[tri[(k + 1) % 3]];
      grad += gauge * section.values[v] * n.cross(edge) / (area2 * area2);
    }
    return grad.norm();
  };

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double r : radii) {
    const CircleSampling circle = sample_circle(mesh, tables, cocycle, branch_index, r, 64);
    double mean = 0.0;
    for (const auto& smp : circle.samples) mean += triangle_gradient_norm(smp.triangle);
    mean /= static_cast<double>(circle.samples.size());
    if (mean < 1e-12) throw std::runtime_error("gradient magnitude below noise floor");
    sx += std::log(r);
    sy += std::log(mean);
    sxx += std::log(r) * std::log(r);
    sxy += std::log(r) * std::log(mean);
  }
  const int n = static_cast<int>(radii.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double out_of_residue_energy_fraction(const TwistedSection& section, const SphereMesh& mesh,
                                      const MeshTables& tables, const SignCocycle& cocycle,
                                      int branch_index, int rotation_order, int n_max,
                                      const std::vector<double>& radii) {
  const std::vector<int> residues = allowed_residues(rotation_order);
  auto allowed = [&](int n) {
    const int r = ((n % rotation_order) + rotation_order) % rotation_order;
    return std::find(residues.begin(), residues.end(), r) != residues.end();
  };
  double in = 0.0, total = 0.0;
  for (double r : radii) {
    const auto modes = circle_modes(section, mesh, tables, cocycle, branch_index, r, n_max);
    for (const auto& [n, c] : modes) {
      const double e = std::norm(c);
      total += e;
      if (allowed(n)) in += e;
    }
  }
  if (total <= 0.0) throw std::runtime_error("no circle-mode energy found");
  return (total - in) / total;
}

}  // namespace z2lab
