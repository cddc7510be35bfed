#include "z2lab/lift.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>

#include "z2lab/local.hpp"

namespace z2lab {

double compute_alpha(double eigenvalue) {
  if (eigenvalue < 0.0) throw std::invalid_argument("eigenvalue must be nonnegative");
  return 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * eigenvalue));
}

double compute_alpha_literal(double eigenvalue) {
  return 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * eigenvalue));
}

namespace {

using Complex2 = std::array<std::complex<double>, 2>;

// The flat Dirac operator D = A1 d1 + A2 d2 + A3 d3 written with constant
// 2x2 complex matrices; A_j A_k + A_k A_j = -2 delta_jk.
using CMat2 = Eigen::Matrix2cd;
std::array<CMat2, 3> dirac_matrices() {
  std::array<CMat2, 3> a;
  const std::complex<double> i(0.0, 1.0);
  a[0] << 0, i, i, 0;
  a[1] << 0, 1, -1, 0;
  a[2] << i, 0, 0, -i;
  return a;
}

Eigen::Vector3d bary(const SphereMesh& mesh, int t, const Vec3& s) {
  const auto& tri = mesh.triangles[t];
  Eigen::Matrix3d M;
  M.col(0) = mesh.vertices[tri[0]];
  M.col(1) = mesh.vertices[tri[1]];
  M.col(2) = mesh.vertices[tri[2]];
  Eigen::Vector3d x = M.fullPivLu().solve(s);
  return x / x.sum();
}

int locate(const SphereMesh& mesh, const MeshTables& tables, const Vec3& s) {
  const double cap = std::cos(std::min(1.0, 5.0 * tables.mean_edge_length));
  for (int t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Vec3 c =
        (mesh.vertices[tri[0]] + mesh.vertices[tri[1]] + mesh.vertices[tri[2]]).normalized();
    if (c.dot(s) < cap) continue;
    if (bary(mesh, t, s).minCoeff() >= -1e-12) return t;
  }
  throw std::runtime_error("no containing triangle found");
}

}  // namespace

struct HomogeneousLift::Patch {
  Vec3 center;      // unit direction
  Vec3 e1, e2;      // tangent frame
  int degree = 3;
  Eigen::VectorXd coeffs;  // monomial coefficients in gnomonic (u, v)

  double eval(const Vec3& direction) const {
    const double dn = direction.dot(center);
    if (dn <= 0.5) throw std::runtime_error("direction left the patch chart");
    const Vec3 t = direction / dn - center;
    const double u = t.dot(e1), v = t.dot(e2);
    double out = 0.0;
    int idx = 0;
    for (int total = 0; total <= degree; ++total) {
      for (int j = 0; j <= total; ++j) {
        out += coeffs[idx++] * std::pow(u, total - j) * std::pow(v, j);
      }
    }
    return out;
  }
};

HomogeneousLift::HomogeneousLift(const SphereMesh& mesh, const MeshTables& tables,
                                 const SignCocycle& cocycle, TwistedSection section,
                                 double alpha, std::complex<double> s1,
                                 std::complex<double> s2)
    : mesh_(mesh), tables_(tables), cocycle_(cocycle), section_(std::move(section)),
      alpha_(alpha), seed_{s1, s2} {
  const double norm = std::sqrt(std::norm(seed_[0]) + std::norm(seed_[1]));
  if (norm < 1e-14) throw std::invalid_argument("spinor seed must be nonzero");
  seed_[0] /= norm;
  seed_[1] /= norm;
}

HomogeneousLift::Patch HomogeneousLift::fit_patch(const Vec3& direction,
                                                  bool alternate_seed) const {
  const int t0 = locate(mesh_, tables_, direction);

  auto local_gauge = [&](int t, int v) -> double {
    const auto& tri = mesh_.triangles[t];
    const int c0 = std::min({tri[0], tri[1], tri[2]});
    return (v == c0) ? 1.0 : cocycle_.sign(tables_, c0, v);
  };

  // Gather a gauge-consistent disk of triangles around the direction.
  double radius = 0.0;
  {
    const auto& tri = mesh_.triangles[t0];
    for (int k = 0; k < 3; ++k) {
      radius = std::max(radius, (mesh_.vertices[tri[k]] - mesh_.vertices[tri[(k + 1) % 3]]).norm());
    }
    radius *= 3.0;
  }

  std::vector<char> is_branch(mesh_.vertex_count(), 0);
  for (int b : mesh_.branch_vertices) is_branch[b] = 1;

  std::map<int, double> vertex_value;  // patch-gauge values
  for (int attempt = 0; attempt < 3; ++attempt) {
    vertex_value.clear();
    std::map<int, double> tri_transport;
    std::deque<int> queue{t0};
    tri_transport[t0] = alternate_seed ? -1.0 : 1.0;
    bool consistent = true;
    while (!queue.empty() && consistent) {
      const int t = queue.front();
      queue.pop_front();
      const double tau = tri_transport.at(t);
      for (int c : mesh_.triangles[t]) {
        if (is_branch[c]) {
          throw std::invalid_argument("point too close to the ray set");
        }
        const double val = tau * local_gauge(t, c) * section_.values[c];
        auto [it, inserted] = vertex_value.emplace(c, val);
        if (!inserted && std::abs(it->second - val) > 1e-9 * (1.0 + std::abs(val))) {
          consistent = false;
        }
      }
      for (int k = 0; k < 3; ++k) {
        const int nb = tables_.triangle_neighbor[t][k];
        if (nb < 0 || tri_transport.count(nb)) continue;
        const auto& trin = mesh_.triangles[nb];
        const Vec3 c = (mesh_.vertices[trin[0]] + mesh_.vertices[trin[1]] +
                        mesh_.vertices[trin[2]])
                           .normalized();
        if ((c - direction).norm() > radius) continue;
        const int shared = mesh_.triangles[t][(k + 1) % 3];
        tri_transport[nb] = tau * local_gauge(t, shared) * local_gauge(nb, shared);
        queue.push_back(nb);
      }
    }
    if (!consistent) throw std::invalid_argument("point too close to the ray set");
    if (vertex_value.size() >= 12) break;
    radius *= 1.5;
  }

  Patch patch;
  patch.center = direction;
  // Deterministic tangent frame.
  Vec3 up = (std::abs(direction.z()) < 0.9) ? Vec3(0, 0, 1) : Vec3(1, 0, 0);
  patch.e1 = (up - direction * direction.dot(up)).normalized();
  patch.e2 = direction.cross(patch.e1);
  patch.degree = (vertex_value.size() >= 14) ? 3 : 2;
  const int nb = (patch.degree + 1) * (patch.degree + 2) / 2;

  Eigen::MatrixXd A(vertex_value.size(), nb);
  Eigen::VectorXd b(vertex_value.size());
  int row = 0;
  for (const auto& [v, val] : vertex_value) {
    const Vec3& p = mesh_.vertices[v];
    const double dn = p.dot(direction);
    if (dn <= 0.3) throw std::runtime_error("patch too wide for the gnomonic chart");
    const Vec3 t = p / dn - direction;
    const double u = t.dot(patch.e1), w = t.dot(patch.e2);
    const double dist2 = t.squaredNorm();
    const double weight = std::exp(-dist2 / (radius * radius));
    int idx = 0;
    for (int total = 0; total <= patch.degree; ++total) {
      for (int j = 0; j <= total; ++j) {
        A(row, idx++) = weight * std::pow(u, total - j) * std::pow(w, j);
      }
    }
    b[row] = weight * val;
    ++row;
  }
  patch.coeffs = A.colPivHouseholderQr().solve(b);
  return patch;
}

double HomogeneousLift::potential(const Vec3& x) const {
  const double r = x.norm();
  if (r < 0.2 || r > 5.0) throw std::invalid_argument("|x| outside (0.2, 5)");
  const Patch patch = fit_patch(x / r, false);
  return std::pow(r, alpha_) * patch.eval(x / r);
}

double HomogeneousLift::potential_alternate_gauge(const Vec3& x) const {
  const double r = x.norm();
  if (r < 0.2 || r > 5.0) throw std::invalid_argument("|x| outside (0.2, 5)");
  const Patch patch = fit_patch(x / r, true);
  return std::pow(r, alpha_) * patch.eval(x / r);
}

HomogeneousLift::Value HomogeneousLift::evaluate(const Vec3& x) const {
  const double r = x.norm();
  if (r < 0.2 || r > 5.0) throw std::invalid_argument("|x| outside (0.2, 5)");
  const Patch patch = fit_patch(x / r, false);

  auto phi = [&](const Vec3& y) {
    const double ry = y.norm();
    return std::pow(ry, alpha_) * patch.eval(y / ry);
  };
  const double h = 1e-4 * r;
  auto grad = [&](const Vec3& y) {
    Vec3 g;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e[i] = h;
      g[i] = (phi(y + e) - phi(y - e)) / (2.0 * h);
    }
    return g;
  };
  const auto A = dirac_matrices();
  auto spinor_at = [&](const Vec3& y) {
    const Vec3 g = grad(y);
    Eigen::Vector2cd s0(seed_[0], seed_[1]);
    Eigen::Vector2cd s = Eigen::Vector2cd::Zero();
    for (int k = 0; k < 3; ++k) s += A[k] * s0 * g[k];
    return s;
  };

  Value out;
  out.potential = phi(x);
  const Vec3 v0 = grad(x);
  out.one_form = v0;
  const Eigen::Vector2cd s_here = spinor_at(x);
  out.spinor = {s_here[0], s_here[1]};

  // Second-level centered differences of the v and s fields.
  const double H = 1e-3 * r;
  Vec3 vp[3], vm[3];
  Eigen::Vector2cd sp[3], sm[3];
  for (int i = 0; i < 3; ++i) {
    Vec3 e = Vec3::Zero();
    e[i] = H;
    vp[i] = grad(x + e);
    vm[i] = grad(x - e);
    sp[i] = spinor_at(x + e);
    sm[i] = spinor_at(x - e);
  }
  double div = 0.0;
  for (int i = 0; i < 3; ++i) div += (vp[i][i] - vm[i][i]) / (2.0 * H);
  out.divergence_residual = std::abs(div) * r;

  double curl = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double dij = (vp[i][j] - vm[i][j]) / (2.0 * H);
      const double dji = (vp[j][i] - vm[j][i]) / (2.0 * H);
      curl = std::max(curl, std::abs(dij - dji));
    }
  }
  out.curl_residual = curl * r;

  Eigen::Vector2cd ds = Eigen::Vector2cd::Zero();
  for (int k = 0; k < 3; ++k) ds += A[k] * (sp[k] - sm[k]) / (2.0 * H);
  out.dirac_residual = ds.norm() * r;
  return out;
}

HarmonicReport verify_harmonic(const HomogeneousLift& lift, const SphereMesh& mesh,
                               const MeshTables& tables, int sample_count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double min_angle = std::max(0.12, 5.0 * tables.mean_edge_length);

  HarmonicReport report;
  int tries = 0;
  while (report.samples < sample_count && tries < sample_count * 200) {
    ++tries;
    Vec3 d(gauss(rng), gauss(rng), gauss(rng));
    if (d.norm() < 1e-9) continue;
    d.normalize();
    bool ok = true;
    for (int b : mesh.branch_vertices) {
      if (std::acos(std::clamp(d.dot(mesh.vertices[b]), -1.0, 1.0)) < min_angle) ok = false;
    }
    if (!ok) continue;
    HomogeneousLift::Value val;
    try {
      val = lift.evaluate(d);
    } catch (const std::invalid_argument&) {
      continue;
    }
    report.max_curl = std::max(report.max_curl, val.curl_residual);
    report.max_divergence = std::max(report.max_divergence, val.divergence_residual);
    report.max_dirac = std::max(report.max_dirac, val.dirac_residual);
    report.field_scale = std::max(report.field_scale, val.one_form.norm());
    ++report.samples;
  }
  if (report.samples < sample_count) {
    throw std::runtime_error("could not place the requested sample count away from the rays");
  }
  return report;
}

}  // namespace z2lab
