#include "doctest.h"
#include "z2lab/constraints.hpp"
#include "z2lab/solids.hpp"

#include <cmath>
#include <random>

using namespace z2lab;

TEST_CASE("stereographic projection hits the tabulated values") {
  CHECK(std::abs(stereographic(Vec3(0, 0, 1)) - Complex(0, 0)) < 1e-15);
  CHECK(std::abs(stereographic(Vec3(1, 0, 0)) - Complex(1, 0)) < 1e-15);
  CHECK(std::abs(stereographic(Vec3(0, 1, 0)) - Complex(0, 1)) < 1e-15);
  CHECK_THROWS_AS(stereographic(Vec3(0, 0, -1)), std::invalid_argument);
}

TEST_CASE("chart frame L-coefficients match the closed forms") {
  const ChartFrame north = chart_frame(Vec3(0, 0, 1));  // u_p = 0
  CHECK(std::abs(north.L_coeffs[0] - Complex(0, -1)) < 1e-14);
  CHECK(std::abs(north.L_coeffs[1] - Complex(1, 0)) < 1e-14);
  CHECK(std::abs(north.L_coeffs[2]) < 1e-14);

  const ChartFrame xaxis = chart_frame(Vec3(1, 0, 0));  // u_p = 1
  CHECK(std::abs(xaxis.L_coeffs[0]) < 1e-14);
  CHECK(std::abs(xaxis.L_coeffs[1] - Complex(1, 0)) < 1e-14);
  CHECK(std::abs(xaxis.L_coeffs[2] - Complex(0, 1)) < 1e-14);
}

TEST_CASE("null identity at a thousand random points") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 1000; ++trial) {
    Vec3 p(gauss(rng), gauss(rng), gauss(rng));
    if (p.norm() < 1e-6 || 1.0 + p.normalized().z() < 1e-3) continue;
    const ChartFrame f = chart_frame(p.normalized());
    Complex sum(0, 0);
    for (const Complex& l : f.L_coeffs) sum += l * l;
    CHECK(std::abs(sum) < 1e-13);
  }
}

TEST_CASE("bilinear sum validates inputs") {
  const std::vector<Vec3> pts = {Vec3(0, 0, 1)};
  const std::vector<Complex> coeffs = {Complex(1, 0)};
  CHECK_THROWS_AS(bilinear_sum(pts, coeffs, {1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(bilinear_sum(pts, coeffs, {4}), std::invalid_argument);
  CHECK_THROWS_AS(bilinear_sum(pts, {}, {3}), std::invalid_argument);
}

TEST_CASE("length-one relation kills the L3 term at the north pole") {
  // Part 5: relations with index 3 involve only the u > 0 point because
  // L_3 z = 0 at u = 0.
  const std::vector<Vec3> pts = {Vec3(0, 0, 1), Vec3(0.6, 0, 0.8)};
  const std::vector<Complex> north_only = {Complex(1.2, -0.4), Complex(0, 0)};
  CHECK(bilinear_sum(pts, north_only, {3}) == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("generic coefficients violate the tetrahedral relations") {
  const Polyhedron tetra = branch_polyhedron(Solid::Tetrahedron);
  const std::vector<Complex> ones(4, Complex(1.0, 0.0));
  double biggest = 0.0;
  for (int a = 1; a <= 3; ++a) {
    for (int b = a; b <= 3; ++b) {
      for (int c = b; c <= 3; ++c) {
        const std::vector<int> idx = {a, b, c};
        const double val = std::abs(bilinear_sum(tetra.vertices, ones, idx));
        const double scale = bilinear_sum_scale(tetra.vertices, ones, idx);
        biggest = std::max(biggest, val / scale);
      }
    }
  }
  CHECK(biggest > 0.05);  // the a_p = 1 control stays away from zero
}

TEST_CASE("rotational covariance of the bilinear sums for analytic inputs") {
  // Under a common rotation R the frame coefficients obey
  // L(z_new)(Rp) = phase(p) * R * L(z_old)(p), and a coefficient of
  // Re(a z^{k+1/2}) transforms by phase^{-(k+1/2)}. In a length (2k+1)
  // relation the phases cancel, leaving pure tensor rotation:
  // T'_{abc} = sum R_{aa'} R_{bb'} R_{cc'} T_{a'b'c'} with
  // T_{abc} = sum_p a_p^2 (L_a z L_b z L_c z)(p).
  const Vec3 p0(0, 0, 1);
  const Vec3 p1 = Vec3(0.3, -0.5, 0.81).normalized();
  const std::vector<Vec3> pts = {p0, p1};
  const std::vector<Complex> coeffs = {Complex(0.9, 0.2), Complex(-0.3, 1.1)};
  const Mat3 rot = rotation_about(Vec3(0.2, 0.9, 0.4).normalized(), 0.83);

  auto tensor = [](const std::vector<Vec3>& points, const std::vector<Complex>& cs) {
    std::array<std::array<std::array<Complex, 3>, 3>, 3> t{};
    for (std::size_t k = 0; k < points.size(); ++k) {
      const auto L = chart_frame(points[k]).L_coeffs;
      for (int a = 0; a < 3; ++a) {
        for (int b = 0; b < 3; ++b) {
          for (int c = 0; c < 3; ++c) t[a][b][c] += cs[k] * cs[k] * L[a] * L[b] * L[c];
        }
      }
    }
    return t;
  };

  // Exact chart-transition phase from the frame covariance itself.
  std::vector<Vec3> rot_pts = {rot * p0, rot * p1};
  std::vector<Complex> rot_coeffs(2);
  for (int k = 0; k < 2; ++k) {
    const auto L_old = chart_frame(pts[k]).L_coeffs;
    const auto L_new = chart_frame(rot_pts[k]).L_coeffs;
    Eigen::Vector3cd lo(L_old[0], L_old[1], L_old[2]);
    Eigen::Vector3cd ln(L_new[0], L_new[1], L_new[2]);
    const Eigen::Vector3cd back = rot.transpose().cast<Complex>() * ln;
    int best = 0;
    for (int b = 1; b < 3; ++b) {
      if (std::abs(lo[b]) > std::abs(lo[best])) best = b;
    }
    const Complex phase = back[best] / lo[best];
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-12);
    // Any branch of the half power works: the square kills the sign.
    rot_coeffs[k] = coeffs[k] * std::pow(phase, -1.5);
  }

  const auto t_old = tensor(pts, coeffs);
  const auto t_new = tensor(rot_pts, rot_coeffs);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 3; ++c) {
        Complex acc(0, 0);
        for (int i = 0; i < 3; ++i) {
          for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
              acc += rot(a, i) * rot(b, j) * rot(c, k) * t_old[i][j][k];
            }
          }
        }
        worst = std::max(worst, std::abs(t_new[a][b][c] - acc));
      }
    }
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("two-point obstruction: rank four away from the antipode") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  while (checked < 50) {
    Vec3 q(u(rng), u(rng), u(rng));
    if (q.norm() < 1e-3) continue;
    q.normalize();
    if ((q - Vec3(0, 0, -1)).norm() < 0.1) continue;  // keep away from antipodal
    if (std::abs(q.z() - 1.0) < 1e-6) continue;
    const ObstructionSystem sys = two_point_obstruction(q);
    CHECK(sys.rank == 4);
    ++checked;
  }
}

TEST_CASE("two-point obstruction drops rank in the antipodal limit") {
  const ObstructionSystem anti = two_point_obstruction(Vec3(0, 0, -1));
  CHECK(anti.rank < 4);
  double prev = 1e9;
  for (double off : {0.5, 0.2, 0.08, 0.03}) {
    const Vec3 q = Vec3(std::sin(M_PI - off), 0.0, std::cos(M_PI - off));
    const ObstructionSystem sys = two_point_obstruction(q);
    CHECK(sys.smallest_singular_value < prev);
    prev = sys.smallest_singular_value;
  }
  CHECK(prev < 1e-2);
}

TEST_CASE("u = 1 makes the (3,3,1) relation vacuous") {
  const Vec3 q(1, 0, 0);  // u_q = 1
  const auto L = chart_frame(q).L_coeffs;
  CHECK(std::abs(L[2] * L[2] * L[0]) < 1e-14);  // row would vanish
  const ObstructionSystem sys = two_point_obstruction(q);
  CHECK(sys.rank == 4);  // remaining rows still certify the obstruction
}

TEST_CASE("tetrahedral pattern check flags unequal amplitudes") {
  const std::vector<Complex> good = {Complex(0, 0.7), Complex(0.7, 0), Complex(-0.7, 0),
                                     Complex(0.699, 0.01)};
  const auto rep = tetrahedral_pattern_check(good);
  CHECK(rep.norms_equal_within_5pct);
  CHECK(rep.one_negative_three_positive);

  std::vector<Complex> bad = good;
  bad[2] *= 2.0;
  CHECK_FALSE(tetrahedral_pattern_check(bad).norms_equal_within_5pct);
}
