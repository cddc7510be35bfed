#include "z2lab/constraints.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace z2lab {

Complex stereographic(const Vec3& p) {
  if (1.0 + p.z() < 1e-9) throw std::invalid_argument("stereographic chart fails at the south pole");
  return Complex(p.x(), p.y()) / (1.0 + p.z());
}

ChartFrame chart_frame(const Vec3& p) {
  ChartFrame f;
  f.point = p;
  f.u_p = stereographic(p);
  const double n2 = std::norm(f.u_p);
  f.scale = 2.0 / (1.0 + n2);
  const Complex i(0.0, 1.0);
  const Complex up2 = f.u_p * f.u_p;
  f.L_coeffs[0] = -i * (1.0 - up2) / (1.0 + n2);
  f.L_coeffs[1] = (1.0 + up2) / (1.0 + n2);
  f.L_coeffs[2] = 2.0 * i * f.u_p / (1.0 + n2);
  return f;
}

namespace {

// L-coefficients with the antipodal (u -> infinity along the real axis)
// limit handled explicitly.
std::array<Complex, 3> l_coeffs_of(const Vec3& p) {
  if (1.0 + p.z() < 1e-12) {
    // Limit of (A.15) as u -> infinity on the real axis: (i, 1, 0).
    return {Complex(0.0, 1.0), Complex(1.0, 0.0), Complex(0.0, 0.0)};
  }
  return chart_frame(p).L_coeffs;
}

}  // namespace

double bilinear_sum(const std::vector<Vec3>& points, const std::vector<Complex>& coeffs,
                    const std::vector<int>& multi_index) {
  if (points.size() != coeffs.size()) throw std::invalid_argument("size mismatch");
  if (multi_index.empty() || multi_index.size() % 2 == 0) {
    throw std::invalid_argument("multi-index must have odd length");
  }
  Complex sum(0.0, 0.0);
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto L = l_coeffs_of(points[k]);
    Complex prod = coeffs[k] * coeffs[k];
    for (int idx : multi_index) {
      if (idx < 1 || idx > 3) throw std::invalid_argument("multi-index entries are 1..3");
      prod *= L[idx - 1];
    }
    sum += prod;
  }
  return sum.real();
}

double bilinear_sum_scale(const std::vector<Vec3>& points, const std::vector<Complex>& coeffs,
                          const std::vector<int>& multi_index) {
  double amp = 0.0, lmax = 0.0;
  for (std::size_t k = 0; k < points.size(); ++k) {
    amp += std::norm(coeffs[k]);
    const auto L = l_coeffs_of(points[k]);
    double prod = 1.0;
    for (int idx : multi_index) prod *= std::abs(L[idx - 1]);
    lmax = std::max(lmax, prod);
  }
  return amp * lmax;
}

ObstructionSystem two_point_obstruction(const Vec3& q) {
  if (std::abs(q.z() - 1.0) < 1e-9) throw std::invalid_argument("q coincides with the north pole");
  // Rotate q onto the u > 0 real axis (positive x half-plane through the
  // poles); the north-pole point stays fixed.
  Vec3 qn = q.normalized();
  const double rho = std::hypot(qn.x(), qn.y());
  Vec3 q_axis;
  if (rho < 1e-14) {
    q_axis = qn;  // already polar (antipodal configuration)
  } else {
    q_axis = Vec3(rho, 0.0, qn.z());
  }

  const Vec3 p0(0.0, 0.0, 1.0);
  const auto L0 = l_coeffs_of(p0);
  const auto L1 = l_coeffs_of(q_axis);

  // All length-3 multisets over {1,2,3}.
  std::vector<std::array<int, 3>> multisets;
  for (int a = 1; a <= 3; ++a) {
    for (int b = a; b <= 3; ++b) {
      for (int c = b; c <= 3; ++c) multisets.push_back({a, b, c});
    }
  }

  ObstructionSystem sys;
  sys.matrix.resize(static_cast<int>(multisets.size()), 4);
  for (std::size_t r = 0; r < multisets.size(); ++r) {
    Complex prod0(1.0, 0.0), prod1(1.0, 0.0);
    for (int idx : multisets[r]) {
      prod0 *= L0[idx - 1];
      prod1 *= L1[idx - 1];
    }
    // Re[a^2 (A + iB)] = A Re a^2 - B Im a^2.
    sys.matrix(r, 0) = prod0.real();
    sys.matrix(r, 1) = -prod0.imag();
    sys.matrix(r, 2) = prod1.real();
    sys.matrix(r, 3) = -prod1.imag();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.matrix);
  const auto& sv = svd.singularValues();
  sys.smallest_singular_value = sv[sv.size() - 1];
  const double thresh = 1e-8 * sv[0];
  sys.rank = 0;
  for (int i = 0; i < sv.size(); ++i) {
    if (sv[i] > thresh) ++sys.rank;
  }
  return sys;
}

TetrahedralPatternReport tetrahedral_pattern_check(const std::vector<Complex>& coeffs) {
  if (coeffs.size() != 4) throw std::invalid_argument("need 4 tetrahedral coefficients");
  TetrahedralPatternReport rep;
  double lo = 1e300, hi = 0.0;
  int negatives = 0;
  for (const Complex& a : coeffs) {
    const double n = std::abs(a);
    if (n <= 0.0) throw std::invalid_argument("missing coefficient");
    rep.norms.push_back(n);
    lo = std::min(lo, n);
    hi = std::max(hi, n);
    const Complex a2 = a * a;
    rep.re_a_sq.push_back(a2.real());
    rep.im_a_sq.push_back(a2.imag());
    if (a2.real() < 0.0) ++negatives;
  }
  rep.max_over_min = hi / lo;
  rep.norms_equal_within_5pct = rep.max_over_min < 1.05;
  rep.one_negative_three_positive = (negatives == 1);
  return rep;
}

}  // namespace z2lab
