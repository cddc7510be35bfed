#pragma once

#include <complex>
#include <map>
#include <string>
#include <vector>

#include "z2lab/solids.hpp"

namespace z2lab {

using Complex = std::complex<double>;

/// Normalized stereographic chart data at a point p on S^2: the chart
/// coordinate z = 2/(1+|u_p|^2) (u - u_p) has |dz| = sqrt(2) at p, and
/// L_coeffs holds (L_1 z, L_2 z, L_3 z) at z = 0 for the three rotation
/// generators. Their squares sum to zero.
struct ChartFrame {
  Vec3 point;
  Complex u_p;
  double scale = 0.0;  // 2 / (1 + |u_p|^2)
  std::array<Complex, 3> L_coeffs{};
};

/// Stereographic projection from the south pole, u = (x1 + i x2)/(1 + x3).
Complex stereographic(const Vec3& p);

ChartFrame chart_frame(const Vec3& p);

/// Re sum_p a_p^2 prod_j (L_{idx_j} z)(p) over an odd-length multi-index
/// with entries in {1,2,3}; vanishes for the leading coefficients of an
/// exact eigensection when every local exponent equals (|idx|-1)/2 + 1/2.
double bilinear_sum(const std::vector<Vec3>& points, const std::vector<Complex>& coeffs,
                    const std::vector<int>& multi_index);

/// Scale-free normalization for the sum above: sum |a_p|^2 max_p prod |L|.
double bilinear_sum_scale(const std::vector<Vec3>& points, const std::vector<Complex>& coeffs,
                          const std::vector<int>& multi_index);

struct ObstructionSystem {
  Eigen::MatrixXd matrix;  // rows: length-3 multi-indices; cols: (Re a0^2, Im a0^2, Re a1^2, Im a1^2)
  int rank = 0;
  double smallest_singular_value = 0.0;
};

/// The m = 1 constraint system for a two-point branch set {north pole, q}
/// with q rotated onto the u > 0 real axis. Rank 4 certifies a_0 = a_1 = 0
/// (no admissible k = 1 eigensection); the antipodal limit drops rank.
ObstructionSystem two_point_obstruction(const Vec3& q);

struct TetrahedralPatternReport {
  std::vector<double> norms;             // |a_p| per vertex
  double max_over_min = 0.0;
  std::vector<double> re_a_sq, im_a_sq;  // signs of a_p^2 per vertex
  bool norms_equal_within_5pct = false;
  bool one_negative_three_positive = false;  // sign pattern of Re(a_p^2)
};

TetrahedralPatternReport tetrahedral_pattern_check(const std::vector<Complex>& coeffs);

}  // namespace z2lab
