#pragma once

#include <array>
#include <complex>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "z2lab/spectral.hpp"

namespace z2lab {

using Complex = std::complex<double>;

/// Orthonormal tangent frame at p aligned with the axes of the normalized
/// stereographic chart centered at p (|dz| = sqrt(2) there). For the south
/// pole the frame of the x-axis half-turn conjugate chart is used.
struct TangentFrame {
  Vec3 e1;
  Vec3 e2;
  std::string description;
};

TangentFrame tangent_frame(const Vec3& p);

/// One interpolation stencil on a geodesic circle: the sampled value is
/// sum_c transported_weight[c] * f(vertices[c]), expressed in a gauge that
/// is continuous along the circle (antiperiodic over a full turn).
struct CircleSample {
  double theta = 0.0;
  int triangle = -1;
  std::array<int, 3> vertices{};
  std::array<double, 3> transported_weight{};
};

struct CircleSampling {
  std::vector<CircleSample> samples;
  double radius = 0.0;
  TangentFrame frame;
};

/// Equispaced samples on the geodesic circle of radius r about branch
/// point `branch_index`, sign-transported so the sampled branch is
/// continuous; throws if the transport around the full circle is not -1
/// or if the radius is too small for the mesh (< 3 mean edge lengths).
CircleSampling sample_circle(const SphereMesh& mesh, const MeshTables& tables,
                             const SignCocycle& cocycle, int branch_index, double r,
                             int sample_count, double frame_rotation = 0.0);

double interpolate(const CircleSample& sample, const Eigen::VectorXd& values);

/// Discrete Fourier projection of the transported circle samples onto
/// e^{i (n+1/2) theta} for n = 0..n_max (negative modes are conjugates).
std::map<int, Complex> circle_modes(const TwistedSection& section, const SphereMesh& mesh,
                                    const MeshTables& tables, const SignCocycle& cocycle,
                                    int branch_index, double r, int n_max,
                                    double frame_rotation = 0.0);

/// Residues r mod m such that the mode e^{i(n+1/2)theta} picks up the
/// factor -1 under the lifted 2*pi/m rotation, i.e. 2n+1 = m (mod 2m).
std::vector<int> allowed_residues(int rotation_order);

/// Per-branch-point local structure extracted from a solved section.
struct LocalExpansion {
  Vec3 point;
  int branch_index = -1;
  std::vector<double> radii;  // decreasing
  std::map<std::pair<double, int>, Complex> mode_coeffs;  // (radius, n) -> amplitude
  int dominant_mode = 0;
  double fitted_exponent = 0.0;
  double fit_residual = 0.0;
  Complex leading_coeff{0.0, 0.0};  // a_p in the normalized chart
  std::string frame;
};

/// Geometric radius schedule r_j = r0 * 2^{-j/2} with r0 a third of the
/// branch separation, clipped to radii >= 3 mean edge lengths.
std::vector<double> default_radii(const SphereMesh& mesh, const MeshTables& tables,
                                  int count = 6);

LocalExpansion analyze_branch_point(const TwistedSection& section, const SphereMesh& mesh,
                                    const MeshTables& tables, const SignCocycle& cocycle,
                                    int branch_index, int n_max = 8,
                                    const std::vector<double>* radii = nullptr);

/// Log-log least-squares fit of the dominant-mode amplitude over the
/// stored radii; fills fitted_exponent, fit_residual and leading_coeff.
void fit_exponent(LocalExpansion& expansion);

/// Decay exponent of the discrete gradient magnitude averaged on circles
/// about the branch point (value exponent minus one for a clean mode).
double differential_exponent(const TwistedSection& section, const SphereMesh& mesh,
                             const MeshTables& tables, const SignCocycle& cocycle,
                             int branch_index, const std::vector<double>& radii);

/// Fraction of circle-mode energy outside the allowed residue class,
/// averaged over the given radii: sum over n in [0, n_max] of |c_n|^2
/// restricted to disallowed residues over the total.
double out_of_residue_energy_fraction(const TwistedSection& section, const SphereMesh& mesh,
                                      const MeshTables& tables, const SignCocycle& cocycle,
                                      int branch_index, int rotation_order, int n_max,
                                      const std::vector<double>& radii);

}  // namespace z2lab
