#pragma once

#include <array>
#include <complex>

#include "z2lab/spectral.hpp"

namespace z2lab {

/// Homogeneous extension of a solved eigensection: the scalar potential
/// |x|^alpha f(x/|x|), its differential v (a 1-form on R^3 minus the rays
/// through the branch set) and the spinor s = D(potential * s0) with D the
/// flat Dirac operator. The sphere value f is interpolated by a local
/// least-squares cubic fit of the twisted section around the evaluation
/// direction, so that finite differences of the potential see a smooth
/// field.
class HomogeneousLift {
 public:
  HomogeneousLift(const SphereMesh& mesh, const MeshTables& tables,
                  const SignCocycle& cocycle, TwistedSection section, double alpha,
                  std::complex<double> spinor_seed1 = {1.0, 0.0},
                  std::complex<double> spinor_seed2 = {0.0, 0.0});

  double alpha() const { return alpha_; }

  struct Value {
    double potential = 0.0;
    Vec3 one_form = Vec3::Zero();                    // v = d(potential)
    std::array<std::complex<double>, 2> spinor{};    // s = D(potential s0)
    double curl_residual = 0.0;                      // |dv|
    double divergence_residual = 0.0;                // |d*v|
    double dirac_residual = 0.0;                     // |D s|
  };

  /// Point evaluation; x must keep more than ~3 local edge lengths of
  /// angular distance from the branch rays and 0.2 < |x| < 5.
  Value evaluate(const Vec3& x) const;

  /// Potential only (cheaper; used by the homogeneity checks).
  double potential(const Vec3& x) const;

  /// Potential with the local patch gauge seeded at an alternate triangle;
  /// |v| and |s| are invariant under this choice, the signs are not.
  double potential_alternate_gauge(const Vec3& x) const;

 private:
  struct Patch;
  Patch fit_patch(const Vec3& direction, bool alternate_seed) const;

  const SphereMesh& mesh_;
  const MeshTables& tables_;
  const SignCocycle& cocycle_;
  TwistedSection section_;
  double alpha_;
  std::array<std::complex<double>, 2> seed_;
};

/// Positive root of alpha (alpha + 1) = E, the homogeneity degree that
/// makes |x|^alpha f harmonic. (The literal formula
/// (1 + sqrt(1+4E))/2 yields alpha + 1 and fails the harmonicity check;
/// both values are surfaced in reports.)
double compute_alpha(double eigenvalue);
double compute_alpha_literal(double eigenvalue);

struct HarmonicReport {
  double max_curl = 0.0;
  double max_divergence = 0.0;
  double max_dirac = 0.0;
  double field_scale = 0.0;  // max |v| over the sample set
  int samples = 0;
};

/// Curl, divergence and Dirac residuals of the lift at deterministic
/// sample points (seeded), relative scales in field_scale.
HarmonicReport verify_harmonic(const HomogeneousLift& lift, const SphereMesh& mesh,
                               const MeshTables& tables, int sample_count, unsigned seed);

}  // namespace z2lab
