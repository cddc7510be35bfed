#pragma once

#include <vector>

#include "z2lab/local.hpp"

namespace z2lab {

/// Radial profile of one circle mode: samples of a_n(r) in the
/// stereographic radial coordinate, normalized so a_n(r)/r^{n+1/2} -> 1.
struct RadialProfile {
  int mode = 0;
  double eigenvalue = 0.0;
  std::vector<std::pair<double, double>> samples;  // (r, a_n(r))
  std::vector<double> frobenius_coeffs;            // u_j, coefficient of r^{2j}
};

/// Coefficients u_j (j = 1..order) of the regular Frobenius solution
/// a(r) = r^{n+1/2} (1 + sum_j u_j r^{2j}) of
///   -(r d/dr)^2 a + (n+1/2)^2 a = E * 4 r^2/(1+r^2)^2 * a.
/// The indicial roots differ by the odd integer 2n+1 while the series
/// advances in even powers, so the recursion never meets a resonance.
std::vector<double> frobenius_series(int n, double eigenvalue, int order);

/// Truncated series evaluation a(r) = r^{n+1/2}(1 + sum u_j r^{2j}).
double frobenius_eval(int n, const std::vector<double>& coeffs, double r);

/// Integrates the radial equation in t = log r from series-matched initial
/// data at r0 = 1e-3 out to the requested radii (ascending). Adaptive
/// embedded Runge-Kutta, reproducible to 1e-8 under step halving.
RadialProfile integrate_radial(int n, double eigenvalue, const std::vector<double>& radii);

/// Best single-scale match between an ODE profile and a measured mode
/// track (radius in geodesic units, amplitude |c_n|); returns the largest
/// relative deviation over the shared radii. The measured geodesic radius
/// converts to the stereographic coordinate via r = tan(r_geo / 2).
double compare_profiles(const RadialProfile& ode,
                        const std::vector<std::pair<double, double>>& measured_geo);

/// Residual of the radial equation for a callable a(r), via centered
/// differences in log r (floating-point floor around 1e-6 relative).
double radial_equation_residual(int n, double eigenvalue, double r,
                                const std::function<double(double)>& a);

/// Residual of the closed-form family a(r) = (2r/(1+r^2))^{k+1/2} with
/// E = (k+1/2)(k+3/2), evaluated from analytic log-derivatives; vanishes
/// identically, so the numerical value is pure roundoff.
double closed_form_radial_residual(int k, double r);

/// The closed form itself.
double closed_form_radial_profile(int k, double r);

}  // namespace z2lab
