#include "z2lab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace z2lab {

std::vector<double> frobenius_series(int n, double eigenvalue, int order) {
  if (order > 40) throw std::invalid_argument("series order capped at 40");
  const double nu = std::abs(n + 0.5);
  std::vector<double> u(order + 1, 0.0);
  u[0] = 1.0;
  for (int m = 1; m <= order; ++m) {
    // -(2m)(2m + 2 nu) u_m = 4 E sum_{j+k=m-1} (-1)^j (j+1) u_k
    double rhs = 0.0;
    for (int j = 0; j <= m - 1; ++j) {
      const int k = m - 1 - j;
      rhs += ((j % 2 == 0) ? 1.0 : -1.0) * (j + 1) * u[k];
    }
    const double denom = 2.0 * m * (2.0 * m + 2.0 * nu);
    if (denom == 0.0) throw std::logic_error("resonant Frobenius recursion");
    u[m] = -4.0 * eigenvalue * rhs / denom;
  }
  return std::vector<double>(u.begin() + 1, u.end());
}

double frobenius_eval(int n, const std::vector<double>& coeffs, double r) {
  const double nu = std::abs(n + 0.5);
  double series = 1.0;
  double rpow = 1.0;
  for (double c : coeffs) {
    rpow *= r * r;
    series += c * rpow;
  }
  return std::pow(r, nu) * series;
}

namespace {

// a'' = nu^2 a - 4 E e^{2t} / (1 + e^{2t})^2 a in t = log r.
struct RadialRhs {
  double nu2;
  double eigenvalue;
  void operator()(double t, const double y[2], double dy[2]) const {
    const double e2t = std::exp(2.0 * t);
    const double w = 4.0 * e2t / ((1.0 + e2t) * (1.0 + e2t));
    dy[0] = y[1];
    dy[1] = (nu2 - eigenvalue * w) * y[0];
  }
};

// One Cash-Karp RK45 step with embedded error estimate.
template <typename F>
double rk45_step(const F& f, double t, double h, double y[2]) {
  static const double b2 = 1.0 / 5.0;
  static const double b3[] = {3.0 / 40.0, 9.0 / 40.0};
  static const double b4[] = {3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0};
  static const double b5[] = {-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0};
  static const double b6[] = {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0,
                              44275.0 / 110592.0, 253.0 / 4096.0};
  static const double c[] = {37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0,
                             512.0 / 1771.0};
  static const double cs[] = {2825.0 / 27648.0, 0.0,           18575.0 / 48384.0,
                              13525.0 / 55296.0, 277.0 / 14336.0, 1.0 / 4.0};
  double k[6][2], tmp[2];
  f(t, y, k[0]);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * b2 * k[0][i];
  f(t + h / 5.0, tmp, k[1]);
  for (int i = 0; i < 2; ++i) tmp[i] = y[i] + h * (b3[0] * k[0][i] + b3[1] * k[1][i]);
  f(t + 3.0 * h / 10.0, tmp, k[2]);
  for (int i = 0; i < 2; ++i) {
    tmp[i] = y[i] + h * (b4[0] * k[0][i] + b4[1] * k[1][i] + b4[2] * k[2][i]);
  }
  f(t + 3.0 * h / 5.0, tmp, k[3]);
  for (int i = 0; i < 2; ++i) {
    tmp[i] = y[i] + h * (b5[0] * k[0][i] + b5[1] * k[1][i] + b5[2] * k[2][i] + b5[3] * k[3][i]);
  }
  f(t + h, tmp, k[4]);
  for (int i = 0; i < 2; ++i) {
    tmp[i] = y[i] + h * (b6[0] * k[0][i] + b6[1] * k[1][i] + b6[2] * k[2][i] +
                         b6[3] * k[3][i] + b6[4] * k[4][i]);
  }
  f(t + 7.0 * h / 8.0, tmp, k[5]);
  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    double ynew = y[i], ystar = y[i];
    for (int s = 0; s < 6; ++s) {
      ynew += h * c[s] * k[s][i];
      ystar += h * cs[s] * k[s][i];
    }
    err = std::max(err, std::abs(ynew - ystar));
    tmp[i] = ynew;
  }
  y[0] = tmp[0];
  y[1] = tmp[1];
  return err;
}

}  // namespace

RadialProfile integrate_radial(int n, double eigenvalue, const std::vector<double>& radii) {
  RadialProfile profile;
  profile.mode = n;
  profile.eigenvalue = eigenvalue;
  profile.frobenius_coeffs = frobenius_series(n, eigenvalue, 20);

  std::vector<double> targets(radii);
  std::sort(targets.begin(), targets.end());
  if (targets.empty()) throw std::invalid_argument("no radii requested");
  if (targets.back() > 1.5) throw std::invalid_argument("radius exceeds 1.5");

  const double nu = std::abs(n + 0.5);
  const double r0 = 1e-3;
  const RadialRhs rhs{nu * nu, eigenvalue};

  // Series-matched initial data at r0 (truncation error ~ r0^40).
  double y[2];
  {
    double series = 1.0, dseries = 0.0, rpow = 1.0;
    for (std::size_t j = 0; j < profile.frobenius_coeffs.size(); ++j) {
      rpow *= r0 * r0;
      series += profile.frobenius_coeffs[j] * rpow;
      dseries += 2.0 * (j + 1) * profile.frobenius_coeffs[j] * rpow;
    }
    // y = a(e^t), dy/dt = r da/dr = nu a + r^nu * d(series)/dlog r
    y[0] = std::pow(r0, nu) * series;
    y[1] = std::pow(r0, nu) * (nu * series + dseries);
  }

  double t = std::log(r0);
  double h = 0.05;
  const double tol = 1e-12;
  for (double target : targets) {
    const double t_end = std::log(target);
    if (t_end < t) throw std::invalid_argument("radius below the series matching point");
    while (t < t_end) {
      double step = std::min(h, t_end - t);
      double ytry[2] = {y[0], y[1]};
      const double err = rk45_step(rhs, t, step, ytry);
      const double scale = std::max({std::abs(y[0]), std::abs(y[1]), 1e-30});
      if (err <= tol * scale || step < 1e-12) {
        y[0] = ytry[0];
        y[1] = ytry[1];
        t += step;
        if (err < 0.1 * tol * scale && step >= h) h = std::min(0.2, h * 1.6);
      } else {
        h = std::max(1e-12, step * 0.5);
        if (h < 1e-13) throw std::runtime_error("radial integrator step underflow");
      }
    }
    profile.samples.emplace_back(target, y[0]);
  }
  std::reverse(profile.samples.begin(), profile.samples.end());  // decreasing radii
  return profile;
}

double compare_profiles(const RadialProfile& ode,
                        const std::vector<std::pair<double, double>>& measured_geo) {
  if (measured_geo.empty()) throw std::invalid_argument("no measured samples");
  // Interpolate the ODE profile at the converted radii.
  auto ode_at = [&](double r) {
    const auto& s = ode.samples;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (std::abs(s[i].first - r) < 1e-12) return s[i].second;
    }
    throw std::invalid_argument("no matching ODE sample for measured radius");
  };
  double num = 0.0, den = 0.0, peak = 0.0;
  std::vector<std::pair<double, double>> pairs;  // (|measured|, |ode|)
  for (const auto& [rg, amp] : measured_geo) {
    const double a = std::abs(ode_at(std::tan(0.5 * rg)));
    pairs.emplace_back(std::abs(amp), a);
    num += std::abs(amp) * a;
    den += a * a;
    peak = std::max(peak, std::abs(amp));
  }
  if (den == 0.0 || peak == 0.0) throw std::invalid_argument("degenerate profiles");
  const double scale = num / den;
  double worst = 0.0;
  for (const auto& [m, a] : pairs) {
    worst = std::max(worst, std::abs(m - scale * a) / peak);
  }
  return worst;
}

double radial_equation_residual(int n, double eigenvalue, double r,
                                const std::function<double(double)>& a) {
  const double nu = n + 0.5;
  const double h = 1e-5 * std::max(r, 0.1);
  // -(r d/dr)(r d a/dr) via centered differences in t = log r.
  const double t = std::log(r);
  const double app = (a(std::exp(t + h)) - 2.0 * a(r) + a(std::exp(t - h))) / (h * h);
  const double w = 4.0 * r * r / ((1.0 + r * r) * (1.0 + r * r));
  return -app + nu * nu * a(r) - eigenvalue * w * a(r);
}

double closed_form_radial_profile(int k, double r) {
  return std::pow(2.0 * r / (1.0 + r * r), k + 0.5);
}

double closed_form_radial_residual(int k, double r) {
  const double nu = k + 0.5;
  const double eigenvalue = nu * (nu + 1.0);
  const double a = closed_form_radial_profile(k, r);
  const double w2 = r * r;
  const double q = (1.0 - w2) / (1.0 + w2);
  // d^2 a / d(log r)^2 = a nu^2 q^2 - 4 a nu w2 / (1+w2)^2, analytically.
  const double app = a * nu * nu * q * q - 4.0 * a * nu * w2 / ((1.0 + w2) * (1.0 + w2));
  const double w = 4.0 * w2 / ((1.0 + w2) * (1.0 + w2));
  return -app + nu * nu * a - eigenvalue * w * a;
}

}  // namespace z2lab
