#include "doctest.h"
#include "z2lab/local.hpp"
#include "z2lab/synthetic.hpp"

#include <cmath>

using namespace z2lab;

namespace {

struct Setup {
  BranchedCoverSpec spec;
  SphereMesh mesh;
  MeshTables tables;
  SignCocycle cocycle;
  Setup(Solid s, int level)
      : spec(build_cover_spec(s, M_PI)),
        mesh(build_mesh(spec, level)),
        tables(geometric_tables(mesh)),
        cocycle(build_sign_cocycle(spec, mesh, tables)) {}
};

EigenResult solve_sector(const Setup& su, bool sector) {
  std::optional<SectorProjector> proj;
  if (sector) {
    const auto lifts = lift_group_action(su.spec, su.mesh, su.tables, su.cocycle);
    proj.emplace(lifts, su.mesh.vertex_count(), su.mesh.branch_vertices);
  }
  return solve_lowest(assemble(su.mesh, su.tables, su.cocycle), proj ? &*proj : nullptr, {});
}

}  // namespace

TEST_CASE("allowed residues and minimal half-integer modes") {
  CHECK(allowed_residues(3) == std::vector<int>{1});
  CHECK(allowed_residues(5) == std::vector<int>{2});
  CHECK_THROWS_AS(allowed_residues(4), std::invalid_argument);
  // Minimal |n + 1/2| over each residue class.
  auto min_abs = [](int order, int residue) {
    double best = 1e9;
    for (int n = -20; n <= 20; ++n) {
      if (((n % order) + order) % order == residue) best = std::min(best, std::abs(n + 0.5));
    }
    return best;
  };
  CHECK(min_abs(3, 1) == doctest::Approx(1.5));
  CHECK(min_abs(5, 2) == doctest::Approx(2.5));
}

TEST_CASE("stereographic chart frames are orthonormal and oriented") {
  for (const Vec3& p : {Vec3(0, 0, 1), Vec3(1, 0, 0).normalized(),
                        Vec3(0.3, -0.4, 0.86).normalized(), Vec3(0, 0, -1)}) {
    const TangentFrame f = tangent_frame(p);
    CHECK(std::abs(f.e1.norm() - 1.0) < 1e-9);
    CHECK(std::abs(f.e2.norm() - 1.0) < 1e-9);
    CHECK(std::abs(f.e1.dot(f.e2)) < 1e-9);
    CHECK(std::abs(f.e1.dot(p)) < 1e-9);
    CHECK(std::abs(f.e2.dot(p)) < 1e-9);
  }
  // North pole frame matches the chart axes.
  const TangentFrame n = tangent_frame(Vec3(0, 0, 1));
  CHECK((n.e1 - Vec3(1, 0, 0)).norm() < 1e-6);
  CHECK((n.e2 - Vec3(0, 1, 0)).norm() < 1e-6);
}

TEST_CASE("synthetic single-mode section produces a single circle mode") {
  const Setup su(Solid::Tetrahedron, 5);
  const double cutoff = 0.45;
  const TwistedSection f =
      synthetic_local_section(su.mesh, su.tables, su.cocycle, 0, 1, Complex(1.0, 0.0), cutoff);
  const double r = 0.16;
  const auto modes = circle_modes(f, su.mesh, su.tables, su.cocycle, 0, r, 6);
  const double expected = std::pow(r, 1.5);
  CHECK(std::abs(modes.at(1) - Complex(expected, 0.0)) < 2e-3 * expected);
  for (const auto& [n, c] : modes) {
    if (n != 1) CHECK(std::abs(c) < 2e-3 * expected);
  }
}

TEST_CASE("synthetic section fits exponent 1.5 with a real positive coefficient") {
  const Setup su(Solid::Tetrahedron, 6);
  const TwistedSection f =
      synthetic_local_section(su.mesh, su.tables, su.cocycle, 0, 1, Complex(1.0, 0.0), 0.45);
  std::vector<double> radii = {0.2, 0.16, 0.13, 0.1};
  const auto exp = analyze_branch_point(f, su.mesh, su.tables, su.cocycle, 0, 6, &radii);
  CHECK(exp.dominant_mode == 1);
  CHECK(exp.fitted_exponent == doctest::Approx(1.5).epsilon(0.01));
  CHECK(exp.leading_coeff.real() > 0.9);
  CHECK(std::abs(exp.leading_coeff.imag()) < 0.05);
  const double de = differential_exponent(f, su.mesh, su.tables, su.cocycle, 0, radii);
  CHECK(de == doctest::Approx(0.5).epsilon(0.25));
}

TEST_CASE("chart covariance: rotating the frame rotates the phase") {
  const Setup su(Solid::Tetrahedron, 5);
  const TwistedSection f =
      synthetic_local_section(su.mesh, su.tables, su.cocycle, 0, 1, Complex(0.8, 0.4), 0.45);
  const double r = 0.18, phi = 0.7;
  const auto base = circle_modes(f, su.mesh, su.tables, su.cocycle, 0, r, 4);
  const auto rotated = circle_modes(f, su.mesh, su.tables, su.cocycle, 0, r, 4, phi);
  // Rotating the sampling frame by phi multiplies c_n by e^{i(n+1/2)phi}.
  const Complex expect = base.at(1) * std::exp(Complex(0, 1.5 * phi));
  CHECK(std::abs(rotated.at(1) - expect) < 5e-3 * std::abs(base.at(1)));
}

TEST_CASE("two-point ground state: dominant mode 0, exponent one half") {
  const Setup su(Solid::TwoPoints, 6);
  const EigenResult res = solve_sector(su, false);
  const auto radii = default_radii(su.mesh, su.tables);
  const auto exp = analyze_branch_point(res.section, su.mesh, su.tables, su.cocycle, 0, 6, &radii);
  CHECK(exp.dominant_mode == 0);
  CHECK(std::abs(exp.fitted_exponent - 0.5) < 0.05);
  const double de =
      differential_exponent(res.section, su.mesh, su.tables, su.cocycle, 0, radii);
  CHECK(std::abs(de - (-0.5)) < 0.1);  // |df| blows up for the k = 0 sector
  CHECK(std::abs(exp.fitted_exponent - 1.0 - de) < 0.15);
}

TEST_CASE("tetrahedral sector: only n = 1 mod 3 modes carry energy") {
  const Setup su(Solid::Tetrahedron, 5);
  const EigenResult res = solve_sector(su, true);
  const auto radii = default_radii(su.mesh, su.tables);
  for (int b = 0; b < 4; ++b) {
    const auto exp =
        analyze_branch_point(res.section, su.mesh, su.tables, su.cocycle, b, 8, &radii);
    CHECK(exp.dominant_mode == 1);
    const double frac = out_of_residue_energy_fraction(res.section, su.mesh, su.tables,
                                                       su.cocycle, b, 3, 8, radii);
    CHECK(frac < 1e-2);
  }
}

TEST_CASE("circle sampling rejects radii that violate the preconditions") {
  const Setup su(Solid::Tetrahedron, 4);
  CHECK_THROWS_AS(sample_circle(su.mesh, su.tables, su.cocycle, 0, 0.01, 16),
                  std::invalid_argument);
  CHECK_THROWS_AS(sample_circle(su.mesh, su.tables, su.cocycle, 0, 1.0, 16),
                  std::invalid_argument);
}

TEST_CASE("antiperiodic transport closes with holonomy -1") {
  const Setup su(Solid::TwoPoints, 5);
  // sample_circle throws on holonomy failure; exercise several radii.
  for (double r : {0.2, 0.35, 0.6}) {
    const CircleSampling c = sample_circle(su.mesh, su.tables, su.cocycle, 0, r, 48);
    CHECK(c.samples.size() == 48);
  }
}
