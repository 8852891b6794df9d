#include <doctest.h>

#include <cmath>

#include "anisolab/liouville.hpp"
#include "anisolab/solver.hpp"
#include "oracles.hpp"

using anisolab::expr::Expr;
namespace gr = anisolab::grid;
namespace w = anisolab::weights;
namespace sv = anisolab::solver;
namespace lv = anisolab::liouville;
namespace oc = anisolab::oracles;

namespace {

w::WeightSpec unit_pair(int d, int s) {
  return w::from_expressions(Expr::constant(1.0), Expr::constant(1.0), d, s);
}

}  // namespace

TEST_CASE("ball energy of the planar profile") {
  auto ws = unit_pair(0, 1);
  auto f = w::nonlinearity("allen-cahn");
  auto g = gr::Grid::make(0, 1, {10.0}, {401});

  gr::GridField one = gr::GridField::sample(g, [](std::span<const double>) { return 1.0; });
  CHECK(std::abs(lv::energy(ws, f, one, 10.0)) <= 1e-12);
  gr::GridField mone = gr::GridField::sample(g, [](std::span<const double>) { return -1.0; });
  CHECK(std::abs(lv::energy(ws, f, mone, 10.0)) <= 1e-12);

  gr::GridField u = gr::GridField::sample(
      g, [](std::span<const double> x) { return oc::tanh_profile(x[0]); });
  double e = lv::energy(ws, f, u, 10.0);

  // oracle: quadrature of sech^4(x/sqrt 2)/2, closed form 2 sqrt(2)/3
  double oracle = oc::simpson(
      [](double x) {
        double c = std::cosh(x / std::sqrt(2.0));
        return 0.5 / (c * c * c * c);
      },
      -10.0, 10.0);
  CHECK(std::abs(e - oracle) <= 1e-3);
  CHECK(std::abs(e - 2.0 * std::sqrt(2.0) / 3.0) <= 1e-3);
}

TEST_CASE("energy additivity across the two code paths") {
  auto ws = w::preset("sech", 1, 1);
  auto f = w::nonlinearity("allen-cahn");
  auto g = gr::Grid::make(1, 1, {6.0, 6.0}, {61, 61});
  gr::GridField u = gr::GridField::sample(
      g, [](std::span<const double> x) { return oc::tanh_profile(x[1]) + 0.05 * std::sin(x[0]); });

  double direct = lv::energy(ws, f, u, 5.0);

  // second path: separate gradient and potential ball integrals
  gr::GridField dens = lv::energy_density(ws, f, u);
  gr::GridField grad_part(u.grid_ptr()), pot_part(u.grid_ptr());
  auto grads = gr::split_gradients(u);
  const double F1 = f.F_at(1.0);
  std::vector<double> xp(1);
  for (std::size_t i = 0; i < u.values().size(); ++i) {
    std::vector<double> x(2);
    gr::node_coords(*g, i, x);
    xp[0] = x[0];
    double g2 = grads.xprime[0][i] * grads.xprime[0][i] + grads.xsecond[0][i] * grads.xsecond[0][i];
    grad_part[i] = 0.5 * ws.gamma(xp) * g2;
    pot_part[i] = ws.lambda(xp) * (f.F_at(u[i]) - F1);
  }
  double two_path = gr::volume_integral(grad_part, 5.0).value -
                    gr::volume_integral(pot_part, 5.0).value;
  CHECK(direct == doctest::Approx(two_path).epsilon(1e-12));
  (void)dens;
}

TEST_CASE("energy bound scans") {
  auto f = w::nonlinearity("allen-cahn");

  // planar profile in 2D, unit weights: E_R linear, surface 2 pi R
  {
    auto ws = unit_pair(0, 2);
    auto g = gr::Grid::make(0, 2, {12.0, 12.0}, {121, 121});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return oc::tanh_profile(x[1]); });
    auto out = lv::energy_bound_scan(ws, f, u, lv::EnergyBoundMode::SurfaceA,
                                     {4.0, 6.0, 8.0, 10.0});
    CHECK(out.scan.verdict == anisolab::scan::Verdict::Bounded);
    CHECK(out.scan.fitted_k <= out.k_formula * 1.1);
    // oracle for the first radius: 1D energy density times the chord measure
    double e4 = out.scan.values[0];
    double chord = oc::simpson(
        [](double t) {
          double c = std::cosh(t / std::sqrt(2.0));
          return 2.0 * std::sqrt(16.0 - t * t) * 0.5 / (c * c * c * c);
        },
        -4.0, 4.0);
    CHECK(std::abs(e4 - chord) / chord <= 1e-2);
  }
  // constant field under the volume envelope: zero ratio
  {
    auto ws = unit_pair(0, 2);
    auto g = gr::Grid::make(0, 2, {12.0, 12.0}, {61, 61});
    gr::GridField c = gr::GridField::sample(g, [](std::span<const double>) { return 1.0; });
    auto out = lv::energy_bound_scan(ws, f, c, lv::EnergyBoundMode::VolumeB, {2.0, 4.0, 8.0});
    for (double r : out.scan.ratios) CHECK(std::abs(r) <= 1e-14);
    // mode A refuses the non-monotone field
    CHECK_THROWS(lv::energy_bound_scan(ws, f, c, lv::EnergyBoundMode::SurfaceA, {2.0, 4.0}));
  }
}

TEST_CASE("shifted energies and the boundary derivative formula") {
  auto ws = unit_pair(0, 2);
  auto f = w::nonlinearity("allen-cahn");
  auto g = gr::Grid::make(0, 2, {12.0, 12.0}, {161, 161});
  gr::GridField u = gr::GridField::sample(
      g, [](std::span<const double> x) { return oc::tanh_profile(x[1]); });
  const double hn = g->h(1);
  const double R = 8.0;
  const double t5 = hn * std::round(5.0 / hn);
  const double t10 = hn * std::round(10.0 / hn);

  auto rep = lv::shifted_energy_check(ws, f, u, {0.0, hn, t5, t10}, R);
  REQUIRE(rep.points.size() == 4);
  // t = 0: exact equality of the energies
  CHECK(rep.points[0].energy_shifted == doctest::Approx(rep.points[0].energy_u).epsilon(1e-14));
  for (const auto& p : rep.points) CHECK(p.inequality_ok);
  CHECK(rep.decreasing);
  // shifted energy decays once the interface leaves the ball
  CHECK(rep.points[3].energy_shifted <= 0.1 * rep.points[0].energy_u);

  // derivative formula against the closed-form shifted-profile energy at t ~ 5
  const auto& p5 = rep.points[2];
  CHECK(std::abs(p5.dE_fd - p5.dE_surface) <=
        0.02 * std::max(std::abs(p5.dE_fd), std::abs(p5.dE_surface)));

  // oracle: E(t) from the chord form, centered difference in t
  auto e_of_t = [&](double t) {
    return oc::simpson(
        [&](double y) {
          double c = std::cosh((y + t) / std::sqrt(2.0));
          double dens = 0.5 / (c * c * c * c);
          double half = std::sqrt(std::max(0.0, R * R - y * y));
          return 2.0 * half * dens;
        },
        -R, R);
  };
  double oracle = (e_of_t(p5.t + 0.05) - e_of_t(p5.t - 0.05)) / 0.1;
  CHECK(std::abs(p5.dE_fd - oracle) <= 0.05 * std::abs(oracle) + 5e-4);
}

TEST_CASE("ratio diagnostics on constructed fields") {
  // planar profile in 3D: every transverse ratio vanishes, m = 1
  {
    auto ws = unit_pair(0, 3);
    auto g = gr::Grid::make(0, 3, {6.0, 6.0, 6.0}, {61, 61, 61});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return oc::tanh_profile(x[2]); });
    gr::GridField dn = gr::axis_derivative(u, 2);
    double dmax = 0.0;
    for (double v : dn.values()) dmax = std::max(dmax, v);
    auto rep = lv::ratio_diagnostic(ws, u, 1e-2 * dmax);
    CHECK(!rep.unreliable);
    CHECK(rep.m_estimate == 1);
    for (const auto& dir : rep.directions) CHECK(dir.spread <= 1e-12);
    CHECK(!rep.varies_in_xprime);
  }
  // diagonal profile: sigma_2 = 1 exactly on equal spacings, m = 1
  {
    auto ws = unit_pair(0, 3);
    auto g = gr::Grid::make(0, 3, {6.0, 6.0, 6.0}, {61, 61, 61});
    gr::GridField u = gr::GridField::sample(g, [](std::span<const double> x) {
      return std::tanh((x[1] + x[2]) / 2.0);
    });
    gr::GridField dn = gr::axis_derivative(u, 2);
    double dmax = 0.0;
    for (double v : dn.values()) dmax = std::max(dmax, v);
    auto rep = lv::ratio_diagnostic(ws, u, 1e-2 * dmax);
    CHECK(rep.m_estimate == 1);
    REQUIRE(rep.directions.size() == 2);
    CHECK(rep.directions[0].spread <= 1e-12);  // sigma_1 = 0
    CHECK(std::abs(rep.directions[1].k_value - 1.0) <= 1e-12);
    CHECK(rep.directions[1].spread <= 1e-6);
    CHECK(rep.directions[1].divergence_residual <= 1e-8);
  }
  // tilted direction recovery within 1e-3 radians
  {
    auto ws = unit_pair(0, 2);
    auto g = gr::Grid::make(0, 2, {10.0, 10.0}, {401, 401});
    const double k1 = 0.6, k2 = 0.8;
    gr::GridField u = gr::GridField::sample(g, [&](std::span<const double> x) {
      return oc::tanh_profile(k1 * x[0] + k2 * x[1]);
    });
    gr::GridField dn = gr::axis_derivative(u, 1);
    double dmax = 0.0;
    for (double v : dn.values()) dmax = std::max(dmax, v);
    auto rep = lv::ratio_diagnostic(ws, u, 1e-2 * dmax);
    REQUIRE(rep.k.size() == 2);
    double angle_got = std::atan2(1.0, rep.k[0]);
    double angle_ref = std::atan2(k2, k1);
    CHECK(std::abs(angle_got - angle_ref) <= 1e-3);
    CHECK(rep.m_estimate == 1);
  }
}

TEST_CASE("gradient growth scans") {
  auto f = w::nonlinearity("allen-cahn");
  (void)f;
  // constant field: all integrals vanish
  {
    auto ws = unit_pair(0, 2);
    auto g = gr::Grid::make(0, 2, {10.0, 10.0}, {81, 81});
    gr::GridField c = gr::GridField::sample(g, [](std::span<const double>) { return 0.3; });
    auto s = lv::gradient_growth_scan(ws, c, Expr::constant(1.0), lv::ScanRegion::Annulus,
                                      {1.0, 2.0, 4.0});
    for (double v : s.values) CHECK(std::abs(v) <= 1e-12);
  }
  // planar interface with unit weights: annulus mass ~ interface length
  {
    auto ws = unit_pair(0, 2);
    auto g = gr::Grid::make(0, 2, {10.0, 10.0}, {161, 161});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return oc::tanh_profile(x[1]); });
    auto s = lv::gradient_growth_scan(ws, u, Expr::constant(1.0), lv::ScanRegion::Annulus,
                                      {1.0, 2.0, 4.0});
    CHECK(s.verdict == anisolab::scan::Verdict::Bounded);
    // oracle for the outer annulus: gradient density of the profile times the
    // chord-length difference of the two disks
    double expect = oc::simpson(
        [](double y) {
          double c = std::cosh(y / std::sqrt(2.0));
          double dens = 0.5 / (c * c * c * c);
          double outer = std::sqrt(64.0 - y * y);
          double inner = y * y < 16.0 ? std::sqrt(16.0 - y * y) : 0.0;
          return dens * 2.0 * (outer - inner);
        },
        -4.0, 4.0);
    CHECK(s.values[2] == doctest::Approx(expect).epsilon(0.01));
  }
  // growing weight against a log envelope: unbounded
  {
    auto ws = w::from_expressions(Expr::parse("exp(x1)", 1), Expr::constant(1.0), 1, 1);
    auto g = gr::Grid::make(1, 1, {10.0, 10.0}, {161, 161});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return oc::tanh_profile(x[1]); });
    auto s = lv::gradient_growth_scan(ws, u, Expr::parse("log(1+x1)", 1),
                                      lv::ScanRegion::Annulus, {1.0, 2.0, 4.0});
    CHECK(s.verdict == anisolab::scan::Verdict::Unbounded);
  }
}

TEST_CASE("piecewise radial example") {
  auto radii = std::vector<double>{10, 18, 32, 56, 100, 178, 316, 562, 1000};
  auto rep = lv::moschini_verify(3.0, radii);
  CHECK(rep.c1_ok);
  CHECK(rep.value_match_residual <= 1e-12 * (1.0 + std::log(3.0)));
  CHECK(rep.slope_match_residual <= 1e-12);
  CHECK(rep.subsolution_ok);
  CHECK(rep.min_inner_laplacian >= -1e-12);

  // center value of the planar laplacian: 4/R0^2
  // (first scan radius cross-checked against the independent quadrature)
  double a0 = rep.annulus_scan.values[0];
  double oracle = oc::simpson(
      [](double r) {
        double s = std::log(r);
        return 2.0 * M_PI * r * s * s;
      },
      10.0, 20.0);
  CHECK(std::abs(a0 - oracle) / oracle <= 1e-6);
  CHECK(rep.growth_ok);
  CHECK(rep.tail_spread <= 0.10);

  CHECK_THROWS(lv::moschini_verify(2.0, radii));  // needs R0 > e^{3/4}
}

TEST_CASE("power-weight family") {
  auto radii = std::vector<double>{10, 18, 32, 56, 100, 178, 316, 562, 1000};
  for (int n : {4, 5, 6, 7, 8, 9}) {
    auto rep = lv::remark_verify(n, radii);
    CHECK(rep.identity_ok);
    CHECK(rep.max_identity_residual <= 1e-12);
    CHECK(rep.subsolution_ok);
    CHECK(rep.min_sigma_div >= -1e-10);
    if (n <= 5) {
      CHECK(rep.growth_ok);
      // oracle: the radial quadrature of r^{n-1}(1+r^2)^{-1/2}
      auto prof = oc::RadialProfile::make("(1+x1^2)^(-0.5)", n);
      double omega = 2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);
      double expect = omega * oc::radial_quadrature(prof, radii[0]);
      CHECK(rep.ball_scan.values[0] == doctest::Approx(expect).epsilon(1e-8));
    }
  }
  CHECK_THROWS(lv::remark_verify(3, radii));
}

TEST_CASE("reflect and negate") {
  auto g = gr::Grid::make(0, 2, {2.0, 3.0}, {21, 31});
  Expr e = Expr::parse("x1 + 0.5*x2 + 0.25*x2^2", 2);
  gr::GridField u =
      gr::GridField::sample(g, [&e](std::span<const double> x) { return e.eval(x); });
  gr::GridField v = lv::reflect_negate(u);
  std::vector<double> x(2);
  for (std::size_t i = 0; i < v.values().size(); ++i) {
    gr::node_coords(*g, i, x);
    double expect = -e.eval(std::vector<double>{x[0], -x[1]});
    CHECK(v[i] == doctest::Approx(expect).epsilon(1e-14));
  }
}
