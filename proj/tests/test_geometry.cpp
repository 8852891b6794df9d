#include <doctest.h>

#include <cmath>
#include <random>

#include "anisolab/geometry.hpp"
#include "anisolab/solver.hpp"
#include "oracles.hpp"

using anisolab::expr::Expr;
namespace gr = anisolab::grid;
namespace ge = anisolab::geometry;
namespace w = anisolab::weights;
namespace oc = anisolab::oracles;

TEST_CASE("level-set identity: flat, radial and planar fields") {
  // linear field: every term vanishes on the active set
  {
    auto g = gr::Grid::make(0, 2, {3.0, 3.0}, {61, 61});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return 0.8 * x[0] - 0.6 * x[1]; });
    auto sz = ge::sz_decomposition(u, 1e-9);
    for (std::size_t i = 0; i < u.values().size(); ++i) {
      CHECK(std::abs(sz.lhs[i]) <= 1e-10);
      CHECK(std::abs(sz.curvature[i]) <= 1e-10);
      CHECK(std::abs(sz.tangential[i]) <= 1e-10);
    }
  }
  // radial quadratic: circles of curvature 1/r; curvature term identically 1
  {
    auto g = gr::Grid::make(0, 2, {3.0, 3.0}, {121, 121});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
    auto sz = ge::sz_decomposition(u, 1e-9);
    std::vector<double> x(2);
    for (std::size_t i = 0; i < u.values().size(); ++i) {
      gr::node_coords(*g, i, x);
      double r = std::hypot(x[0], x[1]);
      bool interior = std::abs(x[0]) < 2.9 && std::abs(x[1]) < 2.9;
      if (r > 0.8 && interior) {
        CHECK(sz.curvature[i] == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(std::abs(sz.lhs[i] - 1.0) <= 5e-3);
        CHECK(std::abs(sz.tangential[i]) <= 1e-6);  // fourth-order small
      }
    }
  }
  // planar profile: zero on the active set to roundoff
  {
    auto g = gr::Grid::make(0, 2, {6.0, 6.0}, {81, 81});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return oc::tanh_profile(x[1]); });
    auto sz = ge::sz_decomposition(u, 1e-9);
    for (std::size_t i = 0; i < u.values().size(); ++i) {
      CHECK(std::abs(sz.lhs[i]) <= 1e-12);
      CHECK(std::abs(sz.curvature[i]) <= 1e-12);
      CHECK(std::abs(sz.tangential[i]) <= 1e-12);
    }
  }
}

TEST_CASE("identity residual shrinks under refinement") {
  auto residual_at = [](int N) {
    auto g = gr::Grid::make(0, 2, {3.0, 3.0}, {N, N});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return 0.5 * (x[0] * x[0] + x[1] * x[1]); });
    double gmax = 3.0 * std::sqrt(2.0);
    auto sz = ge::sz_decomposition(u, 0.25 * gmax);
    double worst = 0.0;
    std::vector<double> x(2);
    for (std::size_t i = 0; i < u.values().size(); ++i) {
      gr::node_coords(*g, i, x);
      if (std::abs(x[0]) > 2.7 || std::abs(x[1]) > 2.7) continue;
      double r = std::hypot(x[0], x[1]);
      if (r <= 0.25 * gmax) continue;
      worst = std::max(worst, std::abs(sz.lhs[i] - sz.curvature[i] - sz.tangential[i]));
    }
    return worst;
  };
  double e1 = residual_at(61), e2 = residual_at(121);
  CHECK(e2 < e1);
  CHECK(e1 / e2 >= 1.8);  // at least first order
}

TEST_CASE("S quantity") {
  // independent of x': identically zero
  {
    auto g = gr::Grid::make(1, 1, {4.0, 4.0}, {41, 41});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return std::sin(x[1]); });
    gr::GridField s = ge::s_quantity(u, 1e-9);
    for (double v : s.values()) CHECK(std::abs(v) <= 1e-12);
  }
  // separable bilinear: both terms cancel exactly off the critical line
  {
    auto g = gr::Grid::make(1, 1, {4.0, 4.0}, {41, 41});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return x[0] * x[1]; });
    gr::GridField s = ge::s_quantity(u, 1e-9);
    for (double v : s.values()) {
      CHECK(v >= -1e-12);
      CHECK(v <= 1e-10);
    }
  }
  // mixed field stays nonnegative
  {
    auto g = gr::Grid::make(1, 1, {4.0, 4.0}, {41, 41});
    gr::GridField u = gr::GridField::sample(
        g, [](std::span<const double> x) { return x[0] * x[1] + x[1] * x[1]; });
    gr::GridField s = ge::s_quantity(u, 1e-9);
    for (double v : s.values()) CHECK(v >= -1e-8);
  }
}

TEST_CASE("property: S stays nonnegative on random smooth fields") {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    double a = dist(rng), b = dist(rng), c = dist(rng), d = dist(rng);
    auto g = gr::Grid::make(1, 2, {3.0, 3.0, 3.0}, {21, 21, 21});
    gr::GridField u = gr::GridField::sample(g, [&](std::span<const double> x) {
      return std::sin(a * x[0] + b * x[1]) * std::cos(c * x[2]) + d * x[0] * x[2] +
             std::tanh(0.5 * (x[1] + x[2]));
    });
    gr::GridField s = ge::s_quantity(u, 1e-8);
    for (double v : s.values()) CHECK(v >= -1e-8);
  }
}

TEST_CASE("poincare sides") {
  auto ws = w::preset("sech", 1, 1);
  auto g = gr::Grid::make(1, 1, {10.0, 10.0}, {101, 101});
  gr::GridField u = gr::GridField::sample(
      g, [](std::span<const double> x) { return oc::tanh_profile(x[1]); });

  // zero test function: degenerate report
  {
    gr::GridField phi(g);
    auto rep = ge::poincare_sides(ws, u, phi, 1e-8, 1e-6);
    CHECK(rep.lhs_curvature == 0.0);
    CHECK(rep.lhs_s == 0.0);
    CHECK(rep.rhs == 0.0);
    CHECK(rep.holds);
  }
  // planar profile: the left side collapses, the inequality is 0 <= rhs
  {
    gr::GridField phi = ge::tensor_cosine(g);
    auto rep = ge::poincare_sides(ws, u, phi, 1e-8, 1e-6);
    CHECK(std::abs(rep.lhs_curvature) <= 1e-12);
    CHECK(rep.lhs_s <= 1e-10);
    CHECK(rep.rhs > 0.0);
    CHECK(rep.holds);

    // verdict is invariant under scaling of phi; both sides scale by c^2
    gr::GridField phi2(g);
    for (std::size_t i = 0; i < phi.values().size(); ++i) phi2[i] = 2.0 * phi[i];
    auto rep2 = ge::poincare_sides(ws, u, phi2, 1e-8, 1e-6);
    CHECK(rep2.holds == rep.holds);
    CHECK(rep2.rhs == doctest::Approx(4.0 * rep.rhs).epsilon(1e-12));
    CHECK(rep2.slack == doctest::Approx(4.0 * rep.slack).epsilon(1e-9));
  }
  // boundary-vanishing contract
  {
    gr::GridField bad(g);
    for (std::size_t i = 0; i < bad.values().size(); ++i) bad[i] = 1.0;
    CHECK_THROWS(ge::poincare_sides(ws, u, bad, 1e-8, 1e-6));
  }
}

TEST_CASE("test function catalog vanishes on the boundary") {
  auto g = gr::Grid::make(0, 2, {9.0, 9.0}, {61, 61});
  gr::GridField lc = ge::log_cutoff(g, 9.0);
  gr::GridField bp = ge::smooth_bump(g, 9.0);
  gr::GridField tc = ge::tensor_cosine(g);
  for (int i = 0; i < 61; ++i)
    for (int j = 0; j < 61; ++j) {
      if (i != 0 && i != 60 && j != 0 && j != 60) continue;
      std::size_t f = static_cast<std::size_t>(i) * 61 + j;
      CHECK(std::abs(lc[f]) <= 1e-12);
      CHECK(std::abs(bp[f]) <= 1e-12);
      CHECK(std::abs(tc[f]) <= 1e-12);
    }
  // plateau value of the log cutoff
  std::vector<double> x(2);
  for (std::size_t i = 0; i < lc.values().size(); ++i) {
    gr::node_coords(*g, i, x);
    if (std::hypot(x[0], x[1]) <= std::sqrt(9.0)) CHECK(lc[i] == 0.5);
  }
}
