#include <doctest.h>

#include <cmath>

#include "anisolab/weights.hpp"
#include "oracles.hpp"

using anisolab::expr::Expr;
namespace w = anisolab::weights;

TEST_CASE("advection form to divergence form") {
  // a = 0, b = 1: unit pair
  {
    std::vector<Expr> a;
    a.push_back(Expr::constant(0.0));
    auto ws = w::from_advection(std::move(a), Expr::constant(1.0), 1);
    for (double x : {-3.0, 0.0, 1.7}) {
      CHECK(ws.gamma.at1(x) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(ws.lambda.at1(x) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  // a = tanh: gamma = sech via int_0^x tanh = log cosh
  {
    auto ws = w::preset("sech", 1, 1);
    for (int i = 0; i < 50; ++i) {
      double x = -8.0 + 16.0 * i / 49.0;
      CHECK(std::abs(ws.gamma.at1(x) - 1.0 / std::cosh(x)) <= 1e-8);
    }
  }
  // a = 2x/(1+x^2): gamma = 1/(1+x^2)
  {
    auto ws = w::preset("rational", 1, 1);
    for (int i = 0; i < 50; ++i) {
      double x = -8.0 + 16.0 * i / 49.0;
      CHECK(std::abs(ws.gamma.at1(x) - 1.0 / (1.0 + x * x)) <= 1e-8);
    }
  }
  CHECK_THROWS(w::preset("shifted-tanh", 1, 1, 0.5, 1.0));  // needs t > |s|
}

TEST_CASE("advection recovery: a = -d/dx log gamma") {
  auto ws = w::preset("sech", 1, 1);
  const double h = 1e-4;
  for (double x : {-5.0, -1.3, 0.2, 2.0, 6.5}) {
    double lg_p = std::log(ws.gamma.at1(x + h));
    double lg_m = std::log(ws.gamma.at1(x - h));
    double a_rec = -(lg_p - lg_m) / (2.0 * h);
    CHECK(std::abs(a_rec - std::tanh(x)) <= 1e-6);
  }
}

TEST_CASE("advection pair must keep lambda nonnegative") {
  std::vector<Expr> a;
  a.push_back(Expr::constant(0.0));
  auto ws = w::from_advection(std::move(a), Expr::constant(-1.0), 1);
  std::vector<std::vector<double>> samples = {{-1.0, 0.0, 1.0}};
  CHECK_THROWS(ws.validate_on(samples));

  // a_i referencing another axis is rejected up front
  std::vector<Expr> bad;
  bad.push_back(Expr::parse("x2", 2));
  bad.push_back(Expr::parse("x2", 2));
  CHECK_THROWS(w::from_advection(std::move(bad), Expr::constant(1.0), 1));
}

TEST_CASE("growth scan rejects bad inputs") {
  auto ws = w::from_expressions(Expr::constant(1.0), Expr::constant(1.0), 1, 1);
  CHECK_THROWS(w::growth_scan(ws, Expr::constant(1.0), w::GrowthMode::G, 0.0, {4.0, 2.0}));

  // heavy overflow makes the quadrature give up rather than return junk
  auto hot = w::from_expressions(Expr::parse("exp(x1^2)", 1), Expr::constant(1.0), 1, 1);
  CHECK_THROWS(w::growth_scan(hot, Expr::constant(1.0), w::GrowthMode::G, 0.0, {1.0, 40.0}));
}

TEST_CASE("class membership scan") {
  // a constant g sized to land between the decision bands stays inconclusive
  auto mid = w::gclass_check(Expr::parse("30", 1), 1e8, 0.05);
  CHECK(mid.membership == w::GClassVerdict::Membership::Inconclusive);
  CHECK(!mid.member);
}

TEST_CASE("class membership: canonical envelopes") {
  auto member = w::gclass_check(Expr::parse("log(1+x1)", 1), 1e8, 0.05);
  CHECK(member.membership == w::GClassVerdict::Membership::Member);
  CHECK(member.member);

  auto non = w::gclass_check(Expr::parse("log(1+x1)^2", 1), 1e8, 0.05);
  CHECK(non.membership == w::GClassVerdict::Membership::NonMember);

  auto one = w::gclass_check(Expr::parse("1", 1), 1e8, 0.05);
  CHECK(one.membership == w::GClassVerdict::Membership::Member);

  // partial integrals increase along the scan for members
  for (std::size_t i = 1; i < member.partial_integrals.size(); ++i)
    CHECK(member.partial_integrals[i] > member.partial_integrals[i - 1]);

  CHECK_THROWS(w::gclass_check(Expr::parse("-1", 1), 1e8, 0.05));
  CHECK_THROWS(w::gclass_check(Expr::parse("1/(1+x1)", 1), 1e8, 0.05));  // decreasing
}

TEST_CASE("growth scans against closed forms") {
  std::vector<double> radii = {1, 4, 16, 64, 256, 1024, 4096, 16384};

  // unit weight, envelope R*g with g = 1: mass 2R, ratio exactly 2
  {
    auto ws = w::from_expressions(Expr::constant(1.0), Expr::constant(1.0), 1, 1);
    auto s = w::growth_scan(ws, Expr::constant(1.0), w::GrowthMode::RG, 0.0, radii);
    CHECK(s.verdict == anisolab::scan::Verdict::Bounded);
    CHECK(s.fitted_k == doctest::Approx(2.0).epsilon(1e-9));
  }
  // rational weight, envelope g = 1: mass 2 atan(R) -> pi
  {
    auto ws = w::from_expressions(Expr::parse("1/(1+x1^2)", 1), Expr::constant(1.0), 1, 1);
    auto s = w::growth_scan(ws, Expr::constant(1.0), w::GrowthMode::G, 0.0, radii);
    CHECK(s.verdict == anisolab::scan::Verdict::Bounded);
    for (std::size_t i = 0; i < radii.size(); ++i)
      CHECK(s.values[i] == doctest::Approx(2.0 * std::atan(radii[i])).epsilon(1e-8));
    CHECK(s.fitted_k == doctest::Approx(M_PI).epsilon(1e-3));
  }
  // exponential weight against log: unbounded
  {
    auto ws = w::from_expressions(Expr::parse("exp(x1)", 1), Expr::constant(1.0), 1, 1);
    std::vector<double> small = {1, 2, 4, 8, 16};
    auto s = w::growth_scan(ws, Expr::parse("log(1+x1)", 1), w::GrowthMode::G, 0.0, small);
    CHECK(s.verdict == anisolab::scan::Verdict::Unbounded);
    for (std::size_t i = 0; i < small.size(); ++i) {
      double exact = std::exp(small[i]) - std::exp(-small[i]);
      CHECK(s.values[i] == doctest::Approx(exact).epsilon(1e-8));
    }
  }
}

TEST_CASE("growth scan ratios are scale invariant") {
  std::vector<double> radii = {1, 10, 100, 1000};
  auto base = w::from_expressions(Expr::parse("1/(1+x1^2)", 1), Expr::constant(1.0), 1, 1);
  auto scaled =
      w::from_expressions(Expr::parse("3*(1/(1+x1^2))", 1), Expr::constant(1.0), 1, 1);
  Expr g = Expr::parse("log(1+x1)", 1);
  Expr g3 = Expr::parse("3*log(1+x1)", 1);
  auto s1 = w::growth_scan(base, g, w::GrowthMode::G, 0.0, radii);
  auto s2 = w::growth_scan(scaled, g3, w::GrowthMode::G, 0.0, radii);
  for (std::size_t i = 0; i < radii.size(); ++i)
    CHECK(s1.ratios[i] == doctest::Approx(s2.ratios[i]).epsilon(1e-13));
}

TEST_CASE("sign conditions") {
  CHECK(w::sign_condition(w::nonlinearity("gelfand"), -1.0, 1.0) ==
        w::SignCondition::Nonnegative);
  CHECK(w::sign_condition(w::nonlinearity("allen-cahn"), -1.0, 1.0) ==
        w::SignCondition::Neither);
  w::Nonlinearity neg;
  neg.name = "minus-u";
  neg.f = Expr::parse("-x1", 1);
  neg.fprime = Expr::constant(-1.0);
  neg.F = Expr::parse("-x1^2/2", 1);
  CHECK(w::sign_condition(neg, -1.0, 1.0) == w::SignCondition::TfNonpositive);
}

TEST_CASE("catalog nonlinearities: F' = f and f' = fprime") {
  struct Entry {
    const char* name;
    double p;
    double lo, hi;
  };
  for (Entry e : {Entry{"allen-cahn", 2.0, -2.0, 2.0}, Entry{"gelfand", 2.0, -2.0, 2.0},
                  Entry{"lane-emden", 2.0, -2.0, 2.0}, Entry{"negative-exponent", 2.0, 0.5, 2.0}}) {
    auto nl = w::nonlinearity(e.name, e.p);
    auto dF = nl.F.diff(1);
    const double h = 1e-5;
    for (int i = 0; i <= 40; ++i) {
      double u = e.lo + (e.hi - e.lo) * i / 40.0;
      CHECK(std::abs(dF.eval1(u) - nl.f_at(u)) <= 1e-6 * (1.0 + std::abs(nl.f_at(u))));
      double fd = (nl.f_at(u + h) - nl.f_at(u - h)) / (2.0 * h);
      CHECK(std::abs(nl.fprime_at(u) - fd) <= 1e-6 * (1.0 + std::abs(fd)));
    }
  }
  // the double-well primitive is normalized to vanish in the wells
  auto ac = w::nonlinearity("allen-cahn");
  CHECK(ac.F_at(1.0) == doctest::Approx(0.0));
  CHECK(ac.F_at(-1.0) == doctest::Approx(0.0));
}
