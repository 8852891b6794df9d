#include <doctest.h>

#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "anisolab/expr.hpp"

using anisolab::expr::EvalError;
using anisolab::expr::Expr;
using anisolab::expr::ParseError;

TEST_CASE("parse basics and precedence") {
  Expr e = Expr::parse("tanh(x1)", 1);
  CHECK(e.same_tree(Expr::call(anisolab::expr::Func::Tanh, Expr::variable(1, 1))));

  CHECK(Expr::parse("2*x1/(1+x1^2)", 1).eval1(1.0) == doctest::Approx(1.0).epsilon(1e-15));

  // ^ binds above unary minus, right-associative; *,/ left-associative
  CHECK(Expr::parse("-x1^2", 1).eval1(2.0) == doctest::Approx(-4.0));
  CHECK(Expr::parse("2^3^2", 0).eval1(0.0) == doctest::Approx(512.0));
  CHECK(Expr::parse("2-3-4", 0).eval1(0.0) == doctest::Approx(-5.0));
  CHECK(Expr::parse("12/3/2", 0).eval1(0.0) == doctest::Approx(2.0));
  CHECK(Expr::parse("-2^2", 0).eval1(0.0) == doctest::Approx(-4.0));
}

TEST_CASE("parse errors carry byte offsets") {
  CHECK_THROWS_AS(Expr::parse("", 1), ParseError);

  try {
    Expr::parse("exp(-x1", 1);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 7);  // end of input
  }

  try {
    Expr::parse("x1 + foo(x1)", 1);
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 5);
  }

  CHECK_THROWS_AS(Expr::parse("x3", 2), ParseError);
  CHECK_THROWS_AS(Expr::parse("x1 +", 1), ParseError);
}

TEST_CASE("evaluation and domain errors") {
  CHECK(Expr::parse("1/cosh(x1)", 1).eval1(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(Expr::parse("log(1+x1)", 1).eval1(-2.0), EvalError);
  CHECK_THROWS_AS(Expr::parse("1/x1", 1).eval1(0.0), EvalError);
  CHECK_THROWS_AS(Expr::parse("x1^0.5", 1).eval1(-1.0), EvalError);
  CHECK_THROWS_AS(Expr::parse("sqrt(x1)", 1).eval1(-1.0), EvalError);

  // independent high-precision oracle for 1/sqrt(2)
  double got = Expr::parse("(1+x1^2)^(-0.5)", 1).eval1(1.0);
  CHECK(got == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));

  // determinism: identical expression, identical input, identical bits
  Expr a = Expr::parse("sin(x1)*exp(x1/3) + tanh(x1^2)", 1);
  Expr b = Expr::parse("sin(x1)*exp(x1/3) + tanh(x1^2)", 1);
  CHECK(a.eval1(0.7531) == b.eval1(0.7531));
}

TEST_CASE("symbolic derivatives") {
  CHECK(Expr::parse("x1^2", 1).diff(1).eval1(3.0) == doctest::Approx(6.0));
  CHECK(Expr::parse("tanh(x1)", 1).diff(1).eval1(0.0) == doctest::Approx(1.0));

  // second derivative of log(1+x1^2) at 1: exact value 2(1-x^2)/(1+x^2)^2 = 0,
  // cross-checked by a central difference of the first derivative
  Expr first = Expr::parse("log(1+x1^2)", 1).diff(1);
  Expr second = first.diff(1);
  double fd = (first.eval1(1.0 + 1e-5) - first.eval1(1.0 - 1e-5)) / 2e-5;
  CHECK(std::abs(second.eval1(1.0)) <= 1e-12);
  CHECK(std::abs(second.eval1(1.0) - fd) <= 1e-6);
}

namespace {

struct Generator {
  std::mt19937 rng;
  explicit Generator(unsigned seed) : rng(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  Expr make(int depth, int dim) {
    if (depth == 0 || pick(4) == 0) {
      if (pick(2) == 0) return Expr::variable(1 + pick(dim), dim);
      return Expr::constant(std::round(uniform(-2.5, 2.5) * 16.0) / 16.0);
    }
    switch (pick(8)) {
      case 0: return Expr::add(make(depth - 1, dim), make(depth - 1, dim));
      case 1: return Expr::sub(make(depth - 1, dim), make(depth - 1, dim));
      case 2: return Expr::mul(make(depth - 1, dim), make(depth - 1, dim));
      case 3: return Expr::div(make(depth - 1, dim), make(depth - 1, dim));
      case 4: {
        double es[] = {2.0, 3.0, -1.0, 0.5};
        return Expr::pow(make(depth - 1, dim), Expr::constant(es[pick(4)]));
      }
      case 5: return Expr::neg(make(depth - 1, dim));
      default: {
        using anisolab::expr::Func;
        Func fs[] = {Func::Exp, Func::Log,  Func::Tanh, Func::Cosh, Func::Sinh,
                     Func::Sqrt, Func::Abs, Func::Sin,  Func::Cos};
        return Expr::call(fs[pick(9)], make(depth - 1, dim));
      }
    }
  }
};

}  // namespace

TEST_CASE("property: symbolic derivative matches central differences") {
  Generator gen(20240811);
  const int dim = 2;
  const double h = 1e-5;
  int accepted = 0, attempts = 0;
  while (accepted < 1000 && attempts < 40000) {
    ++attempts;
    Expr e = gen.make(4, dim);
    double x[2] = {gen.uniform(-2.0, 2.0), gen.uniform(-2.0, 2.0)};
    int var = 1 + gen.pick(dim);
    if (e.dim() < var) continue;
    try {
      double val = e.eval(std::span<const double>(x, 2));
      Expr de = e.diff(var);
      double sym = de.eval(std::span<const double>(x, 2));
      double xp[2] = {x[0], x[1]};
      auto fd_at = [&](double step) {
        xp[var - 1] = x[var - 1] + step;
        double up = e.eval(std::span<const double>(xp, 2));
        xp[var - 1] = x[var - 1] - step;
        double dn = e.eval(std::span<const double>(xp, 2));
        xp[var - 1] = x[var - 1];
        return (up - dn) / (2.0 * step);
      };
      double fd = fd_at(h);
      double fd2 = fd_at(2.0 * h);
      // keep the scales where double-precision differences are meaningful
      if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
      if (std::abs(val) > 1e4 || std::abs(sym) > 1e4) continue;
      // drop points where the difference quotient itself is unstable
      if (std::abs(fd - fd2) > 1e-7 * (1.0 + std::abs(fd))) continue;
      ++accepted;
      CHECK(std::abs(sym - fd) <= 1e-6 * (1.0 + std::abs(sym)));
    } catch (const EvalError&) {
      continue;  // domain violation at the sampled point
    }
  }
  CHECK(accepted >= 1000);
}

TEST_CASE("expressions evaluate concurrently without interference") {
  Expr e = Expr::parse("tanh(x1)*exp(-x2^2) + x1/(2+cos(x2))", 2);
  double expected[4];
  const double pts[4][2] = {{0.3, -0.7}, {1.1, 0.2}, {-2.0, 0.9}, {0.0, 0.0}};
  for (int i = 0; i < 4; ++i) expected[i] = e.eval(std::span<const double>(pts[i], 2));

  std::vector<std::thread> workers;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t)
    workers.emplace_back([&, t] {
      for (int it = 0; it < 20000; ++it) {
        double got = e.eval(std::span<const double>(pts[t], 2));
        if (got != expected[t]) ++mismatches;
      }
    });
  for (auto& w : workers) w.join();
  CHECK(mismatches == 0);
}

TEST_CASE("property: parse of the printed form reproduces the tree") {
  Generator gen(7);
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    Expr e = gen.make(4, 3);
    Expr back = Expr::parse(e.to_string(), 3);
    CHECK(back.same_tree(e));
    int var = 1 + gen.pick(3);
    if (e.dim() >= var) {
      Expr de = e.diff(var);
      Expr dback = Expr::parse(de.to_string(), 3);
      CHECK(dback.same_tree(de));
    }
    ++checked;
  }
  CHECK(checked == 500);

  // and for source-level round trips
  for (const char* src : {"tanh(x1) + x2*x3 - 0.25", "x1^2^3/(1 - x2)", "-x1^2 + abs(x2)",
                          "exp(-x1^2/2)*cos(3*x2)"}) {
    Expr e = Expr::parse(src, 3);
    CHECK(Expr::parse(e.to_string(), 3).same_tree(e));
  }
}
