#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anisolab/expr.hpp"
#include "anisolab/scan.hpp"

namespace anisolab::weights {

using expr::Expr;

/// Scalar function of the weighted coordinates x' = (x1..xd). Either a
/// closed-form expression or a numerically built one (advection form); both
/// evaluate deterministically and are safe for concurrent use.
class Weight {
public:
  Weight() = default;

  static Weight from_expr(Expr e);
  static Weight from_function(std::function<double(std::span<const double>)> fn,
                              std::string description);

  double operator()(std::span<const double> xprime) const;
  double at1(double x) const { return (*this)(std::span<const double>(&x, 1)); }

  /// Closed-form tree when available (advection-built weights have none).
  const std::optional<Expr>& closed_form() const { return expr_; }
  const std::string& description() const { return desc_; }

private:
  std::optional<Expr> expr_;
  std::function<double(std::span<const double>)> fn_;
  std::string desc_;
};

/// Memoized antiderivative C(x) = int_0^x a(t) dt of a single-axis advection
/// component. Grid axes hit the memo; arbitrary points fall back to adaptive
/// quadrature.
class AxisAntiderivative {
public:
  explicit AxisAntiderivative(Expr a);
  double operator()(double x) const;
  const Expr& integrand() const { return a_; }

private:
  Expr a_;
  mutable std::map<double, double> memo_;
  mutable std::mutex mu_;
};

struct Advection {
  std::vector<Expr> a;  // one per weighted axis, a_i depends on x_i only
  Expr b;
};

/// Weight pair (gamma, lambda) over x' with the dimension split.
struct WeightSpec {
  int d = 0;
  int s = 1;
  Weight gamma;
  Weight lambda;
  std::optional<Advection> advection;  // provenance when built from (a, b)
  std::string name;                    // preset name when applicable

  int n() const { return d + s; }

  double gamma_at(std::span<const double> xprime) const { return gamma(xprime); }
  double lambda_at(std::span<const double> xprime) const { return lambda(xprime); }

  /// Check gamma > 0 and lambda >= 0 on the given per-axis sample values
  /// (tensor lattice over the x' axes). Throws on violation.
  void validate_on(const std::vector<std::vector<double>>& axis_samples) const;
};

/// Build the divergence-form pair from advection data: c(x') = sum_i C_i(x_i),
/// gamma = e^{-c}, lambda = e^{-c} b. Each a_i must depend on x_i only.
WeightSpec from_advection(std::vector<Expr> a, Expr b, int s);

/// Closed-form pair.
WeightSpec from_expressions(Expr gamma, Expr lambda, int d, int s);

/// Named presets: "unit", "sech", "rational", "shifted-tanh" (params t, s0).
WeightSpec preset(const std::string& name, int d, int s, double t = 0.0, double s0 = 0.0);

// ---------------------------------------------------------------------------

struct GClassVerdict {
  enum class Membership { Member, NonMember, Inconclusive };
  Membership membership = Membership::Inconclusive;
  bool member = false;
  std::vector<double> radii;             // geometric scan points
  std::vector<double> partial_integrals; // I(R) = int_1^R dr/(r g(r))
  double tail_slope = 0.0;               // dI/dlogR over the last decade
  double growth_exponent_estimate = 0.0; // dlog g / dlog R at the tail
  double rmax = 0.0;
  double threshold = 0.0;
};

/// Scan the divergence integral of 1/(r g(r)). Declares membership when I(R)
/// still grows at least logarithmically over the last decade (tail slope >=
/// threshold), non-membership when the last-decade increment has gone below
/// threshold, and inconclusive in between. A scan cannot prove divergence;
/// the bands make the desk-scale semantics explicit.
GClassVerdict gclass_check(const Expr& g, double rmax, double threshold);

enum class GrowthMode { G, RG, R1mEpsG };

const char* growth_mode_name(GrowthMode m);

/// ratio(R) = int_{B_R^d} gamma dx' / envelope(R) with envelope g, R*g or
/// R^{1-eps}*g. Balls are taken in the x' space.
scan::EnergyScan growth_scan(const WeightSpec& w, const Expr& g, GrowthMode mode, double epsilon,
                             const std::vector<double>& radii);

enum class SignCondition { Nonnegative, TfNonpositive, Neither };

const char* sign_condition_name(SignCondition c);

// ---------------------------------------------------------------------------

/// Nonlinearity f with derivative and primitive, normalization fixed per
/// catalog entry (Allen-Cahn has F(1) = 0).
struct Nonlinearity {
  std::string name;
  Expr f;       // in u (= x1)
  Expr fprime;
  Expr F;
  double f_at(double u) const { return f.eval1(u); }
  double fprime_at(double u) const { return fprime.eval1(u); }
  double F_at(double u) const { return F.eval1(u); }
};

/// Catalog: "allen-cahn", "gelfand", "lane-emden" (exponent p), "zero",
/// "negative-exponent" (exponent p).
Nonlinearity nonlinearity(const std::string& name, double p = 2.0);

/// Sample f on [lo, hi] (inclusive, `samples` points) and classify its sign
/// behaviour. "Neither" is definitive only up to the sampling resolution.
SignCondition sign_condition(const Nonlinearity& f, double lo, double hi, int samples = 2001);

}  // namespace anisolab::weights
