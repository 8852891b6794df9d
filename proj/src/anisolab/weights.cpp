#include "anisolab/weights.hpp"

#include <cmath>
#include <stdexcept>

#include "anisolab/quadrature.hpp"

namespace anisolab::weights {

Weight Weight::from_expr(Expr e) {
  Weight w;
  w.desc_ = e.to_string();
  w.expr_ = std::move(e);
  return w;
}

Weight Weight::from_function(std::function<double(std::span<const double>)> fn,
                             std::string description) {
  Weight w;
  w.fn_ = std::move(fn);
  w.desc_ = std::move(description);
  return w;
}

double Weight::operator()(std::span<const double> xprime) const {
  if (expr_) return expr_->eval(xprime);
  if (fn_) return fn_(xprime);
  throw std::runtime_error("empty weight");
}

AxisAntiderivative::AxisAntiderivative(Expr a) : a_(std::move(a)) {}

double AxisAntiderivative::operator()(double x) const {
  if (x == 0.0) return 0.0;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(x);
    if (it != memo_.end()) return it->second;
  }
  quad::Options opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  double v = quad::integrate([this](double t) { return a_.eval1(t); }, 0.0, x, opt);
  std::lock_guard<std::mutex> lock(mu_);
  memo_.emplace(x, v);
  return v;
}

void WeightSpec::validate_on(const std::vector<std::vector<double>>& axis_samples) const {
  if (static_cast<int>(axis_samples.size()) != d)
    throw std::runtime_error("validate_on: need one sample list per weighted axis");
  std::vector<double> xp(d, 0.0);
  if (d == 0) {
    if (gamma(xp) <= 0.0) throw std::runtime_error("gamma must be positive");
    if (lambda(xp) < 0.0) throw std::runtime_error("lambda must be nonnegative");
    return;
  }
  std::vector<std::size_t> idx(d, 0);
  for (;;) {
    for (int a = 0; a < d; ++a) xp[a] = axis_samples[a][idx[a]];
    if (gamma(xp) <= 0.0)
      throw std::runtime_error("gamma must be positive at every sampled point");
    if (lambda(xp) < 0.0)
      throw std::runtime_error("lambda must be nonnegative at every sampled point");
    int a = d - 1;
    while (a >= 0) {
      if (++idx[a] < axis_samples[a].size()) break;
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
}

WeightSpec from_advection(std::vector<Expr> a, Expr b, int s) {
  const int d = static_cast<int>(a.size());
  if (s < 1) throw std::runtime_error("from_advection: need s >= 1");
  // each a_i must depend on x_i alone; probe by varying the other coordinates
  for (int i = 0; i < d; ++i) {
    std::vector<double> p0(d, 0.3), p1(d, -0.7);
    p1[i] = p0[i] = 0.5;
    if (std::abs(a[i].eval(p0) - a[i].eval(p1)) > 1e-14)
      throw std::runtime_error("from_advection: a_" + std::to_string(i + 1) +
                               " must depend on x" + std::to_string(i + 1) + " only");
  }

  auto anti = std::make_shared<std::vector<std::unique_ptr<AxisAntiderivative>>>();
  anti->reserve(a.size());
  for (auto& ai : a) anti->push_back(std::make_unique<AxisAntiderivative>(ai));

  auto cfun = [anti, d](std::span<const double> xp) {
    double c = 0.0;
    for (int i = 0; i < d; ++i) c += (*(*anti)[i])(xp[i]);
    return c;
  };

  WeightSpec w;
  w.d = d;
  w.s = s;
  std::string adesc = "exp(-sum_i int_0^{x_i} a_i)";
  w.gamma = Weight::from_function([cfun](std::span<const double> xp) { return std::exp(-cfun(xp)); },
                                  adesc);
  Expr bcopy = b;
  w.lambda = Weight::from_function(
      [cfun, bcopy](std::span<const double> xp) { return std::exp(-cfun(xp)) * bcopy.eval(xp); },
      adesc + " * b");
  w.advection = Advection{std::move(a), std::move(b)};
  return w;
}

WeightSpec from_expressions(Expr gamma, Expr lambda, int d, int s) {
  if (d < 0 || s < 1) throw std::runtime_error("weights: need d >= 0 and s >= 1");
  WeightSpec w;
  w.d = d;
  w.s = s;
  w.gamma = Weight::from_expr(std::move(gamma));
  w.lambda = Weight::from_expr(std::move(lambda));
  return w;
}

WeightSpec preset(const std::string& name, int d, int s, double t, double s0) {
  if (name == "unit") {
    WeightSpec w = from_expressions(Expr::constant(1.0), Expr::constant(1.0), d, s);
    w.name = name;
    return w;
  }
  if (d != 1)
    throw std::runtime_error("preset '" + name + "' is one-dimensional in x'");
  if (name == "sech") {
    std::vector<Expr> a;
    a.push_back(Expr::parse("tanh(x1)", 1));
    WeightSpec w = from_advection(std::move(a), Expr::constant(1.0), s);
    w.name = name;
    return w;
  }
  if (name == "rational") {
    std::vector<Expr> a;
    a.push_back(Expr::parse("2*x1/(1+x1^2)", 1));
    WeightSpec w = from_advection(std::move(a), Expr::constant(1.0), s);
    w.name = name;
    return w;
  }
  if (name == "shifted-tanh") {
    if (!(t > std::abs(s0)))
      throw std::runtime_error("shifted-tanh requires t > |s|");
    Expr a1 = Expr::add(Expr::mul(Expr::constant(t), Expr::parse("tanh(x1)", 1)),
                        Expr::constant(s0));
    std::vector<Expr> a;
    a.push_back(std::move(a1));
    WeightSpec w = from_advection(std::move(a), Expr::constant(1.0), s);
    w.name = name;
    return w;
  }
  throw std::runtime_error("unknown weight preset '" + name + "'");
}

// ---------------------------------------------------------------------------

GClassVerdict gclass_check(const Expr& g, double rmax, double threshold) {
  if (rmax <= 10.0) throw std::runtime_error("gclass_check: rmax too small");
  if (g.dim() > 1) throw std::runtime_error("gclass_check: g must be a function of one variable");

  // positivity / monotonicity probe on [1, rmax]
  const int probes = 512;
  double prev = -1.0;
  for (int i = 0; i <= probes; ++i) {
    double r = std::exp(std::log(rmax) * i / probes);  // geometric from 1
    double v = g.eval1(r);
    if (!(v > 0.0)) throw std::runtime_error("gclass_check: g must be positive on [1, Rmax]");
    if (v < prev * (1.0 - 1e-9))
      throw std::runtime_error("gclass_check: g must be nondecreasing on [1, Rmax]");
    prev = v;
  }

  GClassVerdict verdict;
  verdict.rmax = rmax;
  verdict.threshold = threshold;

  // I(R) accumulated over geometrically spaced intervals; integrate in
  // y = log r where the integrand 1/g(e^y) is slowly varying.
  const int per_decade = 4;
  const int steps = std::max(4, static_cast<int>(std::ceil(std::log10(rmax) * per_decade)));
  quad::Options opt;
  opt.rel_tol = 1e-10;
  double acc = 0.0;
  double ylo = 0.0;
  const double ymax = std::log(rmax);
  for (int i = 1; i <= steps; ++i) {
    double yhi = ymax * i / steps;
    acc += quad::integrate([&g](double y) { return 1.0 / g.eval1(std::exp(y)); }, ylo, yhi, opt);
    ylo = yhi;
    verdict.radii.push_back(std::exp(yhi));
    verdict.partial_integrals.push_back(acc);
  }

  // last decade: increment of I over [rmax/10, rmax]
  double i_at_tenth = 0.0;
  {
    quad::Options o2 = opt;
    double y0 = std::log(rmax / 10.0);
    i_at_tenth = acc - quad::integrate(
                           [&g](double y) { return 1.0 / g.eval1(std::exp(y)); }, y0, ymax, o2);
  }
  const double increment = acc - i_at_tenth;
  verdict.tail_slope = increment / std::log(10.0);

  const double g_mid = g.eval1(rmax / 10.0), g_end = g.eval1(rmax);
  verdict.growth_exponent_estimate = std::log(g_end / g_mid) / std::log(10.0);

  if (verdict.tail_slope >= threshold) {
    verdict.membership = GClassVerdict::Membership::Member;
    verdict.member = true;
  } else if (increment < threshold) {
    verdict.membership = GClassVerdict::Membership::NonMember;
    verdict.member = false;
  } else {
    verdict.membership = GClassVerdict::Membership::Inconclusive;
    verdict.member = false;
  }
  return verdict;
}

const char* growth_mode_name(GrowthMode m) {
  switch (m) {
    case GrowthMode::G: return "g";
    case GrowthMode::RG: return "R*g";
    case GrowthMode::R1mEpsG: return "R^(1-eps)*g";
  }
  return "?";
}

scan::EnergyScan growth_scan(const WeightSpec& w, const Expr& g, GrowthMode mode, double epsilon,
                             const std::vector<double>& radii) {
  if (radii.size() < 2) throw std::runtime_error("growth_scan: need at least two radii");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1]) throw std::runtime_error("growth_scan: radii must increase");

  scan::EnergyScan s;
  s.quantity = "int_{B_R} gamma dx'";
  s.envelope = growth_mode_name(mode);
  s.radii = radii;

  quad::Options opt;
  opt.rel_tol = 1e-9;
  for (double R : radii) {
    double mass = quad::ball_integral(
        w.d, R, [&w](std::span<const double> xp) { return w.gamma(xp); }, opt);
    double envelope = g.eval1(R);
    if (mode == GrowthMode::RG) envelope *= R;
    if (mode == GrowthMode::R1mEpsG) envelope *= std::pow(R, 1.0 - epsilon);
    s.values.push_back(mass);
    s.bounds.push_back(envelope);
  }
  scan::finish_scan(s);
  return s;
}

const char* sign_condition_name(SignCondition c) {
  switch (c) {
    case SignCondition::Nonnegative: return "nonnegative";
    case SignCondition::TfNonpositive: return "t_f_nonpositive";
    case SignCondition::Neither: return "neither";
  }
  return "?";
}

SignCondition sign_condition(const Nonlinearity& f, double lo, double hi, int samples) {
  if (!(hi > lo)) throw std::runtime_error("sign_condition: empty range");
  bool nonneg = true, tf_nonpos = true;
  for (int i = 0; i < samples; ++i) {
    double t = lo + (hi - lo) * i / (samples - 1);
    double v = f.f_at(t);
    if (v < 0.0) nonneg = false;
    if (t * v > 0.0) tf_nonpos = false;
    if (!nonneg && !tf_nonpos) return SignCondition::Neither;
  }
  if (nonneg) return SignCondition::Nonnegative;
  return SignCondition::TfNonpositive;
}

Nonlinearity nonlinearity(const std::string& name, double p) {
  Nonlinearity nl;
  nl.name = name;
  if (name == "allen-cahn") {
    nl.f = Expr::parse("x1 - x1^3", 1);
    nl.fprime = Expr::parse("1 - 3*x1^2", 1);
    nl.F = Expr::parse("-(1 - x1^2)^2/4", 1);
    return nl;
  }
  if (name == "gelfand") {
    nl.f = Expr::parse("exp(x1)", 1);
    nl.fprime = nl.f;
    nl.F = nl.f;
    return nl;
  }
  const Expr u = Expr::variable(1, 1);
  if (name == "lane-emden") {
    nl.f = Expr::pow(u, Expr::constant(p));
    nl.fprime = Expr::mul(Expr::constant(p), Expr::pow(u, Expr::constant(p - 1.0)));
    nl.F = Expr::div(Expr::pow(u, Expr::constant(p + 1.0)), Expr::constant(p + 1.0));
    return nl;
  }
  if (name == "negative-exponent") {
    nl.f = Expr::neg(Expr::pow(u, Expr::constant(-p)));
    nl.fprime = Expr::mul(Expr::constant(p), Expr::pow(u, Expr::constant(-p - 1.0)));
    if (p == 1.0)
      nl.F = Expr::neg(Expr::call(expr::Func::Log, u));
    else
      nl.F = Expr::neg(Expr::div(Expr::pow(u, Expr::constant(1.0 - p)), Expr::constant(1.0 - p)));
    return nl;
  }
  if (name == "zero") {
    nl.f = Expr::constant(0.0);
    nl.fprime = Expr::constant(0.0);
    nl.F = Expr::constant(0.0);
    return nl;
  }
  throw std::runtime_error("unknown nonlinearity '" + name + "'");
}

}  // namespace anisolab::weights
