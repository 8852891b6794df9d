#include "anisolab/liouville.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anisolab/quadrature.hpp"
#include "anisolab/solver.hpp"

namespace anisolab::liouville {

namespace {

bool next_index(std::vector<int>& idx, const std::vector<int>& bound) {
  int a = static_cast<int>(idx.size()) - 1;
  while (a >= 0) {
    if (++idx[a] < bound[a]) return true;
    idx[a] = 0;
    --a;
  }
  return false;
}

std::vector<double> per_node(const weights::Weight& w, const grid::Grid& g) {
  const std::vector<double> lat = grid::eval_on_xprime_lattice(w, g);
  std::vector<double> out(g.size());
  std::vector<int> idx(g.n(), 0);
  std::size_t flat = 0;
  do {
    std::size_t xp = 0;
    for (int a = 0; a < g.d; ++a) xp = xp * static_cast<std::size_t>(g.N[a]) + static_cast<std::size_t>(idx[a]);
    out[flat++] = lat[xp];
  } while (next_index(idx, g.N));
  return out;
}

double sup_norm(const grid::GridField& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

double grad_sup_norm(const grid::GridField& u) {
  grid::SplitGradients gr = grid::split_gradients(u);
  double m = 0.0;
  for (std::size_t i = 0; i < u.values().size(); ++i) {
    double g2 = 0.0;
    for (const auto& f : gr.xprime) g2 += f[i] * f[i];
    for (const auto& f : gr.xsecond) g2 += f[i] * f[i];
    m = std::max(m, g2);
  }
  return std::sqrt(m);
}

// multilinear interpolation of a node field at an arbitrary point inside the box
double interp(const grid::GridField& f, std::span<const double> x) {
  const grid::Grid& g = f.grid();
  const int n = g.n();
  std::size_t base = 0;
  double frac[4];
  for (int a = 0; a < n; ++a) {
    double t = (x[a] + g.L[a]) / g.h(a);
    int i = static_cast<int>(std::floor(t));
    i = std::clamp(i, 0, g.N[a] - 2);
    frac[a] = std::clamp(t - i, 0.0, 1.0);
    base += static_cast<std::size_t>(i) * g.stride(a);
  }
  const int corners = 1 << n;
  double acc = 0.0;
  for (int k = 0; k < corners; ++k) {
    double w = 1.0;
    std::size_t off = base;
    for (int a = 0; a < n; ++a) {
      if (k & (1 << a)) {
        w *= frac[a];
        off += g.stride(a);
      } else {
        w *= 1.0 - frac[a];
      }
    }
    acc += w * f[off];
  }
  return acc;
}

// surface quadrature of a node-field integrand over the sphere |x| = R
double sphere_quadrature(const std::function<double(std::span<const double>)>& f, double R,
                         int n) {
  if (n == 2) {
    const int M = 2048;
    double acc = 0.0;
    for (int i = 0; i < M; ++i) {
      double th = 2.0 * M_PI * i / M;
      double x[2] = {R * std::cos(th), R * std::sin(th)};
      acc += f(std::span<const double>(x, 2));
    }
    return acc * (2.0 * M_PI * R / M);
  }
  if (n == 3) {
    const int Mphi = 128, Mth = 256;
    double acc = 0.0;
    for (int i = 0; i < Mphi; ++i) {
      double phi = M_PI * (i + 0.5) / Mphi;  // polar angle, midpoint rule
      double ring = 0.0;
      for (int j = 0; j < Mth; ++j) {
        double th = 2.0 * M_PI * j / Mth;
        double x[3] = {R * std::sin(phi) * std::cos(th), R * std::sin(phi) * std::sin(th),
                       R * std::cos(phi)};
        ring += f(std::span<const double>(x, 3));
      }
      acc += ring * std::sin(phi);
    }
    return acc * (2.0 * M_PI * M_PI * R * R / (Mphi * Mth));
  }
  throw std::runtime_error("sphere_quadrature: supports n in {2,3}");
}

}  // namespace

grid::GridField energy_density(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                               const grid::GridField& u) {
  const grid::Grid& g = u.grid();
  const std::vector<double> gam = per_node(w.gamma, g);
  const std::vector<double> lam = per_node(w.lambda, g);
  const double F1 = f.F_at(1.0);
  grid::SplitGradients gr = grid::split_gradients(u);
  grid::GridField out(u.grid_ptr());
  for (std::size_t i = 0; i < gam.size(); ++i) {
    double g2 = 0.0;
    for (const auto& fi : gr.xprime) g2 += fi[i] * fi[i];
    for (const auto& fi : gr.xsecond) g2 += fi[i] * fi[i];
    out[i] = 0.5 * gam[i] * g2 - lam[i] * (f.F_at(u[i]) - F1);
  }
  return out;
}

double energy(const weights::WeightSpec& w, const weights::Nonlinearity& f,
              const grid::GridField& u, double R, bool* truncated) {
  grid::GridField e = energy_density(w, f, u);
  grid::VolumeIntegral v = grid::volume_integral(e, R);
  if (truncated) *truncated = v.truncated;
  return v.value;
}

EnergyBoundScan energy_bound_scan(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                                  const grid::GridField& u, EnergyBoundMode mode,
                                  const std::vector<double>& radii) {
  if (radii.size() < 2) throw std::runtime_error("energy_bound_scan: need at least two radii");
  const grid::Grid& g = u.grid();

  EnergyBoundScan out;
  out.k_formula = grad_sup_norm(u) * sup_norm(u);
  scan::EnergyScan& s = out.scan;
  s.radii = radii;

  if (mode == EnergyBoundMode::SurfaceA) {
    if (!(solver::min_interior_dn(u) > 0.0))
      throw std::runtime_error("energy_bound_scan: mode A requires a monotone field");
    s.quantity = "E_R(u)";
    s.envelope = "int_{dB_R} gamma dS";
    grid::GridField e = energy_density(w, f, u);
    for (double R : radii) {
      grid::VolumeIntegral vi = grid::volume_integral(e, R);
      if (vi.truncated) s.truncated = true;
      double surf = grid::surface_integral(
          [&w](std::span<const double> xp) { return w.gamma(xp); }, R, g.d, g.s);
      s.values.push_back(vi.value);
      s.bounds.push_back(surf);
    }
  } else {
    s.quantity = "int_{B_R} gamma |grad u|^2";
    s.envelope = "R^s int_{B_R^d} (lambda + R^-2 gamma) dx'";
    const std::vector<double> gam = per_node(w.gamma, g);
    grid::SplitGradients gr = grid::split_gradients(u);
    grid::GridField q(u.grid_ptr());
    for (std::size_t i = 0; i < gam.size(); ++i) {
      double g2 = 0.0;
      for (const auto& fi : gr.xprime) g2 += fi[i] * fi[i];
      for (const auto& fi : gr.xsecond) g2 += fi[i] * fi[i];
      q[i] = gam[i] * g2;
    }
    quad::Options opt;
    opt.rel_tol = 1e-9;
    for (double R : radii) {
      grid::VolumeIntegral vi = grid::volume_integral(q, R);
      if (vi.truncated) s.truncated = true;
      double denom = quad::ball_integral(
          g.d, R,
          [&w, R](std::span<const double> xp) {
            return w.lambda(xp) + w.gamma(xp) / (R * R);
          },
          opt);
      s.values.push_back(vi.value);
      s.bounds.push_back(std::pow(R, g.s) * denom);
    }
  }
  scan::finish_scan(s);
  return out;
}

ShiftedEnergyReport shifted_energy_check(const weights::WeightSpec& w,
                                         const weights::Nonlinearity& f, const grid::GridField& u,
                                         const std::vector<double>& t_list, double R) {
  const grid::Grid& g = u.grid();
  const int n = g.n();
  if (n != 2 && n != 3)
    throw std::runtime_error("shifted_energy_check: surface quadrature supports n in {2,3}");
  if (!(solver::min_interior_dn(u) > 0.0))
    throw std::runtime_error("shifted_energy_check: requires a monotone field");

  ShiftedEnergyReport rep;
  rep.k_constant = grad_sup_norm(u) * sup_norm(u);
  const double hn = g.h(n - 1);
  const double surf_gamma = grid::surface_integral(
      [&w](std::span<const double> xp) { return w.gamma(xp); }, R, g.d, g.s);

  bool trunc = false;
  const double e_u = energy(w, f, u, R, &trunc);
  rep.truncated = trunc;

  double prev_e = std::numeric_limits<double>::infinity();
  rep.decreasing = true;
  for (double t : t_list) {
    ShiftedEnergyPoint pt;
    pt.t = t;
    pt.energy_u = e_u;
    grid::GridField ut = solver::shift(u, t);
    pt.energy_shifted = energy(w, f, ut, R);
    pt.surface_term = rep.k_constant * surf_gamma;
    pt.slack = pt.energy_shifted + pt.surface_term - e_u;
    pt.inequality_ok = pt.slack >= 0.0;

    // dE/dt at this t: central difference over one grid shift vs the
    // boundary formula evaluated on u^t
    grid::GridField up = solver::shift(u, t + hn);
    grid::GridField um = solver::shift(u, t - hn);
    pt.dE_fd = (energy(w, f, up, R) - energy(w, f, um, R)) / (2.0 * hn);

    grid::SplitGradients gr = grid::split_gradients(ut);
    const grid::GridField& dn = gr.xsecond.back();
    std::vector<const grid::GridField*> all;
    for (const auto& fi : gr.xprime) all.push_back(&fi);
    for (const auto& fi : gr.xsecond) all.push_back(&fi);
    pt.dE_surface = sphere_quadrature(
        [&](std::span<const double> x) {
          double nu_grad = 0.0;
          for (int a = 0; a < n; ++a) nu_grad += (x[a] / R) * interp(*all[a], x);
          std::vector<double> xp(x.begin(), x.begin() + g.d);
          return w.gamma(xp) * nu_grad * interp(dn, x);
        },
        R, n);

    if (pt.energy_shifted > prev_e + 1e-12 * (1.0 + std::abs(prev_e))) rep.decreasing = false;
    prev_e = pt.energy_shifted;
    rep.points.push_back(pt);
  }
  return rep;
}

RatioReport ratio_diagnostic(const weights::WeightSpec& w, const grid::GridField& u, double eps_m,
                             double theta, int boundary_margin) {
  const grid::Grid& g = u.grid();
  const int n = g.n();
  const int axis_n = n - 1;
  RatioReport rep;
  rep.eps_m = eps_m;
  rep.theta = theta > 0.0 ? theta : 10.0 * g.h(axis_n);
  rep.boundary_margin = boundary_margin;

  std::vector<grid::GridField> phi;  // derivatives over x'' axes
  for (int a = g.d; a < n; ++a) phi.push_back(grid::axis_derivative(u, a));
  const grid::GridField& phin = phi.back();

  // trusted set by the eps_m criterion alone (reported fraction), and the
  // margin-trimmed subset actually used for the statistics
  std::vector<std::uint8_t> stat_ok(g.size(), 0);
  std::size_t trusted = 0;
  {
    std::vector<int> idx(n, 0);
    std::size_t flat = 0;
    do {
      if (phin[flat] > eps_m) {
        ++trusted;
        bool deep = true;
        for (int a = 0; a < n && deep; ++a)
          if (idx[a] < boundary_margin || idx[a] > g.N[a] - 1 - boundary_margin) deep = false;
        if (deep) stat_ok[flat] = 1;
      }
      ++flat;
    } while (next_index(idx, g.N));
  }
  rep.trusted_fraction = static_cast<double>(trusted) / static_cast<double>(g.size());
  rep.unreliable = rep.trusted_fraction < 0.5;

  const std::vector<double> gam = per_node(w.gamma, g);

  // x'-variation probe
  for (int a = 0; a < g.d && !rep.varies_in_xprime; ++a) {
    grid::GridField da = grid::axis_derivative(u, a);
    for (std::size_t i = 0; i < da.values().size(); ++i)
      if (stat_ok[i] && std::abs(da[i]) > eps_m) {
        rep.varies_in_xprime = true;
        break;
      }
  }

  int nonconstant = 0;
  std::vector<double> kvec;
  for (int j = 0; j + 1 < g.s; ++j) {
    RatioDirection dir;
    dir.axis = g.d + j + 1;  // 1-based
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double cov = 0.0, var = 0.0;
    grid::GridField sigma(u.grid_ptr());
    for (std::size_t i = 0; i < sigma.values().size(); ++i) {
      if (stat_ok[i]) {
        sigma[i] = phi[j][i] / phin[i];
        lo = std::min(lo, sigma[i]);
        hi = std::max(hi, sigma[i]);
        cov += phi[j][i] * phin[i];
        var += phin[i] * phin[i];
      }
    }
    dir.spread = hi >= lo ? hi - lo : 0.0;
    dir.k_value = var > 0.0 ? cov / var : 0.0;
    kvec.push_back(dir.k_value);

    // div(gamma phi_n^2 grad sigma): flux form over nodes whose axis
    // neighbors all carry statistics
    double worst = 0.0;
    std::vector<int> idx(n, 0);
    std::size_t flat = 0;
    do {
      bool ok = stat_ok[flat] != 0;
      for (int a = 0; a < n && ok; ++a) {
        const std::size_t st = g.stride(a);
        if (idx[a] == 0 || idx[a] == g.N[a] - 1 || !stat_ok[flat + st] || !stat_ok[flat - st])
          ok = false;
      }
      if (ok) {
        double acc = 0.0;
        for (int a = 0; a < n; ++a) {
          const std::size_t st = g.stride(a);
          const double wc = gam[flat] * phin[flat] * phin[flat];
          const double wp = 0.5 * (wc + gam[flat + st] * phin[flat + st] * phin[flat + st]);
          const double wm = 0.5 * (wc + gam[flat - st] * phin[flat - st] * phin[flat - st]);
          acc += (wp * (sigma[flat + st] - sigma[flat]) - wm * (sigma[flat] - sigma[flat - st])) /
                 (g.h(a) * g.h(a));
        }
        worst = std::max(worst, std::abs(acc));
      }
      ++flat;
    } while (next_index(idx, g.N));
    dir.divergence_residual = worst;

    if (dir.spread > rep.theta) ++nonconstant;
    rep.directions.push_back(dir);
  }
  kvec.push_back(1.0);  // sigma_n
  rep.k = std::move(kvec);

  rep.m_estimate = 1 + nonconstant + (rep.varies_in_xprime ? 1 : 0);
  return rep;
}

scan::EnergyScan gradient_growth_scan(const weights::WeightSpec& w, const grid::GridField& u,
                                      const expr::Expr& g_expr, ScanRegion region,
                                      const std::vector<double>& radii) {
  const grid::Grid& g = u.grid();
  const std::vector<double> gam = per_node(w.gamma, g);
  grid::SplitGradients gr = grid::split_gradients(u);
  grid::GridField q(u.grid_ptr());
  for (std::size_t i = 0; i < gam.size(); ++i) {
    double g2 = 0.0;
    for (const auto& fi : gr.xsecond) g2 += fi[i] * fi[i];
    q[i] = gam[i] * g2;
  }
  scan::EnergyScan s;
  s.quantity = region == ScanRegion::Annulus ? "int_{B_2R\\B_R} gamma |grad_{x''} u|^2"
                                             : "int_{B_R} gamma |grad_{x''} u|^2";
  s.envelope = "R^2 g(R)";
  s.radii = radii;
  for (double R : radii) {
    double val;
    if (region == ScanRegion::Annulus) {
      grid::VolumeIntegral outer = grid::volume_integral(q, 2.0 * R);
      grid::VolumeIntegral inner = grid::volume_integral(q, R);
      if (outer.truncated) s.truncated = true;
      val = outer.value - inner.value;
    } else {
      grid::VolumeIntegral vi = grid::volume_integral(q, R);
      if (vi.truncated) s.truncated = true;
      val = vi.value;
    }
    s.values.push_back(val);
    s.bounds.push_back(R * R * g_expr.eval1(R));
  }
  scan::finish_scan(s);
  return s;
}

MoschiniReport moschini_verify(double R0, const std::vector<double>& radii) {
  if (!(R0 > std::exp(0.75)))
    throw std::runtime_error("moschini_verify: requires R0 > e^{3/4}");
  MoschiniReport rep;
  rep.r0 = R0;

  using expr::Expr;
  const Expr r = Expr::variable(1, 1);
  const Expr inner = Expr::add(
      Expr::add(Expr::constant(std::log(R0)),
                Expr::div(Expr::pow(r, Expr::constant(2.0)), Expr::constant(R0 * R0))),
      Expr::sub(Expr::neg(Expr::div(Expr::pow(r, Expr::constant(4.0)),
                                    Expr::constant(4.0 * R0 * R0 * R0 * R0))),
                Expr::constant(0.75)));
  const Expr outer = Expr::parse("log(x1)", 1);

  const Expr d_inner = inner.diff(1);
  const Expr d_outer = outer.diff(1);
  rep.value_match_residual = std::abs(inner.eval1(R0) - outer.eval1(R0));
  rep.slope_match_residual = std::abs(d_inner.eval1(R0) - d_outer.eval1(R0));
  rep.c1_ok = rep.value_match_residual <= 1e-12 * (1.0 + std::abs(std::log(R0))) &&
              rep.slope_match_residual <= 1e-12;

  // planar radial laplacian sigma'' + sigma'/r; at r = 0 the limit is
  // 2 sigma''(0)
  const Expr dd_inner = d_inner.diff(1);
  const Expr dd_outer = d_outer.diff(1);
  rep.min_inner_laplacian = std::numeric_limits<double>::infinity();
  const int samples = 1000;
  for (int i = 0; i <= samples; ++i) {
    double rr = R0 * i / samples;
    double lap = rr == 0.0 ? 2.0 * dd_inner.eval1(0.0)
                           : dd_inner.eval1(rr) + d_inner.eval1(rr) / rr;
    rep.min_inner_laplacian = std::min(rep.min_inner_laplacian, lap);
  }
  rep.max_outer_laplacian = 0.0;
  for (int i = 1; i <= samples; ++i) {
    double rr = R0 + (100.0 * R0 - R0) * i / samples;
    double lap = dd_outer.eval1(rr) + d_outer.eval1(rr) / rr;
    rep.max_outer_laplacian = std::max(rep.max_outer_laplacian, std::abs(lap));
  }
  rep.subsolution_ok = rep.min_inner_laplacian >= -1e-12 && rep.max_outer_laplacian <= 1e-12;

  auto sigma_at = [&](double rr) {
    return rr < R0 ? inner.eval1(rr) : outer.eval1(rr);
  };
  scan::EnergyScan& s = rep.annulus_scan;
  s.quantity = "int_{B_2R\\B_R} sigma^2";
  s.envelope = "R^2 log^2 R";
  s.radii = radii;
  quad::Options opt;
  opt.rel_tol = 1e-10;
  for (double R : radii) {
    double val = quad::integrate(
        [&](double rr) { return 2.0 * M_PI * rr * sigma_at(rr) * sigma_at(rr); }, R, 2.0 * R,
        opt);
    s.values.push_back(val);
    double lr = std::log(R);
    s.bounds.push_back(R * R * lr * lr);
  }
  scan::finish_scan(s);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = s.tail_begin; i < s.ratios.size(); ++i) {
    lo = std::min(lo, s.ratios[i]);
    hi = std::max(hi, s.ratios[i]);
  }
  rep.tail_spread = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
  rep.growth_ok = rep.tail_spread <= 0.10;
  return rep;
}

RemarkReport remark_verify(int n, const std::vector<double>& radii) {
  if (n < 4) throw std::runtime_error("remark_verify: requires n >= 4");
  RemarkReport rep;
  rep.n = n;

  using expr::Expr;
  const Expr base = Expr::parse("1 + x1^2", 1);
  const double eh = -(2.0 * n - 5.0) / 2.0;
  const double es = (n - 3.0) / 2.0;
  const Expr h = Expr::pow(base, Expr::constant(eh));
  const Expr sigma = Expr::pow(base, Expr::constant(es));
  const Expr ref = Expr::pow(base, Expr::constant(-0.5));

  rep.max_identity_residual = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    double rr = std::pow(10.0, -3.0 + 6.0 * i / 1000.0);
    double lhs = h.eval1(rr) * sigma.eval1(rr) * sigma.eval1(rr);
    double want = ref.eval1(rr);
    rep.max_identity_residual =
        std::max(rep.max_identity_residual, std::abs(lhs - want) / want);
  }
  rep.identity_ok = rep.max_identity_residual <= 1e-12;

  // sigma div(h grad sigma) through the radial form (h r^{n-1} sigma')' / r^{n-1}
  const Expr rpow = Expr::pow(Expr::variable(1, 1), Expr::constant(static_cast<double>(n - 1)));
  const Expr flux = Expr::mul(Expr::mul(h, rpow), sigma.diff(1));
  const Expr dflux = flux.diff(1);
  rep.min_sigma_div = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    double rr = std::pow(10.0, -2.0 + 5.0 * i / 999.0);
    double div = dflux.eval1(rr) / rpow.eval1(rr);
    rep.min_sigma_div = std::min(rep.min_sigma_div, sigma.eval1(rr) * div);
  }
  rep.subsolution_ok = rep.min_sigma_div >= -1e-10;

  const double omega =
      2.0 * std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0);  // unit sphere area in R^n
  scan::EnergyScan& s = rep.ball_scan;
  s.quantity = "int_{B_R} h sigma^2";
  s.envelope = "R^{n-1}";
  s.radii = radii;
  quad::Options opt;
  opt.rel_tol = 1e-10;
  for (double R : radii) {
    double val = omega * quad::integrate(
                             [&](double rr) {
                               return std::pow(rr, n - 1) * h.eval1(rr) * sigma.eval1(rr) *
                                      sigma.eval1(rr);
                             },
                             0.0, R, opt);
    s.values.push_back(val);
    s.bounds.push_back(std::pow(R, n - 1));
  }
  scan::finish_scan(s);
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t i = s.tail_begin; i < s.ratios.size(); ++i) {
    lo = std::min(lo, s.ratios[i]);
    hi = std::max(hi, s.ratios[i]);
  }
  rep.tail_spread = lo > 0.0 ? hi / lo - 1.0 : std::numeric_limits<double>::infinity();
  rep.growth_ok = rep.tail_spread <= 0.05;
  return rep;
}

grid::GridField reflect_negate(const grid::GridField& u) {
  const grid::Grid& g = u.grid();
  const int n = g.n();
  const int axis = n - 1;
  const std::size_t st = g.stride(axis);
  const int Na = g.N[axis];
  grid::GridField out(u.grid_ptr());
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  std::span<const double> uv = u.values();
  do {
    const std::size_t base = flat - static_cast<std::size_t>(idx[axis]) * st;
    out[flat] = -uv[base + static_cast<std::size_t>(Na - 1 - idx[axis]) * st];
    ++flat;
  } while (next_index(idx, g.N));
  return out;
}

}  // namespace anisolab::liouville
