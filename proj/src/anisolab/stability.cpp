#include "anisolab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "anisolab/solver.hpp"
#include "anisolab/stencil.hpp"

namespace anisolab::stability {

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

void require_boundary_vanishing(const grid::GridField& psi) {
  const grid::Grid& g = psi.grid();
  const int n = g.n();
  double scale = 0.0;
  for (double v : psi.values()) scale = std::max(scale, std::abs(v));
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    bool boundary = false;
    for (int a = 0; a < n && !boundary; ++a)
      if (idx[a] == 0 || idx[a] == g.N[a] - 1) boundary = true;
    if (boundary && std::abs(psi[flat]) > 1e-12 * (1.0 + scale))
      throw std::runtime_error("test field must vanish on the boundary");
    ++flat;
  } while (next_index(idx, g.N));
}

std::vector<double> lambda_per_node(const weights::WeightSpec& w, const grid::Grid& g) {
  const std::vector<double> lat = grid::eval_on_xprime_lattice(w.lambda, g);
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

std::vector<double> gamma_per_node(const weights::WeightSpec& w, const grid::Grid& g) {
  const std::vector<double> lat = grid::eval_on_xprime_lattice(w.gamma, g);
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

}  // namespace

std::pair<double, double> quadratic_form(const weights::WeightSpec& w,
                                         const weights::Nonlinearity& f, const grid::GridField& u,
                                         const grid::GridField& psi) {
  if (u.grid_ptr() != psi.grid_ptr() && u.grid().size() != psi.grid().size())
    throw std::runtime_error("quadratic_form: fields must share a grid");
  require_boundary_vanishing(psi);
  const grid::Grid& g = psi.grid();
  const std::vector<double> lam = lambda_per_node(w, g);
  const std::vector<double> gam = gamma_per_node(w, g);

  grid::GridField lhs_density(psi.grid_ptr());
  for (std::size_t i = 0; i < lam.size(); ++i)
    lhs_density[i] = lam[i] * f.fprime_at(u[i]) * psi[i] * psi[i];

  grid::SplitGradients gr = grid::split_gradients(psi);
  grid::GridField rhs_density(psi.grid_ptr());
  for (std::size_t i = 0; i < gam.size(); ++i) {
    double g2 = 0.0;
    for (const auto& fgrad : gr.xprime) g2 += fgrad[i] * fgrad[i];
    for (const auto& fgrad : gr.xsecond) g2 += fgrad[i] * fgrad[i];
    rhs_density[i] = gam[i] * g2;
  }
  return {grid::box_integral(lhs_density), grid::box_integral(rhs_density)};
}

namespace {

struct Operator {
  stencil::Stencil st;
  std::vector<double> vpot;  // lambda f'(u)
  std::vector<double> bdiag; // lambda or 1
  bool lambda_weighted = false;

  Operator(const weights::WeightSpec& w, const weights::Nonlinearity& f,
           const grid::GridField& u)
      : st(w, u.grid_ptr(), {}) {
    const grid::Grid& g = u.grid();
    const std::vector<double> lam = lambda_per_node(w, g);
    vpot.resize(g.size());
    for (std::size_t i = 0; i < vpot.size(); ++i) vpot[i] = lam[i] * f.fprime_at(u[i]);
    double lam_mass = 0.0;
    for (double v : lam) lam_mass += std::abs(v);
    lambda_weighted = lam_mass > 0.0;
    bdiag = lambda_weighted ? lam : std::vector<double>(g.size(), 1.0);
  }

  void applyA(std::span<const double> v, std::span<double> out) const {
    st.apply(v, out);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (st.mask()[i]) out[i] -= vpot[i] * v[i];
  }

  double dotA(std::span<const double> x) const {
    std::vector<double> t(x.size());
    applyA(x, t);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (st.mask()[i]) s += x[i] * t[i];
    return s;
  }

  double dotB(std::span<const double> x, std::span<const double> y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (st.mask()[i]) s += x[i] * bdiag[i] * y[i];
    return s;
  }

  // largest sigma with A - sigma B diagonally dominant, minus a margin
  double gershgorin_shift() const {
    double best = std::numeric_limits<double>::infinity();
    double vmin = 0.0;
    for (std::size_t i = 0; i < vpot.size(); ++i) {
      if (!st.mask()[i]) continue;
      double row_slack = st.diag()[i] - vpot[i] - st.offdiag_sum()[i];
      if (bdiag[i] > 1e-300)
        best = std::min(best, row_slack / bdiag[i]);
      else if (row_slack < 0.0)
        best = std::min(best, row_slack);  // degenerate row, fall back
      vmin = std::min(vmin, row_slack);
    }
    if (!std::isfinite(best)) best = vmin;
    return best - std::max(1e-8, 1e-3 * std::abs(best));
  }
};

}  // namespace

double rayleigh_quotient(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                         const grid::GridField& u, const grid::GridField& psi) {
  require_boundary_vanishing(psi);
  Operator op(w, f, u);
  double num = op.dotA(psi.values());
  double den = op.dotB(psi.values(), psi.values());
  if (!(den > 0.0)) throw std::runtime_error("rayleigh_quotient: degenerate test field");
  return num / den;
}

StabilityReport min_eigenpair(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                              const grid::GridField& u) {
  Operator op(w, f, u);
  const stencil::Stencil& st = op.st;
  const std::size_t total = u.grid().size();
  auto mask = st.mask();

  StabilityReport rep;
  rep.lambda_weighted = op.lambda_weighted;
  const double sigma = op.gershgorin_shift();
  rep.shift = sigma;

  auto apply_shifted = [&](std::span<const double> v, std::span<double> out) {
    op.applyA(v, out);
    for (std::size_t i = 0; i < out.size(); ++i)
      if (mask[i]) out[i] -= sigma * op.bdiag[i] * v[i];
  };
  std::vector<double> precond(total, 1.0);
  for (std::size_t i = 0; i < total; ++i) {
    double dv = st.diag()[i] - op.vpot[i] - sigma * op.bdiag[i];
    precond[i] = mask[i] && dv > 0.0 ? dv : 1.0;
  }

  std::vector<double> psi(total, 0.0), x(total, 0.0), rhs(total, 0.0), t(total, 0.0);
  for (std::size_t i = 0; i < total; ++i) psi[i] = mask[i] ? 1.0 : 0.0;
  {
    double nb = std::sqrt(op.dotB(psi, psi));
    if (!(nb > 0.0)) throw std::runtime_error("min_eigenpair: empty interior");
    for (auto& v : psi) v /= nb;
  }

  double mu = 0.0, mu_prev = std::numeric_limits<double>::infinity();
  const int max_outer = 10000;
  int it = 0;
  for (; it < max_outer; ++it) {
    for (std::size_t i = 0; i < total; ++i) rhs[i] = mask[i] ? op.bdiag[i] * psi[i] : 0.0;
    std::fill(x.begin(), x.end(), 0.0);
    auto cg = stencil::cg_solve(apply_shifted, precond, mask, rhs, x, 1e-12, 10000);
    if (cg.indefinite)
      throw std::runtime_error("min_eigenpair: shifted operator not positive definite");
    double nb = std::sqrt(op.dotB(x, x));
    if (!(nb > 0.0)) throw std::runtime_error("min_eigenpair: iteration collapsed");
    for (auto& v : x) v /= nb;
    op.applyA(x, t);
    double num = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      if (mask[i]) num += x[i] * t[i];
    mu = num;  // <x,Ax>/<x,Bx> with <x,Bx> = 1
    psi = x;
    if (std::abs(mu - mu_prev) <= 1e-12 * (1.0 + std::abs(mu))) {
      ++it;
      break;
    }
    mu_prev = mu;
  }
  rep.iterations = it;
  rep.converged = it < max_outer;
  rep.mu1 = mu;

  // residual ||A psi - mu B psi||_2 relative to ||B psi||
  op.applyA(psi, t);
  double rnum = 0.0, rden = 0.0;
  for (std::size_t i = 0; i < total; ++i)
    if (mask[i]) {
      double r = t[i] - mu * op.bdiag[i] * psi[i];
      rnum += r * r;
      rden += op.bdiag[i] * psi[i] * op.bdiag[i] * psi[i];
    }
  rep.eigen_residual = rden > 0.0 ? std::sqrt(rnum / rden) : std::sqrt(rnum);

  // sign normalization: entry of largest magnitude positive
  double big = 0.0;
  for (std::size_t i = 0; i < total; ++i)
    if (mask[i] && std::abs(psi[i]) > std::abs(big)) big = psi[i];
  if (big < 0.0)
    for (auto& v : psi) v = -v;

  grid::GridField field(u.grid_ptr(), std::move(psi));
  // report normalization: lambda-weighted L2 when available, plain L2 else
  grid::GridField norm_density(u.grid_ptr());
  for (std::size_t i = 0; i < total; ++i)
    norm_density[i] = op.bdiag[i] * field[i] * field[i];
  double nrm = std::sqrt(grid::box_integral(norm_density));
  if (nrm > 0.0)
    for (std::size_t i = 0; i < total; ++i) field[i] /= nrm;

  double fmin = 0.0;
  for (std::size_t i = 0; i < total; ++i)
    if (mask[i]) fmin = std::min(fmin, field[i]);
  double fmax = 0.0;
  for (std::size_t i = 0; i < total; ++i) fmax = std::max(fmax, std::abs(field[i]));
  rep.eigen_positive = fmin >= -1e-9 * (1.0 + fmax);
  rep.eigenfield = std::move(field);
  return rep;
}

CertificateReport pointwise_certificate(const weights::WeightSpec& w,
                                        const weights::Nonlinearity& f, const grid::GridField& u,
                                        double solve_tol) {
  CertificateReport rep;
  rep.tolerance = 10.0 * solve_tol;
  rep.min_dn_u = solver::min_interior_dn(u);
  if (!(rep.min_dn_u > 0.0)) {
    rep.certified = false;
    return rep;
  }

  const grid::Grid& g = u.grid();
  const int n = g.n();
  const int axis = n - 1;
  const std::size_t stn = g.stride(axis);

  grid::GridField v = grid::axis_derivative(u, axis);
  grid::GridField dv = grid::weighted_div(w, v);
  const std::vector<double> lam = lambda_per_node(w, g);

  // linearized residual -div(gamma grad v) - lambda * slope(u) * v, with the
  // secant slope (f(u_+) - f(u_-))/(u_+ - u_-): the exact discrete
  // differentiation of the equation in x_n. Checked two layers in, where v
  // itself is a central difference.
  double worst = 0.0;
  std::size_t worst_node = static_cast<std::size_t>(-1);
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    bool deep = true;
    for (int a = 0; a < n && deep; ++a)
      if (idx[a] < 2 || idx[a] > g.N[a] - 3) deep = false;
    if (deep) {
      double up = u[flat + stn], um = u[flat - stn];
      double slope;
      if (std::abs(up - um) > 1e-12)
        slope = (f.f_at(up) - f.f_at(um)) / (up - um);
      else
        slope = f.fprime_at(u[flat]);
      double r = -dv[flat] - lam[flat] * slope * v[flat];
      if (std::abs(r) > worst) {
        worst = std::abs(r);
        worst_node = flat;
      }
    }
    ++flat;
  } while (next_index(idx, g.N));

  rep.linear_residual = worst;
  rep.certified = worst <= rep.tolerance;
  if (!rep.certified) rep.violating_node = worst_node;
  return rep;
}

}  // namespace anisolab::stability
