#include "anisolab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "anisolab/stencil.hpp"

namespace anisolab::solver {

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

double tanh_profile_value(const grid::Grid& g, std::span<const double> x,
                          std::span<const double> k) {
  double p = 0.0;
  for (int j = 0; j < g.s; ++j) p += k[j] * x[g.d + j];
  return std::tanh(p / std::sqrt(2.0));
}

std::vector<double> normalized_direction(std::vector<double> k, int s) {
  if (k.empty()) {
    k.assign(s, 0.0);
    k.back() = 1.0;
  }
  if (static_cast<int>(k.size()) != s)
    throw std::runtime_error("profile direction must have s components");
  double norm = 0.0;
  for (double v : k) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw std::runtime_error("profile direction must be nonzero");
  for (double& v : k) v /= norm;
  if (!(k.back() > 0.0)) throw std::runtime_error("profile direction needs k_n > 0");
  return k;
}

}  // namespace

BoundarySpec BoundarySpec::tanh_profile(std::vector<double> k, int d, int s) {
  BoundarySpec bc;
  bc.axes.assign(d + s, Kind::Dirichlet);
  bc.tanh_k = normalized_direction(std::move(k), s);
  return bc;
}

BoundarySpec BoundarySpec::dirichlet(expr::Expr data, int n_axes) {
  BoundarySpec bc;
  bc.axes.assign(n_axes, Kind::Dirichlet);
  bc.data = std::move(data);
  return bc;
}

BoundarySpec BoundarySpec::dirichlet_fn(std::function<double(std::span<const double>)> fn,
                                        int n_axes) {
  BoundarySpec bc;
  bc.axes.assign(n_axes, Kind::Dirichlet);
  bc.data_fn = std::move(fn);
  return bc;
}

double BoundarySpec::value_at(const grid::Grid& g, std::span<const double> x) const {
  if (tanh_k) return tanh_profile_value(g, x, *tanh_k);
  if (data_fn) return data_fn(x);
  if (data) return data->eval(x);
  throw std::runtime_error("boundary spec carries no Dirichlet data");
}

std::vector<bool> BoundarySpec::periodic_flags() const {
  std::vector<bool> flags(axes.size(), false);
  for (std::size_t a = 0; a < axes.size(); ++a) flags[a] = axes[a] == Kind::Periodic;
  return flags;
}

InitSpec InitSpec::tanh_profile(std::vector<double> k) {
  InitSpec s;
  s.kind = Kind::TanhProfile;
  s.k = std::move(k);
  return s;
}
InitSpec InitSpec::zero() {
  InitSpec s;
  s.kind = Kind::Zero;
  return s;
}
InitSpec InitSpec::random(unsigned seed) {
  InitSpec s;
  s.kind = Kind::Random;
  s.seed = seed;
  return s;
}
InitSpec InitSpec::from_field(grid::GridField f) {
  InitSpec s;
  s.kind = Kind::Field;
  s.field = std::move(f);
  return s;
}

double min_interior_dn(const grid::GridField& u) {
  const grid::Grid& g = u.grid();
  const int n = g.n();
  const int axis = n - 1;
  const std::size_t st = g.stride(axis);
  const double h = g.h(axis);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  std::span<const double> uv = u.values();
  do {
    bool interior = true;
    for (int a = 0; a < n && interior; ++a)
      if (idx[a] == 0 || idx[a] == g.N[a] - 1) interior = false;
    if (interior) best = std::min(best, (uv[flat + st] - uv[flat - st]) / (2.0 * h));
    ++flat;
  } while (next_index(idx, g.N));
  return best;
}

double residual_norm(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                     const grid::GridField& u, const std::vector<bool>& periodic) {
  const grid::Grid& g = u.grid();
  grid::GridField dv = grid::weighted_div(w, u, periodic);
  const std::vector<double> lambda_lat = grid::eval_on_xprime_lattice(w.lambda, g);
  const int n = g.n();
  double worst = 0.0;
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    bool interior = true;
    for (int a = 0; a < n && interior; ++a) {
      bool per = !periodic.empty() && periodic[a];
      if (!per && (idx[a] == 0 || idx[a] == g.N[a] - 1)) interior = false;
    }
    if (interior) {
      std::size_t xp = 0;
      for (int a = 0; a < g.d; ++a) xp = xp * static_cast<std::size_t>(g.N[a]) + static_cast<std::size_t>(idx[a]);
      double r = dv[flat] + lambda_lat[xp] * f.f_at(u[flat]);
      worst = std::max(worst, std::abs(r));
    }
    ++flat;
  } while (next_index(idx, g.N));
  return worst;
}

namespace {

class Problem {
public:
  Problem(const weights::WeightSpec& w, const weights::Nonlinearity& f,
          std::shared_ptr<const grid::Grid> g, const BoundarySpec& bc)
      : w_(w), f_(f), st_(w, g, bc.periodic_flags()), bc_(bc) {
    const grid::Grid& gr = st_.grid();
    lambda_node_.resize(gr.size());
    const std::vector<double> lat = grid::eval_on_xprime_lattice(w.lambda, gr);
    const int n = gr.n();
    std::vector<int> idx(n, 0);
    std::size_t flat = 0;
    do {
      std::size_t xp = 0;
      for (int a = 0; a < gr.d; ++a) xp = xp * static_cast<std::size_t>(gr.N[a]) + static_cast<std::size_t>(idx[a]);
      lambda_node_[flat++] = lat[xp];
    } while (next_index(idx, gr.N));
  }

  const stencil::Stencil& st() const { return st_; }

  // residual G(u) = L u - lambda f(u) on unknowns (zero elsewhere);
  // the equation is G(u) = 0 with L = -div(gamma grad .) including the
  // inhomogeneous boundary values carried by u itself.
  void residual(std::span<const double> u, std::span<double> out) const {
    full_apply(u, out);
    const std::size_t nn = u.size();
    for (std::size_t i = 0; i < nn; ++i)
      if (st_.unknown(i)) out[i] -= lambda_node_[i] * f_.f_at(u[i]);
  }

  static double max_norm(std::span<const double> v, std::span<const std::uint8_t> mask) {
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (mask[i]) worst = std::max(worst, std::abs(v[i]));
    return worst;
  }

  // L u with the actual (possibly nonzero) boundary values of u.
  void full_apply(std::span<const double> u, std::span<double> out) const {
    // The stencil's apply already reads neighbor values verbatim, so passing
    // the full field including boundary data gives the inhomogeneous rows.
    st_.apply(u, out);
  }

  std::span<const double> lambda_nodes() const { return lambda_node_; }

  double fprime(double u) const { return f_.fprime_at(u); }

private:
  const weights::WeightSpec& w_;
  const weights::Nonlinearity& f_;
  stencil::Stencil st_;
  const BoundarySpec& bc_;
  std::vector<double> lambda_node_;
};

}  // namespace

std::pair<grid::GridField, SolveReport> solve(const weights::WeightSpec& w,
                                              const weights::Nonlinearity& f,
                                              std::shared_ptr<const grid::Grid> g,
                                              const BoundarySpec& bc, const InitSpec& init,
                                              double tol, int max_iter) {
  if (!(tol > 0.0)) throw std::runtime_error("solve: tol must be positive");
  const grid::Grid& gr = *g;
  const int n = gr.n();
  if (static_cast<int>(bc.axes.size()) != n)
    throw std::runtime_error("solve: boundary spec axis count mismatch");
  for (int a = gr.d; a < n; ++a)
    if (bc.axes[a] == BoundarySpec::Kind::Periodic)
      throw std::runtime_error("solve: periodic boundaries allowed on x' axes only");

  // weight sanity on the grid axes
  {
    std::vector<std::vector<double>> samples(gr.d);
    for (int a = 0; a < gr.d; ++a)
      for (int i = 0; i < gr.N[a]; ++i) samples[a].push_back(gr.coord(a, i));
    w.validate_on(samples);
  }

  Problem prob(w, f, g, bc);
  const stencil::Stencil& st = prob.st();
  const std::size_t total = gr.size();

  grid::GridField u(g);

  // boundary values, then initial interior data
  {
    std::vector<double> x(n);
    std::vector<int> idx(n, 0);
    std::size_t flat = 0;
    std::mt19937 rng(init.kind == InitSpec::Kind::Random ? init.seed : 0u);
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    std::vector<double> ik;
    if (init.kind == InitSpec::Kind::TanhProfile) ik = normalized_direction(init.k, gr.s);
    do {
      for (int a = 0; a < n; ++a) x[a] = gr.coord(a, idx[a]);
      if (!st.unknown(flat)) {
        bool on_dirichlet = false;
        for (int a = 0; a < n; ++a)
          if (bc.axes[a] == BoundarySpec::Kind::Dirichlet &&
              (idx[a] == 0 || idx[a] == gr.N[a] - 1))
            on_dirichlet = true;
        u[flat] = on_dirichlet ? bc.value_at(gr, x) : 0.0;  // periodic planes mirrored below
      } else {
        switch (init.kind) {
          case InitSpec::Kind::TanhProfile: u[flat] = tanh_profile_value(gr, x, ik); break;
          case InitSpec::Kind::Zero: u[flat] = 0.0; break;
          case InitSpec::Kind::Random: u[flat] = dist(rng); break;
          case InitSpec::Kind::Field:
            if (init.field.values().size() != total)
              throw std::runtime_error("solve: init field does not match the grid");
            u[flat] = init.field[flat];
            break;
        }
      }
      ++flat;
    } while (next_index(idx, gr.N));
    st.mirror_periodic(u.data());
  }

  SolveReport rep;
  std::vector<double> G(total, 0.0), delta(total, 0.0), rhs(total, 0.0), work(total, 0.0);
  std::vector<double> precond(total, 1.0), vpot(total, 0.0);
  std::vector<double> u_try(total, 0.0);

  auto mask = st.mask();
  auto compute_res = [&](std::span<const double> uu) {
    prob.residual(uu, G);
    return Problem::max_norm(G, mask);
  };

  double res = compute_res(u.data());
  double scale = 1.0 + Problem::max_norm(u.data(), mask);

  // reaction scale for the flow step size
  double fp_max = 1.0;
  for (std::size_t i = 0; i < total; ++i)
    if (mask[i]) fp_max = std::max(fp_max, std::abs(prob.lambda_nodes()[i] * prob.fprime(u[i])));
  double tau = 0.5 / fp_max;

  const double flow_target = std::max(1e-2, 1e2 * tol);
  int it = 0;

  auto flow_step = [&]() -> bool {
    // (I + tau L) delta = -tau G(u), then u += delta
    prob.residual(u.data(), G);
    for (std::size_t i = 0; i < total; ++i) rhs[i] = mask[i] ? -tau * G[i] : 0.0;
    auto apply = [&](std::span<const double> v, std::span<double> out) {
      st.apply(v, out);
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mask[i] ? tau * out[i] + v[i] : 0.0;
    };
    for (std::size_t i = 0; i < total; ++i)
      precond[i] = mask[i] ? 1.0 + tau * st.diag()[i] : 1.0;
    std::fill(delta.begin(), delta.end(), 0.0);
    stencil::cg_solve(apply, precond, mask, rhs, delta, 1e-6, 2000);
    double old_res = res;
    for (std::size_t i = 0; i < total; ++i)
      if (mask[i]) u[i] += delta[i];
    st.mirror_periodic(u.data());
    res = compute_res(u.data());
    ++rep.flow_steps;
    if (res < old_res)
      tau = std::min(tau * 1.3, 1e3);
    else
      tau = std::max(tau * 0.4, 1e-6);
    return res < old_res;
  };

  // stage 1: gradient flow into the basin
  while (res > flow_target && it < max_iter / 2) {
    flow_step();
    ++it;
  }

  // stage 2: damped Newton, falling back to flow steps when the Newton
  // system turns indefinite or the line search stalls
  int extra_polish = 2;
  while (it < max_iter) {
    if (res <= tol) {
      // a couple of cheap extra steps while they still pay off tenfold
      if (extra_polish == 0) break;
      --extra_polish;
    }
    prob.residual(u.data(), G);
    for (std::size_t i = 0; i < total; ++i) {
      vpot[i] = mask[i] ? prob.lambda_nodes()[i] * prob.fprime(u[i]) : 0.0;
      rhs[i] = mask[i] ? -G[i] : 0.0;
    }
    auto applyJ = [&](std::span<const double> v, std::span<double> out) {
      st.apply(v, out);
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = mask[i] ? out[i] - vpot[i] * v[i] : 0.0;
    };
    double dmax = 0.0;
    for (std::size_t i = 0; i < total; ++i)
      if (mask[i]) dmax = std::max(dmax, st.diag()[i]);
    for (std::size_t i = 0; i < total; ++i) {
      double dj = st.diag()[i] - vpot[i];
      precond[i] = mask[i] ? (dj > 1e-12 * dmax ? dj : st.diag()[i]) : 1.0;
    }
    std::fill(delta.begin(), delta.end(), 0.0);
    double inner_tol = std::min(1e-2, std::max(1e-10, 1e-2 * tol / std::max(res, tol)));
    auto cg = stencil::cg_solve(applyJ, precond, mask, rhs, delta, inner_tol, 5000);
    ++it;
    if (cg.indefinite) {
      flow_step();
      ++it;
      continue;
    }
    // line search on the max-norm residual
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 22; ++ls) {
      for (std::size_t i = 0; i < total; ++i)
        u_try[i] = mask[i] ? u[i] + alpha * delta[i] : u[i];
      prob.residual(u_try, work);
      double res_try = Problem::max_norm(work, mask);
      if (res_try < res) {
        u.data().assign(u_try.begin(), u_try.end());
        st.mirror_periodic(u.data());
        res = res_try;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    ++rep.newton_steps;
    if (!accepted) {
      if (res <= tol) break;  // already there, Newton noise floor reached
      bool improved = flow_step();
      ++it;
      if (!improved && res > tol && rep.flow_steps > max_iter / 2) break;
    }
    if (res <= 1e-15 * scale) break;
  }

  rep.iterations = it;
  rep.residual = res;
  rep.converged = res <= tol;
  if (!rep.converged) rep.note = "maxIter exceeded";
  rep.min_dn_u = min_interior_dn(u);
  rep.monotone = rep.min_dn_u > 0.0;
  double lo = u[0], hi = u[0];
  for (double v : u.values()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  rep.min_u = lo;
  rep.max_u = hi;
  return {std::move(u), rep};
}

grid::GridField shift(const grid::GridField& u, double t, double fill_top, double fill_bottom) {
  const grid::Grid& g = u.grid();
  const int n = g.n();
  const int axis = n - 1;
  const double h = g.h(axis);
  const double steps = t / h;
  const long k = std::lround(steps);
  if (std::abs(steps - static_cast<double>(k)) > 1e-9)
    throw std::runtime_error("shift: t must be a multiple of the x_n spacing");
  grid::GridField out(u.grid_ptr());
  const std::size_t st = g.stride(axis);
  const int Na = g.N[axis];
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  std::span<const double> uv = u.values();
  do {
    long src = idx[axis] + k;
    if (src < 0) {
      out[flat] = fill_bottom;
    } else if (src >= Na) {
      out[flat] = fill_top;
    } else {
      const std::size_t base = flat - static_cast<std::size_t>(idx[axis]) * st;
      out[flat] = uv[base + static_cast<std::size_t>(src) * st];
    }
    ++flat;
  } while (next_index(idx, g.N));
  return out;
}

}  // namespace anisolab::solver
