#include "anisolab/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace anisolab::geometry {

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

// two-point difference of a field along `axis`: central in the interior,
// one-sided at the ends. Keeping every stencil two-point preserves the
// triangle inequality |D|V|| <= |D V| exactly.
double diff2(const grid::GridField& f, const grid::Grid& g, std::size_t flat, int i, int axis) {
  const std::size_t st = g.stride(axis);
  const int Na = g.N[axis];
  const double h = g.h(axis);
  if (i == 0) return (f[flat + st] - f[flat]) / h;
  if (i == Na - 1) return (f[flat] - f[flat - st]) / h;
  return (f[flat + st] - f[flat - st]) / (2.0 * h);
}

// eigenvalues of a symmetric s x s matrix, s <= 3
void sym_eigenvalues(const double* m, int s, double* eig) {
  if (s == 1) {
    eig[0] = m[0];
    return;
  }
  if (s == 2) {
    double a = m[0], b = m[1], c = m[3];
    double tr = a + c;
    double disc = std::sqrt(std::max(0.0, 0.25 * (a - c) * (a - c) + b * b));
    eig[0] = 0.5 * tr + disc;
    eig[1] = 0.5 * tr - disc;
    return;
  }
  // 3x3 trigonometric method
  double a11 = m[0], a12 = m[1], a13 = m[2];
  double a22 = m[4], a23 = m[5], a33 = m[8];
  double p1 = a12 * a12 + a13 * a13 + a23 * a23;
  if (p1 == 0.0) {
    eig[0] = a11;
    eig[1] = a22;
    eig[2] = a33;
    return;
  }
  double q = (a11 + a22 + a33) / 3.0;
  double p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) + (a33 - q) * (a33 - q) + 2.0 * p1;
  double p = std::sqrt(p2 / 6.0);
  double b11 = (a11 - q) / p, b12 = a12 / p, b13 = a13 / p;
  double b22 = (a22 - q) / p, b23 = a23 / p, b33 = (a33 - q) / p;
  double detb = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) +
                b13 * (b12 * b23 - b22 * b13);
  double r = std::clamp(detb / 2.0, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  eig[0] = q + 2.0 * p * std::cos(phi);
  eig[2] = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  eig[1] = 3.0 * q - eig[0] - eig[2];
}

}  // namespace

SZFields sz_decomposition(const grid::GridField& u, double eps_g) {
  const grid::Grid& g = u.grid();
  const int n = g.n();
  const int s = g.s;
  if (s > 3) throw std::runtime_error("sz_decomposition: supports s <= 3");

  SZFields out;
  out.eps_g = eps_g;
  out.lhs = grid::GridField(u.grid_ptr());
  out.curvature = grid::GridField(u.grid_ptr());
  out.tangential = grid::GridField(u.grid_ptr());

  // gradient components over the x'' axes and their norm
  std::vector<grid::GridField> V;
  for (int j = 0; j < s; ++j) V.push_back(grid::axis_derivative(u, g.d + j));
  grid::GridField gn(u.grid_ptr());
  for (std::size_t i = 0; i < gn.values().size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < s; ++j) acc += V[j][i] * V[j][i];
    gn[i] = std::sqrt(acc);
  }

  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  double W[9], Dg[3], nu[3], M[9], H[9], eig[3];
  do {
    const double gval = gn[flat];
    if (gval > eps_g) {
      ++out.active;
      // W[i][j] = D_i V_j and Dg[i] over the x'' axes, two-point stencils
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j)
          W[i * s + j] = diff2(V[j], g, flat, idx[g.d + i], g.d + i);
        Dg[i] = diff2(gn, g, flat, idx[g.d + i], g.d + i);
      }
      double lhs = 0.0;
      for (int i = 0; i < s; ++i) {
        for (int j = 0; j < s; ++j) lhs += W[i * s + j] * W[i * s + j];
        lhs -= Dg[i] * Dg[i];
      }
      out.lhs[flat] = lhs;

      for (int j = 0; j < s; ++j) nu[j] = V[j][flat] / gval;
      // symmetrized Hessian, P H P / |grad u|
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) H[i * s + j] = 0.5 * (W[i * s + j] + W[j * s + i]);
      // T = H nu, c = nu.T
      double T[3] = {0.0, 0.0, 0.0};
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) T[i] += H[i * s + j] * nu[j];
      double c = 0.0;
      for (int i = 0; i < s; ++i) c += nu[i] * T[i];
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j)
          M[i * s + j] =
              (H[i * s + j] - nu[i] * T[j] - T[i] * nu[j] + c * nu[i] * nu[j]) / gval;
      sym_eigenvalues(M, s, eig);
      double k2 = 0.0;
      for (int i = 0; i < s; ++i) k2 += eig[i] * eig[i];
      out.curvature[flat] = gval * gval * k2;

      double tang = 0.0;
      double dgn = 0.0;  // nu . Dg
      for (int i = 0; i < s; ++i) dgn += nu[i] * Dg[i];
      for (int i = 0; i < s; ++i) {
        double t = Dg[i] - dgn * nu[i];
        tang += t * t;
      }
      out.tangential[flat] = tang;
    } else if (gval > 0.0) {
      ++out.excluded;
    }
    ++flat;
  } while (next_index(idx, g.N));
  return out;
}

grid::GridField s_quantity(const grid::GridField& u, double eps_g) {
  const grid::Grid& g = u.grid();
  const int s = g.s;
  grid::GridField out(u.grid_ptr());
  if (g.d == 0) return out;

  std::vector<grid::GridField> V;
  for (int j = 0; j < s; ++j) V.push_back(grid::axis_derivative(u, g.d + j));
  grid::GridField gn(u.grid_ptr());
  for (std::size_t i = 0; i < gn.values().size(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < s; ++j) acc += V[j][i] * V[j][i];
    gn[i] = std::sqrt(acc);
  }

  std::vector<int> idx(g.n(), 0);
  std::size_t flat = 0;
  do {
    if (gn[flat] > eps_g) {
      double acc = 0.0;
      for (int i = 0; i < g.d; ++i) {
        for (int j = 0; j < s; ++j) {
          double mixed = diff2(V[j], g, flat, idx[i], i);
          acc += mixed * mixed;
        }
        double dgi = diff2(gn, g, flat, idx[i], i);
        acc -= dgi * dgi;
      }
      out[flat] = acc;
    }
    ++flat;
  } while (next_index(idx, g.N));
  return out;
}

PoincareReport poincare_sides(const weights::WeightSpec& w, const grid::GridField& u,
                              const grid::GridField& phi, double eps_g, double tol) {
  const grid::Grid& g = u.grid();
  PoincareReport rep;
  rep.eps_g = eps_g;
  rep.tol = tol;

  SZFields sz = sz_decomposition(u, eps_g);
  grid::GridField sq = s_quantity(u, eps_g);

  const std::vector<double> gamma_lat = grid::eval_on_xprime_lattice(w.gamma, g);
  std::vector<double> gam(g.size());
  {
    std::vector<int> idx(g.n(), 0);
    std::size_t flat = 0;
    do {
      std::size_t xp = 0;
      for (int a = 0; a < g.d; ++a) xp = xp * static_cast<std::size_t>(g.N[a]) + static_cast<std::size_t>(idx[a]);
      gam[flat++] = gamma_lat[xp];
    } while (next_index(idx, g.N));
  }

  // boundary-vanishing phi is part of the contract
  {
    double scale = 0.0;
    for (double v : phi.values()) scale = std::max(scale, std::abs(v));
    std::vector<int> idx(g.n(), 0);
    std::size_t flat = 0;
    do {
      bool boundary = false;
      for (int a = 0; a < g.n() && !boundary; ++a)
        if (idx[a] == 0 || idx[a] == g.N[a] - 1) boundary = true;
      if (boundary && std::abs(phi[flat]) > 1e-12 * (1.0 + scale))
        throw std::runtime_error("poincare_sides: phi must vanish on the boundary");
      ++flat;
    } while (next_index(idx, g.N));
  }

  grid::GridField curv_density(u.grid_ptr()), s_density(u.grid_ptr()), rhs_density(u.grid_ptr());
  grid::SplitGradients gu = grid::split_gradients(u);
  grid::SplitGradients gphi = grid::split_gradients(phi);
  double min_s = 0.0;
  for (std::size_t i = 0; i < gam.size(); ++i) {
    const double p2 = phi[i] * phi[i];
    curv_density[i] = gam[i] * p2 * (sz.curvature[i] + sz.tangential[i]);
    s_density[i] = gam[i] * p2 * sq[i];
    min_s = std::min(min_s, sq[i]);
    double gu2 = 0.0;
    for (const auto& f : gu.xsecond) gu2 += f[i] * f[i];
    double gp2 = 0.0;
    for (const auto& f : gphi.xprime) gp2 += f[i] * f[i];
    for (const auto& f : gphi.xsecond) gp2 += f[i] * f[i];
    rhs_density[i] = gam[i] * gu2 * gp2;
  }
  rep.lhs_curvature = grid::box_integral(curv_density);
  rep.lhs_s = grid::box_integral(s_density);
  rep.rhs = grid::box_integral(rhs_density);
  rep.slack = rep.rhs - rep.lhs_curvature - rep.lhs_s;
  rep.holds = rep.slack >= -tol * (1.0 + rep.rhs);
  rep.active_fraction = static_cast<double>(sz.active) / static_cast<double>(g.size());
  rep.min_s = min_s;
  return rep;
}

grid::GridField log_cutoff(std::shared_ptr<const grid::Grid> g, double R) {
  if (!(R > 1.0)) throw std::runtime_error("log_cutoff: needs R > 1");
  const double sqR = std::sqrt(R);
  const double logR = std::log(R);
  return grid::GridField::sample(g, [sqR, R, logR](std::span<const double> x) {
    double r = 0.0;
    for (double v : x) r += v * v;
    r = std::sqrt(r);
    if (r <= sqR) return 0.5;
    if (r >= R) return 0.0;
    return (logR - std::log(r)) / logR;
  });
}

grid::GridField smooth_bump(std::shared_ptr<const grid::Grid> g, double R) {
  if (!(R > 0.0)) throw std::runtime_error("smooth_bump: needs R > 0");
  return grid::GridField::sample(g, [R](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    double q = r2 / (R * R);
    if (q >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - q));
  });
}

grid::GridField tensor_cosine(std::shared_ptr<const grid::Grid> g) {
  const grid::Grid& gr = *g;
  return grid::GridField::sample(g, [&gr](std::span<const double> x) {
    double p = 1.0;
    for (std::size_t a = 0; a < x.size(); ++a)
      p *= std::cos(M_PI * x[a] / (2.0 * gr.L[a]));
    return p;
  });
}

}  // namespace anisolab::geometry
