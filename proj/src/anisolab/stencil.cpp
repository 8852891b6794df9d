#include "anisolab/stencil.hpp"

#include <cmath>
#include <stdexcept>

namespace anisolab::stencil {

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

}  // namespace

Stencil::Stencil(const weights::WeightSpec& w, std::shared_ptr<const grid::Grid> g,
                 std::vector<bool> periodic)
    : grid_(std::move(g)), periodic_(std::move(periodic)) {
  const grid::Grid& gr = *grid_;
  const int n = gr.n();
  if (w.d != gr.d || w.s != gr.s)
    throw std::runtime_error("stencil: weight split must match the grid");
  if (periodic_.empty()) periodic_.assign(n, false);
  if (static_cast<int>(periodic_.size()) != n)
    throw std::runtime_error("stencil: periodic flags must cover all axes");
  for (int a = gr.d; a < n; ++a)
    if (periodic_[a]) throw std::runtime_error("stencil: periodic axes must lie in x'");

  const std::size_t total = gr.size();
  const std::vector<double> gamma_lat = grid::eval_on_xprime_lattice(w.gamma, gr);

  inv_h2_.resize(n);
  for (int a = 0; a < n; ++a) inv_h2_[a] = 1.0 / (gr.h(a) * gr.h(a));

  gamma_node_.resize(total);
  mask_.assign(total, 1);
  cp_.assign(gr.d, std::vector<double>(gr.d > 0 ? total : 0, 0.0));
  cm_.assign(gr.d, std::vector<double>(gr.d > 0 ? total : 0, 0.0));
  diag_.assign(total, 0.0);
  offsum_.assign(total, 0.0);

  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    // mask: Dirichlet boundaries are fixed; periodic end planes duplicate 0
    bool fixed = false;
    for (int a = 0; a < n; ++a) {
      if (periodic_[a]) {
        if (idx[a] == gr.N[a] - 1) fixed = true;
      } else if (idx[a] == 0 || idx[a] == gr.N[a] - 1) {
        fixed = true;
      }
    }
    mask_[flat] = fixed ? 0 : 1;

    std::size_t xp = 0;
    for (int a = 0; a < gr.d; ++a) xp = xp * static_cast<std::size_t>(gr.N[a]) + static_cast<std::size_t>(idx[a]);
    const double gc = gamma_lat[xp];
    gamma_node_[flat] = gc;

    if (!fixed) {
      double diag = 0.0;
      for (int a = 0; a < n; ++a) {
        double gp, gm;
        if (a < gr.d) {
          std::size_t xp_st = 1;
          for (int b = gr.d - 1; b > a; --b) xp_st *= static_cast<std::size_t>(gr.N[b]);
          const int i = idx[a];
          const int Na = gr.N[a];
          const int iu = periodic_[a] ? (i + 1) % (Na - 1) : i + 1;
          const int idn = periodic_[a] ? (i - 1 + (Na - 1)) % (Na - 1) : i - 1;
          const std::size_t xp_base = xp - static_cast<std::size_t>(i) * xp_st;
          gp = 0.5 * (gc + gamma_lat[xp_base + static_cast<std::size_t>(iu) * xp_st]);
          gm = 0.5 * (gc + gamma_lat[xp_base + static_cast<std::size_t>(idn) * xp_st]);
          cp_[a][flat] = gp * inv_h2_[a];
          cm_[a][flat] = gm * inv_h2_[a];
        } else {
          gp = gm = gc;
        }
        diag += (gp + gm) * inv_h2_[a];
      }
      diag_[flat] = diag;
    }
    ++flat;
  } while (next_index(idx, gr.N));

  for (std::size_t i = 0; i < total; ++i) unknown_count_ += mask_[i];

  // off-diagonal row sums over unknown columns (needs the mask complete)
  std::fill(idx.begin(), idx.end(), 0);
  flat = 0;
  do {
    if (mask_[flat]) {
      double off = 0.0;
      for (int a = 0; a < n; ++a) {
        const std::size_t st = gr.stride(a);
        const int i = idx[a];
        const int Na = gr.N[a];
        std::size_t ip, im;
        if (periodic_[a]) {
          const std::size_t base = flat - static_cast<std::size_t>(i) * st;
          ip = base + static_cast<std::size_t>((i + 1) % (Na - 1)) * st;
          im = base + static_cast<std::size_t>((i - 1 + (Na - 1)) % (Na - 1)) * st;
        } else {
          ip = flat + st;
          im = flat - st;
        }
        const double gcp = a < gr.d ? cp_[a][flat] : gamma_node_[flat] * inv_h2_[a];
        const double gcm = a < gr.d ? cm_[a][flat] : gamma_node_[flat] * inv_h2_[a];
        if (mask_[ip]) off += gcp;
        if (mask_[im]) off += gcm;
      }
      offsum_[flat] = off;
    }
    ++flat;
  } while (next_index(idx, gr.N));
}

void Stencil::apply(std::span<const double> v, std::span<double> out) const {
  const grid::Grid& gr = *grid_;
  const int n = gr.n();
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    if (!mask_[flat]) {
      out[flat] = 0.0;
    } else {
      double acc = diag_[flat] * v[flat];
      for (int a = 0; a < n; ++a) {
        const std::size_t st = gr.stride(a);
        const int i = idx[a];
        const int Na = gr.N[a];
        std::size_t ip, im;
        if (periodic_[a]) {
          const std::size_t base = flat - static_cast<std::size_t>(i) * st;
          ip = base + static_cast<std::size_t>((i + 1) % (Na - 1)) * st;
          im = base + static_cast<std::size_t>((i - 1 + (Na - 1)) % (Na - 1)) * st;
        } else {
          ip = flat + st;
          im = flat - st;
        }
        const double gcp = a < gr.d ? cp_[a][flat] : gamma_node_[flat] * inv_h2_[a];
        const double gcm = a < gr.d ? cm_[a][flat] : gamma_node_[flat] * inv_h2_[a];
        acc -= gcp * v[ip] + gcm * v[im];
      }
      out[flat] = acc;
    }
    ++flat;
  } while (next_index(idx, gr.N));
}

void Stencil::project(std::span<double> v) const {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!mask_[i]) v[i] = 0.0;
}

void Stencil::mirror_periodic(std::span<double> v) const {
  const grid::Grid& gr = *grid_;
  const int n = gr.n();
  for (int a = 0; a < n; ++a) {
    if (!periodic_[a]) continue;
    const std::size_t st = gr.stride(a);
    const int Na = gr.N[a];
    std::vector<int> bidx(n, 0);
    std::vector<int> bound = gr.N;
    bound[a] = 1;
    do {
      std::size_t base = 0;
      for (int b = 0; b < n; ++b) base += static_cast<std::size_t>(bidx[b]) * gr.stride(b);
      v[base + static_cast<std::size_t>(Na - 1) * st] = v[base];
    } while (next_index(bidx, bound));
  }
}

CgResult cg_solve(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::span<const double> precond_diag, std::span<const std::uint8_t> mask,
                  std::span<const double> b, std::span<double> x, double rel_tol, int max_iter) {
  const std::size_t nn = b.size();
  std::vector<double> r(nn, 0.0), z(nn, 0.0), p(nn, 0.0), ap(nn, 0.0);

  auto dot = [&mask](std::span<const double> u, std::span<const double> v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      if (mask[i]) s += u[i] * v[i];
    return s;
  };

  apply(x, ap);
  for (std::size_t i = 0; i < nn; ++i) r[i] = mask[i] ? b[i] - ap[i] : 0.0;

  auto precond = [&](const std::vector<double>& rr, std::vector<double>& zz) {
    for (std::size_t i = 0; i < nn; ++i)
      zz[i] = mask[i] ? rr[i] / precond_diag[i] : 0.0;
  };

  CgResult res;
  double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    for (std::size_t i = 0; i < nn; ++i)
      if (mask[i]) x[i] = 0.0;
    res.converged = true;
    return res;
  }
  double rnorm = std::sqrt(dot(r, r));
  if (rnorm <= rel_tol * bnorm) {
    res.converged = true;
    res.residual_norm = rnorm;
    return res;
  }

  precond(r, z);
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    apply(p, ap);
    double pap = dot(p, ap);
    if (!(pap > 0.0)) {
      res.indefinite = true;
      res.iterations = it;
      res.residual_norm = rnorm;
      return res;
    }
    double alpha = rz / pap;
    for (std::size_t i = 0; i < nn; ++i)
      if (mask[i]) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
    rnorm = std::sqrt(dot(r, r));
    res.iterations = it + 1;
    if (rnorm <= rel_tol * bnorm) {
      res.converged = true;
      res.residual_norm = rnorm;
      return res;
    }
    precond(r, z);
    double rz_next = dot(r, z);
    double beta = rz_next / rz;
    rz = rz_next;
    for (std::size_t i = 0; i < nn; ++i)
      if (mask[i]) p[i] = z[i] + beta * p[i];
  }
  res.residual_norm = rnorm;
  return res;
}

}  // namespace anisolab::stencil
