#include "anisolab/grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "anisolab/quadrature.hpp"

namespace anisolab::grid {

namespace {

// odometer over a per-axis bound; returns false when exhausted
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

std::size_t Grid::size() const {
  std::size_t p = 1;
  for (int v : N) p *= static_cast<std::size_t>(v);
  return p;
}

std::size_t Grid::stride(int axis) const {
  std::size_t st = 1;
  for (int a = n() - 1; a > axis; --a) st *= static_cast<std::size_t>(N[a]);
  return st;
}

std::shared_ptr<const Grid> Grid::make(int d, int s, std::vector<double> L, std::vector<int> N) {
  if (d < 0 || s < 1) throw std::runtime_error("grid: need d >= 0 and s >= 1");
  const std::size_t n = static_cast<std::size_t>(d + s);
  if (L.size() != n || N.size() != n)
    throw std::runtime_error("grid: L and N must have d+s entries");
  for (std::size_t a = 0; a < n; ++a) {
    if (N[a] < 3) throw std::runtime_error("grid: need at least 3 nodes per axis");
    if (!(L[a] > 0.0)) throw std::runtime_error("grid: half-lengths must be positive");
  }
  Grid g;
  g.d = d;
  g.s = s;
  g.L = std::move(L);
  g.N = std::move(N);
  return std::make_shared<const Grid>(std::move(g));
}

GridField::GridField(std::shared_ptr<const Grid> g)
    : grid_(std::move(g)), values_(grid_->size(), 0.0) {}

GridField::GridField(std::shared_ptr<const Grid> g, std::vector<double> values)
    : grid_(std::move(g)), values_(std::move(values)) {
  if (values_.size() != grid_->size())
    throw std::runtime_error("field: value count must match node count");
}

void GridField::check_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) throw std::runtime_error("field contains non-finite values");
}

GridField GridField::sample(std::shared_ptr<const Grid> g,
                            const std::function<double(std::span<const double>)>& f) {
  GridField out(g);
  const Grid& gr = *g;
  const int n = gr.n();
  std::vector<double> x(n);
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    for (int a = 0; a < n; ++a) x[a] = gr.coord(a, idx[a]);
    out[flat++] = f(x);
  } while (next_index(idx, gr.N));
  return out;
}

void node_coords(const Grid& g, std::size_t flat, std::span<double> x) {
  for (int a = g.n() - 1; a >= 0; --a) {
    std::size_t Na = static_cast<std::size_t>(g.N[a]);
    x[a] = g.coord(a, static_cast<int>(flat % Na));
    flat /= Na;
  }
}

std::vector<double> eval_on_xprime_lattice(const weights::Weight& w, const Grid& g) {
  std::size_t count = 1;
  for (int a = 0; a < g.d; ++a) count *= static_cast<std::size_t>(g.N[a]);
  std::vector<double> out(count);
  std::vector<double> xp(g.d);
  for (std::size_t flat = 0; flat < count; ++flat) {
    std::size_t rem = flat;
    for (int a = g.d - 1; a >= 0; --a) {
      std::size_t Na = static_cast<std::size_t>(g.N[a]);
      xp[a] = g.coord(a, static_cast<int>(rem % Na));
      rem /= Na;
    }
    out[flat] = w(xp);
  }
  return out;
}

GridField weighted_div(const weights::WeightSpec& w, const GridField& u,
                       const std::vector<bool>& periodic) {
  const Grid& g = u.grid();
  if (w.d != g.d || w.s != g.s)
    throw std::runtime_error("weighted_div: weight split (d,s) must match the grid");
  const int n = g.n();
  if (!periodic.empty() && static_cast<int>(periodic.size()) != n)
    throw std::runtime_error("weighted_div: periodic flags must cover all axes");
  for (int a = g.d; a < n; ++a)
    if (!periodic.empty() && periodic[a])
      throw std::runtime_error("weighted_div: periodic axes must lie in x'");

  const std::vector<double> gamma_lat = eval_on_xprime_lattice(w.gamma, g);

  GridField out(u.grid_ptr());
  std::vector<int> idx(n, 0);
  std::span<const double> uv = u.values();
  std::size_t flat = 0;
  do {
    bool skip = false;
    for (int a = 0; a < n && !skip; ++a) {
      bool per = !periodic.empty() && periodic[a];
      if (!per && (idx[a] == 0 || idx[a] == g.N[a] - 1)) skip = true;
    }
    if (!skip) {
      std::size_t xp = 0;
      for (int a = 0; a < g.d; ++a) xp = xp * static_cast<std::size_t>(g.N[a]) + static_cast<std::size_t>(idx[a]);
      const double gc = gamma_lat[xp];
      double acc = 0.0;
      for (int a = 0; a < n; ++a) {
        const std::size_t st = g.stride(a);
        const int Na = g.N[a];
        const bool per = !periodic.empty() && periodic[a];
        const int i = idx[a];
        std::size_t ip, im;
        if (per) {
          // nodes 0 and Na-1 coincide; the period spans Na-1 cells
          const int up = (i + 1) % (Na - 1);
          const int dn = (i - 1 + (Na - 1)) % (Na - 1);
          const std::size_t base = flat - static_cast<std::size_t>(i) * st;
          ip = base + static_cast<std::size_t>(up) * st;
          im = base + static_cast<std::size_t>(dn) * st;
        } else {
          ip = flat + st;
          im = flat - st;
        }
        double gp, gm;
        if (a < g.d) {
          std::size_t xp_st = 1;
          for (int b = g.d - 1; b > a; --b) xp_st *= static_cast<std::size_t>(g.N[b]);
          const int iu = per ? (i + 1) % (Na - 1) : i + 1;
          const int idn = per ? (i - 1 + (Na - 1)) % (Na - 1) : i - 1;
          const std::size_t xp_base = xp - static_cast<std::size_t>(i) * xp_st;
          gp = 0.5 * (gc + gamma_lat[xp_base + static_cast<std::size_t>(iu) * xp_st]);
          gm = 0.5 * (gc + gamma_lat[xp_base + static_cast<std::size_t>(idn) * xp_st]);
        } else {
          gp = gm = gc;
        }
        const double h2 = g.h(a) * g.h(a);
        acc += (gp * (uv[ip] - uv[flat]) - gm * (uv[flat] - uv[im])) / h2;
      }
      out[flat] = acc;
    }
    ++flat;
  } while (next_index(idx, g.N));
  // periodic axes: mirror the duplicated end plane
  if (!periodic.empty()) {
    for (int a = 0; a < n; ++a) {
      if (!periodic[a]) continue;
      const std::size_t st = g.stride(a);
      const int Na = g.N[a];
      std::vector<int> bidx(n, 0);
      std::vector<int> bound = g.N;
      bound[a] = 1;
      do {
        std::size_t base = 0;
        for (int b = 0; b < n; ++b) base += static_cast<std::size_t>(bidx[b]) * g.stride(b);
        out[base + static_cast<std::size_t>(Na - 1) * st] = out[base];
      } while (next_index(bidx, bound));
    }
  }
  return out;
}

GridField axis_derivative(const GridField& u, int axis) {
  const Grid& g = u.grid();
  const int n = g.n();
  if (axis < 0 || axis >= n) throw std::runtime_error("axis_derivative: axis out of range");
  const std::size_t st = g.stride(axis);
  const int Na = g.N[axis];
  const double h = g.h(axis);
  GridField out(u.grid_ptr());
  std::span<const double> uv = u.values();
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    const int i = idx[axis];
    if (i == 0)
      out[flat] = (-3.0 * uv[flat] + 4.0 * uv[flat + st] - uv[flat + 2 * st]) / (2.0 * h);
    else if (i == Na - 1)
      out[flat] = (3.0 * uv[flat] - 4.0 * uv[flat - st] + uv[flat - 2 * st]) / (2.0 * h);
    else
      out[flat] = (uv[flat + st] - uv[flat - st]) / (2.0 * h);
    ++flat;
  } while (next_index(idx, g.N));
  return out;
}

SplitGradients split_gradients(const GridField& u) {
  const Grid& g = u.grid();
  SplitGradients out;
  for (int a = 0; a < g.d; ++a) out.xprime.push_back(axis_derivative(u, a));
  for (int a = g.d; a < g.n(); ++a) out.xsecond.push_back(axis_derivative(u, a));
  return out;
}

namespace {

// min and max of |x|^2 over an axis-aligned cell
void cell_radius2_range(const std::vector<double>& lo, const std::vector<double>& hi,
                        double& r2min, double& r2max) {
  r2min = 0.0;
  r2max = 0.0;
  for (std::size_t a = 0; a < lo.size(); ++a) {
    double amax = std::max(std::abs(lo[a]), std::abs(hi[a]));
    double amin = (lo[a] <= 0.0 && hi[a] >= 0.0) ? 0.0 : std::min(std::abs(lo[a]), std::abs(hi[a]));
    r2min += amin * amin;
    r2max += amax * amax;
  }
}

}  // namespace

VolumeIntegral volume_integral(const GridField& q, double R) {
  const Grid& g = q.grid();
  const int n = g.n();
  if (n > 4) throw std::runtime_error("volume_integral: supports n <= 4");
  VolumeIntegral res;
  for (int a = 0; a < n; ++a)
    if (R > g.L[a]) res.truncated = true;

  const double R2 = R * R;
  std::span<const double> qv = q.values();

  double cellvol = 1.0;
  for (int a = 0; a < n; ++a) cellvol *= g.h(a);

  std::vector<int> cells(n);
  for (int a = 0; a < n; ++a) cells[a] = g.N[a] - 1;
  std::vector<int> c(n, 0);
  std::vector<double> lo(n), hi(n);
  const int corners = 1 << n;
  int subsamples = 1;
  for (int a = 0; a < n; ++a) subsamples *= 3;

  double acc = 0.0;
  do {
    for (int a = 0; a < n; ++a) {
      lo[a] = g.coord(a, c[a]);
      hi[a] = g.coord(a, c[a] + 1);
    }
    double r2min, r2max;
    cell_radius2_range(lo, hi, r2min, r2max);
    if (r2min < R2) {
      std::size_t base = 0;
      for (int a = 0; a < n; ++a) base += static_cast<std::size_t>(c[a]) * g.stride(a);
      double avg = 0.0;
      for (int k = 0; k < corners; ++k) {
        std::size_t off = base;
        for (int a = 0; a < n; ++a)
          if (k & (1 << a)) off += g.stride(a);
        avg += qv[off];
      }
      avg /= corners;
      double frac = 1.0;
      if (r2max > R2) {
        int inside = 0;
        for (int t = 0; t < subsamples; ++t) {
          double r2 = 0.0;
          int rem = t;
          for (int a = 0; a < n; ++a) {
            int sa = rem % 3;
            rem /= 3;
            double x = lo[a] + (2 * sa + 1) * (hi[a] - lo[a]) / 6.0;
            r2 += x * x;
          }
          if (r2 <= R2) ++inside;
        }
        frac = static_cast<double>(inside) / subsamples;
      }
      acc += avg * frac * cellvol;
    }
  } while (next_index(c, cells));
  res.value = acc;
  return res;
}

double box_integral(const GridField& q) {
  const Grid& g = q.grid();
  const int n = g.n();
  double cellvol = 1.0;
  for (int a = 0; a < n; ++a) cellvol *= g.h(a);
  std::span<const double> qv = q.values();
  // trapezoid: nodes weighted by 2^{-#boundary axes}
  double acc = 0.0;
  std::vector<int> idx(n, 0);
  std::size_t flat = 0;
  do {
    double wgt = 1.0;
    for (int a = 0; a < n; ++a)
      if (idx[a] == 0 || idx[a] == g.N[a] - 1) wgt *= 0.5;
    acc += wgt * qv[flat++];
  } while (next_index(idx, g.N));
  return acc * cellvol;
}

double sphere_weight_constant(int s) {
  if (s < 1) throw std::runtime_error("sphere weight: need s >= 1");
  if (s == 1) return 1.0;
  // k_s = omega_{s-2} * int_0^1 r^{s-2} (1-r^2)^{-1/2} dr; r = sin(theta)
  // removes the endpoint singularity.
  const int m = s - 2;
  double omega;
  if (m == 0)
    omega = 2.0;
  else
    omega = 2.0 * std::pow(M_PI, (m + 1) / 2.0) / std::tgamma((m + 1) / 2.0);
  quad::Options opt;
  opt.rel_tol = 1e-12;
  double radial =
      quad::integrate([s](double th) { return std::pow(std::sin(th), s - 2); }, 0.0, M_PI / 2.0,
                      opt);
  return omega * radial;
}

double surface_integral(const std::function<double(std::span<const double>)>& gamma, double R,
                        int d, int s) {
  if (s < 1) throw std::runtime_error("surface_integral: need s >= 1");
  if (d < 0 || d > 2) throw std::runtime_error("surface_integral: supports d <= 2");
  if (!(R > 0.0)) throw std::runtime_error("surface_integral: need R > 0");
  static std::map<int, double> ks_cache;
  static std::mutex ks_mu;
  double ks;
  {
    std::lock_guard<std::mutex> lock(ks_mu);
    auto it = ks_cache.find(s);
    if (it == ks_cache.end()) it = ks_cache.emplace(s, sphere_weight_constant(s)).first;
    ks = it->second;
  }

  quad::Options opt;
  opt.rel_tol = 1e-10;
  double ball;  // int_{B_R^d} gamma (R^2-|x'|^2)^{(s-2)/2} dx'
  if (d == 0) {
    ball = gamma(std::span<const double>{}) * std::pow(R, s - 2);
  } else if (d == 1) {
    ball = std::pow(R, s - 1) *
           quad::integrate(
               [&gamma, R, s](double th) {
                 double x = R * std::sin(th);
                 return gamma(std::span<const double>(&x, 1)) * std::pow(std::cos(th), s - 1);
               },
               -M_PI / 2.0, M_PI / 2.0, opt);
  } else {
    ball = std::pow(R, s) *
           quad::integrate(
               [&gamma, R, s, &opt](double th) {
                 double r = R * std::sin(th);
                 double w = std::pow(std::cos(th), s - 1) * std::sin(th);
                 double ang = quad::integrate(
                     [&gamma, r](double phi) {
                       double xy[2] = {r * std::cos(phi), r * std::sin(phi)};
                       return gamma(std::span<const double>(xy, 2));
                     },
                     0.0, 2.0 * M_PI, opt);
                 return w * ang;
               },
               0.0, M_PI / 2.0, opt);
  }
  return 2.0 * ks * R * ball;
}

double sphere_integral(const weights::Weight& gamma, double R, int d, int s) {
  if (s < 2) throw std::runtime_error("sphere_integral: requires s >= 2");
  return surface_integral([&gamma](std::span<const double> xp) { return gamma(xp); }, R, d, s);
}

double sphere_integral(const expr::Expr& gamma, double R, int d, int s) {
  if (s < 2) throw std::runtime_error("sphere_integral: requires s >= 2");
  return surface_integral([&gamma](std::span<const double> xp) { return gamma.eval(xp); }, R, d,
                          s);
}

// ------------------------------------------------------------------ container

namespace {

constexpr char kMagic[6] = {'A', 'N', 'I', 'S', 'O', '1'};

template <typename T>
void put(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

void append_number(std::string& line, double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  line.append(buf, p);
}

}  // namespace

void write_field(const std::string& path, const GridField& f) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  const Grid& g = f.grid();
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.d));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.s));
  for (int a = 0; a < g.n(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.N[a]));
  for (int a = 0; a < g.n(); ++a) put<double>(out, g.L[a]);
  out.write(reinterpret_cast<const char*>(f.values().data()),
            static_cast<std::streamsize>(f.values().size() * sizeof(double)));
  if (!out) throw std::runtime_error("write failed: " + path);
}

GridField read_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[6];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("not an ANISO1 field container: " + path);
  const int d = static_cast<int>(get<std::uint32_t>(in));
  const int s = static_cast<int>(get<std::uint32_t>(in));
  if (d < 0 || s < 1 || d + s > 8) throw std::runtime_error("corrupt field header: " + path);
  std::vector<int> N(d + s);
  std::vector<double> L(d + s);
  for (auto& v : N) v = static_cast<int>(get<std::uint32_t>(in));
  for (auto& v : L) v = get<double>(in);
  auto g = Grid::make(d, s, std::move(L), std::move(N));
  std::vector<double> values(g->size());
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated field container: " + path);
  return GridField(std::move(g), std::move(values));
}

void export_csv(const GridField& f, std::ostream& out) {
  const Grid& g = f.grid();
  const int n = g.n();
  for (int a = 0; a < n; ++a) out << 'x' << (a + 1) << ',';
  out << "value\n";
  std::vector<double> x(n);
  std::string line;
  const std::size_t total = g.size();
  for (std::size_t flat = 0; flat < total; ++flat) {
    node_coords(g, flat, x);
    line.clear();
    for (int a = 0; a < n; ++a) {
      append_number(line, x[a]);
      line += ',';
    }
    append_number(line, f[flat]);
    line += '\n';
    out << line;
  }
}

}  // namespace anisolab::grid
