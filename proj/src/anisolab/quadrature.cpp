#include "anisolab/quadrature.hpp"

#include <array>
#include <cmath>
#include <vector>

namespace anisolab::quad {

namespace {

constexpr int kPoints = 15;

struct Rule {
  std::array<double, kPoints> x{};  // nodes on [-1,1]
  std::array<double, kPoints> w{};
};

// Gauss-Legendre nodes as roots of P_n found by Newton iteration from the
// Chebyshev initial guess (classic gauleg construction).
Rule build_rule() {
  Rule r;
  const int n = kPoints;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.x[static_cast<std::size_t>(i)] = -x;
    r.w[static_cast<std::size_t>(i)] = w;
    r.x[static_cast<std::size_t>(n - 1 - i)] = x;
    r.w[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return r;
}

const Rule& rule() {
  static const Rule r = build_rule();
  return r;
}

double gl15(const std::function<double(double)>& f, double a, double b) {
  const Rule& r = rule();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < kPoints; ++i) s += r.w[static_cast<std::size_t>(i)] * f(c + h * r.x[static_cast<std::size_t>(i)]);
  return s * h;
}

struct Adapt {
  const std::function<double(double)>& f;
  const Options& opt;
  long used = 0;

  double run(double a, double b) {
    double coarse = gl15(f, a, b);
    double scale = std::abs(coarse);
    return refine(a, b, coarse, scale, 0);
  }

  double refine(double a, double b, double whole, double scale, int depth) {
    if (++used > opt.max_intervals)
      throw QuadratureError("quadrature did not converge (interval budget exhausted)");
    const double m = 0.5 * (a + b);
    const double left = gl15(f, a, m);
    const double right = gl15(f, m, b);
    const double fine = left + right;
    const double err = std::abs(fine - whole);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::max(scale, std::abs(fine)));
    if (err <= tol || depth >= opt.max_depth) {
      if (depth >= opt.max_depth && err > 1e3 * tol && err > 1e-280)
        throw QuadratureError("quadrature did not converge (max depth reached)");
      return fine;
    }
    const double s = std::max(scale, std::abs(fine));
    return refine(a, m, left, s, depth + 1) + refine(m, b, right, s, depth + 1);
  }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, const Options& opt) {
  if (a == b) return 0.0;
  Adapt ad{f, opt};
  return ad.run(a, b);
}

double ball_integral(int d, double R,
                     const std::function<double(std::span<const double>)>& f,
                     const Options& opt) {
  if (d < 0) throw QuadratureError("ball_integral: negative dimension");
  if (d == 0) return f(std::span<const double>{});

  // Peel one coordinate at a time; the slice of B_R^d at x1 = t is B_rho^{d-1}
  // with rho = sqrt(R^2 - t^2).
  struct Level {
    std::vector<double> point;
    const std::function<double(std::span<const double>)>& fn;
    const Options& opt;
    int d;

    double run(int k, double rho) {
      if (k == d) return fn(std::span<const double>(point.data(), point.size()));
      auto slice = [this, k, rho](double t) {
        point[static_cast<std::size_t>(k)] = t;
        double rem2 = rho * rho - t * t;
        return run(k + 1, rem2 > 0.0 ? std::sqrt(rem2) : 0.0);
      };
      return integrate(slice, -rho, rho, opt);
    }
  };

  Level lvl{std::vector<double>(static_cast<std::size_t>(d), 0.0), f, opt, d};
  return lvl.run(0, R);
}

}  // namespace anisolab::quad
