#pragma once

#include <functional>
#include <span>
#include <stdexcept>

namespace anisolab::quad {

class QuadratureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  int max_depth = 48;
  long max_intervals = 200000;
};

/// Adaptive integration of f over [a,b]. Subdivision is driven by comparing a
/// 15-point Gauss-Legendre estimate against the two-half refinement, with the
/// local tolerance proportional to the running global estimate. The interval
/// tree, and hence the result, is deterministic and scale-covariant:
/// integrate(c*f) == c*integrate(f) to roundoff.
double integrate(const std::function<double(double)>& f, double a, double b,
                 const Options& opt = {});

/// Iterated integral of f over the d-dimensional ball of radius R centered at
/// the origin. d = 0 returns f of the empty point. Throws QuadratureError on
/// non-convergence.
double ball_integral(int d, double R, const std::function<double(std::span<const double>)>& f,
                     const Options& opt = {});

}  // namespace anisolab::quad
