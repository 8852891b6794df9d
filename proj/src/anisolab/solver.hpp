#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anisolab/grid.hpp"
#include "anisolab/weights.hpp"

namespace anisolab::solver {

struct BoundarySpec {
  enum class Kind { Dirichlet, Periodic };
  std::vector<Kind> axes;                    // one per axis; Periodic only in x'
  std::optional<expr::Expr> data;            // Dirichlet data over x1..xn
  std::optional<std::vector<double>> tanh_k; // direction over the x'' axes
  std::function<double(std::span<const double>)> data_fn;  // numeric data

  /// u = tanh((k.x'')/sqrt(2)) on the boundary, k normalized, k_n > 0.
  static BoundarySpec tanh_profile(std::vector<double> k, int d, int s);
  static BoundarySpec dirichlet(expr::Expr data, int n_axes);
  static BoundarySpec dirichlet_fn(std::function<double(std::span<const double>)> fn,
                                   int n_axes);

  double value_at(const grid::Grid& g, std::span<const double> x) const;
  std::vector<bool> periodic_flags() const;
};

struct SolveReport {
  double residual = 0.0;  // max-norm of div(gamma grad u) + lambda f(u)
  int iterations = 0;
  int newton_steps = 0;
  int flow_steps = 0;
  bool converged = false;
  bool monotone = false;  // min interior d_n u > 0
  double min_dn_u = 0.0;
  double min_u = 0.0;
  double max_u = 0.0;
  std::string note;
};

struct InitSpec {
  enum class Kind { TanhProfile, Zero, Random, Field };
  Kind kind = Kind::TanhProfile;
  std::vector<double> k;  // TanhProfile direction over x'' (defaults to e_n)
  unsigned seed = 0;      // Random
  grid::GridField field;  // Field

  static InitSpec tanh_profile(std::vector<double> k = {});
  static InitSpec zero();
  static InitSpec random(unsigned seed);
  static InitSpec from_field(grid::GridField f);
};

/// Solve -div(gamma grad u) = lambda f(u) on the box. Stage one is a
/// semi-implicit gradient flow (implicit diffusion, explicit reaction) that
/// finds the basin; stage two is damped Newton with CG inner solves. Returns
/// the best iterate with a report; report.converged is false when maxIter is
/// exhausted first.
std::pair<grid::GridField, SolveReport> solve(const weights::WeightSpec& w,
                                              const weights::Nonlinearity& f,
                                              std::shared_ptr<const grid::Grid> g,
                                              const BoundarySpec& bc, const InitSpec& init,
                                              double tol, int max_iter);

/// Max-norm of div(gamma grad u) + lambda f(u) over interior nodes, computed
/// through grid::weighted_div (independent of the solver's stencil).
double residual_norm(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                     const grid::GridField& u, const std::vector<bool>& periodic = {});

/// u^t(x''', x_n) = u(x''', x_n + t) for grid-aligned t. Nodes shifted past
/// the top (bottom) boundary take the asymptotic value fill_top (fill_bottom),
/// +1/-1 for tanh-profile data.
grid::GridField shift(const grid::GridField& u, double t, double fill_top = 1.0,
                      double fill_bottom = -1.0);

/// Monotone diagnosis: minimum of the central d_n difference over interior
/// nodes.
double min_interior_dn(const grid::GridField& u);

}  // namespace anisolab::solver
