#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "anisolab/grid.hpp"
#include "anisolab/weights.hpp"

namespace anisolab::geometry {

/// Pointwise pieces of the level-set identity in the x'' variables:
/// lhs = sum_k |grad d_k u|^2 - |grad |grad u||^2 (gradients over x''),
/// curvature = |grad u|^2 * sum kappa_j^2 with the principal curvatures from
/// the eigenvalues of P (H/|grad u|) P, tangential = |P grad |grad u||^2.
/// All three vanish off the active set {|grad_{x''} u| > eps_g}; nodes inside
/// the eps_g band are counted as excluded.
struct SZFields {
  grid::GridField lhs;
  grid::GridField curvature;
  grid::GridField tangential;
  std::size_t active = 0;
  std::size_t excluded = 0;
  double eps_g = 0.0;
};

SZFields sz_decomposition(const grid::GridField& u, double eps_g);

/// S = sum_{i<=d} [ sum_{j>d} |d_i d_j u|^2 - |d_i |grad_{x''} u||^2 ],
/// clamped to 0 where |grad_{x''} u| <= eps_g. Every difference in the x'
/// direction is a two-point operator, so the norm triangle inequality keeps
/// the discrete S nonnegative to roundoff.
grid::GridField s_quantity(const grid::GridField& u, double eps_g);

struct PoincareReport {
  double lhs_curvature = 0.0;  // int gamma phi^2 (|grad u|^2 K^2 + |grad_T|grad u||^2)
  double lhs_s = 0.0;          // int gamma phi^2 S
  double rhs = 0.0;            // int gamma |grad_{x''} u|^2 |grad phi|^2
  double slack = 0.0;          // rhs - lhs_curvature - lhs_s
  bool holds = false;          // slack >= -tol (1 + rhs)
  double tol = 0.0;
  double active_fraction = 0.0;
  double min_s = 0.0;  // pointwise minimum of the S field
  double eps_g = 0.0;
};

PoincareReport poincare_sides(const weights::WeightSpec& w, const grid::GridField& u,
                              const grid::GridField& phi, double eps_g, double tol = 1e-6);

// Test-function catalog; all vanish on the box boundary for R <= min L.
grid::GridField log_cutoff(std::shared_ptr<const grid::Grid> g, double R);
grid::GridField smooth_bump(std::shared_ptr<const grid::Grid> g, double R);
grid::GridField tensor_cosine(std::shared_ptr<const grid::Grid> g);

}  // namespace anisolab::geometry
