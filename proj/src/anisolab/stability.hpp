#pragma once

#include <string>
#include <utility>
#include <vector>

#include "anisolab/grid.hpp"
#include "anisolab/weights.hpp"

namespace anisolab::stability {

struct FormValue {
  std::string label;
  double lhs = 0.0;  // int lambda f'(u) psi^2
  double rhs = 0.0;  // int gamma |grad psi|^2
  bool stable = false;
};

struct StabilityReport {
  double mu1 = 0.0;
  grid::GridField eigenfield;  // normalized: int lambda psi^2 = 1 when lambda != 0
  bool eigen_positive = false;
  bool lambda_weighted = false;  // which norm the eigenproblem used
  int iterations = 0;
  bool converged = false;  // false flags iteration stagnation
  double shift = 0.0;
  double eigen_residual = 0.0;
  std::vector<FormValue> form_values;
};

/// Both sides of the stability inequality for a boundary-vanishing test
/// field: (int lambda f'(u) psi^2, int gamma |grad psi|^2), full-box
/// trapezoid quadrature. Throws when psi does not vanish on the boundary.
std::pair<double, double> quadratic_form(const weights::WeightSpec& w,
                                         const weights::Nonlinearity& f, const grid::GridField& u,
                                         const grid::GridField& psi);

/// Discrete Rayleigh quotient <psi, (L - lambda f'(u)) psi> / <psi, B psi>
/// with the assembled stencil, B = diag(lambda) when lambda is not
/// identically zero, else the identity. Lower-bounded by mu1.
double rayleigh_quotient(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                         const grid::GridField& u, const grid::GridField& psi);

/// Smallest eigenpair of -div(gamma grad psi) - lambda f'(u) psi = mu B psi
/// on the box with homogeneous Dirichlet data, by shifted inverse power
/// iteration (Gershgorin shift, CG inner solves).
StabilityReport min_eigenpair(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                              const grid::GridField& u);

struct CertificateReport {
  bool certified = false;
  double min_dn_u = 0.0;
  double linear_residual = 0.0;
  double tolerance = 0.0;
  std::size_t violating_node = static_cast<std::size_t>(-1);
};

/// Monotonicity-based pointwise stability: v = d_n u must be positive on the
/// interior and satisfy the linearized equation (the discrete x_n derivative
/// of the main equation, secant-slope linearization) with residual within
/// 10 * solve_tol.
CertificateReport pointwise_certificate(const weights::WeightSpec& w,
                                        const weights::Nonlinearity& f, const grid::GridField& u,
                                        double solve_tol);

}  // namespace anisolab::stability
