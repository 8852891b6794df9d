#pragma once

#include <string>
#include <vector>

#include "anisolab/grid.hpp"
#include "anisolab/scan.hpp"
#include "anisolab/weights.hpp"

namespace anisolab::liouville {

/// Pointwise energy density (1/2) gamma |grad u|^2 - lambda (F(u) - F(1)).
grid::GridField energy_density(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                               const grid::GridField& u);

/// Ball-truncated energy E_R(u); `truncated` reports when the n-ball spills
/// out of the box.
double energy(const weights::WeightSpec& w, const weights::Nonlinearity& f,
              const grid::GridField& u, double R, bool* truncated = nullptr);

enum class EnergyBoundMode {
  SurfaceA,  // E_R(u) <= k * int_{dB_R} gamma dS, monotone u with limit +1
  VolumeB,   // int_{B_R} gamma |grad u|^2 <= k R^s int_{B_R^d} (lambda + R^-2 gamma) dx'
};

struct EnergyBoundScan {
  scan::EnergyScan scan;
  double k_formula = 0.0;  // ||grad u||_inf ||u||_inf (mode A cross-check)
};

EnergyBoundScan energy_bound_scan(const weights::WeightSpec& w, const weights::Nonlinearity& f,
                                  const grid::GridField& u, EnergyBoundMode mode,
                                  const std::vector<double>& radii);

struct ShiftedEnergyPoint {
  double t = 0.0;
  double energy_u = 0.0;        // E_R(u)
  double energy_shifted = 0.0;  // E_R(u^t)
  double surface_term = 0.0;    // k int_{dB_R} gamma dS
  double slack = 0.0;           // E_R(u^t) + k S - E_R(u)
  bool inequality_ok = false;
  double dE_fd = 0.0;       // central difference of E_R(u^t) in t
  double dE_surface = 0.0;  // int_{dB_R} gamma (nu . grad u^t)(d_n u^t) dS
};

struct ShiftedEnergyReport {
  std::vector<ShiftedEnergyPoint> points;
  double k_constant = 0.0;
  bool decreasing = false;  // E_R(u^t) nonincreasing along the t list
  bool truncated = false;
};

/// Energy comparison along upward shifts plus the surface form of dE/dt,
/// cross-checked against a finite difference in t.
ShiftedEnergyReport shifted_energy_check(const weights::WeightSpec& w,
                                         const weights::Nonlinearity& f, const grid::GridField& u,
                                         const std::vector<double>& t_list, double R);

struct RatioDirection {
  int axis = 0;          // 1-based axis index in d+1..n
  double spread = 0.0;   // max - min of sigma_i over the trusted region
  double k_value = 0.0;  // weighted mean of sigma_i
  double divergence_residual = 0.0;  // max |div(gamma phi_n^2 grad sigma_i)|
};

struct RatioReport {
  std::vector<RatioDirection> directions;  // axes d+1..n-1 (sigma_n = 1)
  double trusted_fraction = 0.0;           // nodes with d_n u > eps_m
  bool unreliable = false;                 // trusted fraction < 1/2
  bool varies_in_xprime = false;
  int m_estimate = 0;
  std::vector<double> k;  // detected direction, k_n = 1 before normalization
  double eps_m = 0.0;
  double theta = 0.0;
  int boundary_margin = 0;  // node layers excluded from the statistics
};

/// Ratio fields sigma_i = d_i u / d_n u on the trusted region, their spreads
/// and divergence residuals, and the dimensionality estimate
/// m = 1 + #{nonconstant sigma directions} + (1 if u varies in x').
RatioReport ratio_diagnostic(const weights::WeightSpec& w, const grid::GridField& u, double eps_m,
                             double theta = -1.0, int boundary_margin = 2);

enum class ScanRegion { Annulus, Ball };

/// Integrals of gamma |grad_{x''} u|^2 over B_{2R}\B_R (or B_R) against the
/// envelope R^2 g(R).
scan::EnergyScan gradient_growth_scan(const weights::WeightSpec& w, const grid::GridField& u,
                                      const expr::Expr& g, ScanRegion region,
                                      const std::vector<double>& radii);

struct MoschiniReport {
  double r0 = 0.0;
  double value_match_residual = 0.0;
  double slope_match_residual = 0.0;
  double min_inner_laplacian = 0.0;
  double max_outer_laplacian = 0.0;
  scan::EnergyScan annulus_scan;  // int_{B_2R \ B_R} sigma^2 vs R^2 log^2 R
  double tail_spread = 0.0;       // max/min - 1 over the scan tail
  bool c1_ok = false;
  bool subsolution_ok = false;
  bool growth_ok = false;
};

/// The planar piecewise radial example: C^1 matching at r = R0, the
/// subsolution sign, and the annulus growth against R^2 log^2 R.
MoschiniReport moschini_verify(double R0, const std::vector<double>& radii);

struct RemarkReport {
  int n = 0;
  double max_identity_residual = 0.0;  // relative, h sigma^2 vs (1+r^2)^{-1/2}
  double min_sigma_div = 0.0;          // min over radii of sigma div(h grad sigma)
  scan::EnergyScan ball_scan;          // int_{B_R} h sigma^2 vs R^{n-1}
  double tail_spread = 0.0;
  bool identity_ok = false;
  bool subsolution_ok = false;
  bool growth_ok = false;
};

/// The power-weight counterexample family h = (1+r^2)^{-(2n-5)/2},
/// sigma = (1+r^2)^{(n-3)/2} for n >= 4.
RemarkReport remark_verify(int n, const std::vector<double>& radii);

/// v(x''', x_n) = -u(x''', -x_n).
grid::GridField reflect_negate(const grid::GridField& u);

}  // namespace anisolab::liouville
