#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "anisolab/weights.hpp"

namespace anisolab::grid {

/// Tensor-product box grid [-L_i, L_i] with the axes split into d weighted
/// (x') and s flat (x'') coordinates. Storage over nodes is row-major in axis
/// order x1..xn, so the last axis varies fastest.
struct Grid {
  int d = 0;
  int s = 1;
  std::vector<double> L;  // per-axis half-length
  std::vector<int> N;     // per-axis node count, >= 3

  int n() const { return d + s; }
  double h(int axis) const { return 2.0 * L[static_cast<std::size_t>(axis)] / (N[static_cast<std::size_t>(axis)] - 1); }
  double coord(int axis, int i) const { return -L[static_cast<std::size_t>(axis)] + h(axis) * i; }
  std::size_t size() const;
  std::size_t stride(int axis) const;

  static std::shared_ptr<const Grid> make(int d, int s, std::vector<double> L,
                                          std::vector<int> N);
};

class GridField {
public:
  GridField() = default;
  explicit GridField(std::shared_ptr<const Grid> g);
  GridField(std::shared_ptr<const Grid> g, std::vector<double> values);

  const Grid& grid() const { return *grid_; }
  const std::shared_ptr<const Grid>& grid_ptr() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::vector<double>& data() { return values_; }
  const std::vector<double>& data() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  bool empty() const { return grid_ == nullptr; }

  void check_finite() const;

  /// Sample an analytic function of the node coordinates.
  static GridField sample(std::shared_ptr<const Grid> g,
                          const std::function<double(std::span<const double>)>& f);

private:
  std::shared_ptr<const Grid> grid_;
  std::vector<double> values_;
};

/// Node coordinates for a flat index (size n buffer supplied by caller).
void node_coords(const Grid& g, std::size_t flat, std::span<double> x);

/// div(gamma grad u) in conservative flux form. Along each axis
/// (g_{i+1/2}(u_{i+1}-u_i) - g_{i-1/2}(u_i-u_{i-1}))/h^2 with the half-node
/// gamma as the arithmetic mean of the endpoint evaluations. Boundary nodes
/// of non-periodic axes are set to zero; boundary handling belongs to the
/// solver. `periodic` may be empty (all axes non-periodic).
GridField weighted_div(const weights::WeightSpec& w, const GridField& u,
                       const std::vector<bool>& periodic = {});

/// Per-axis first derivatives: central in the interior, second-order
/// one-sided at the boundary.
GridField axis_derivative(const GridField& u, int axis);

struct SplitGradients {
  std::vector<GridField> xprime;   // d fields
  std::vector<GridField> xsecond;  // s fields
};

SplitGradients split_gradients(const GridField& u);

struct VolumeIntegral {
  double value = 0.0;
  bool truncated = false;  // R reached beyond the box
};

/// Trapezoidal integral of q over the n-ball of radius R intersected with the
/// box. Cells cut by the sphere are weighted by the sampled inclusion
/// fraction (3^n midpoint subsamples).
VolumeIntegral volume_integral(const GridField& q, double R);

/// Trapezoidal integral over the whole box.
double box_integral(const GridField& q);

/// Weighted surface integral int_{partial B_R} gamma(x') dS for gamma
/// depending on x' only, via the hemisphere weight
/// w(R,x') = k_s R (R^2-|x'|^2)^{(s-2)/2} doubled for both hemispheres.
/// Valid for s >= 1 and d <= 2; the sqrt endpoint behaviour is absorbed by a
/// sine substitution.
double surface_integral(const std::function<double(std::span<const double>)>& gamma, double R,
                        int d, int s);

/// The Lemma-surface form of the integral; requires s >= 2.
double sphere_integral(const weights::Weight& gamma, double R, int d, int s);
double sphere_integral(const expr::Expr& gamma, double R, int d, int s);

/// k_s = int_{B_1^{s-1}} dz/(1-|z|^2)^{1/2}, computed once per s by
/// quadrature.
double sphere_weight_constant(int s);

/// Evaluate a weight on the x'-sublattice of g; index = flat index over the
/// first d axes.
std::vector<double> eval_on_xprime_lattice(const weights::Weight& w, const Grid& g);

// ---------------------------------------------------------------- container

/// Flat binary container: magic "ANISO1", u32 d, u32 s, then per axis u32 N
/// and f64 L (little endian), then row-major f64 node values.
void write_field(const std::string& path, const GridField& f);
GridField read_field(const std::string& path);

void export_csv(const GridField& f, std::ostream& out);

}  // namespace anisolab::grid
