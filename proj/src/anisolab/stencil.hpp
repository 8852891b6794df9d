#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "anisolab/grid.hpp"
#include "anisolab/weights.hpp"

namespace anisolab::stencil {

/// Assembled conservative stencil for L = -div(gamma grad .) on a box with
/// homogeneous Dirichlet data (periodic wrap optional on x' axes). The
/// discrete operator is symmetric; unknowns are the non-boundary nodes (and
/// for periodic axes all nodes except the duplicated end plane). Vectors are
/// stored on the full grid with zeros at non-unknown nodes.
class Stencil {
public:
  Stencil(const weights::WeightSpec& w, std::shared_ptr<const grid::Grid> g,
          std::vector<bool> periodic);

  const grid::Grid& grid() const { return *grid_; }
  const std::shared_ptr<const grid::Grid>& grid_ptr() const { return grid_; }

  std::span<const std::uint8_t> mask() const { return mask_; }
  bool unknown(std::size_t flat) const { return mask_[flat] != 0; }
  std::size_t unknown_count() const { return unknown_count_; }

  /// out = L v (rows of unknown nodes; other entries set to 0). v must be
  /// zero on non-unknown nodes for the symmetric interpretation.
  void apply(std::span<const double> v, std::span<double> out) const;

  /// Row diagonal of L.
  std::span<const double> diag() const { return diag_; }

  /// Sum of |off-diagonal| row entries over unknown columns.
  std::span<const double> offdiag_sum() const { return offsum_; }

  /// gamma evaluated at each node's x'.
  std::span<const double> gamma_nodes() const { return gamma_node_; }

  /// Enforce zero at non-unknown nodes.
  void project(std::span<double> v) const;

  /// Copy the values of periodic duplicate planes from their canonical nodes.
  void mirror_periodic(std::span<double> v) const;

  const std::vector<bool>& periodic() const { return periodic_; }

private:
  std::shared_ptr<const grid::Grid> grid_;
  std::vector<bool> periodic_;
  std::vector<std::uint8_t> mask_;
  std::size_t unknown_count_ = 0;
  // x' axes carry half-node coefficients; x'' axes reuse gamma at the node
  std::vector<std::vector<double>> cp_, cm_;  // size d, each full-grid
  std::vector<double> gamma_node_;
  std::vector<double> inv_h2_;
  std::vector<double> diag_;
  std::vector<double> offsum_;
};

struct CgResult {
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  bool indefinite = false;  // encountered nonpositive curvature
};

/// Preconditioned conjugate gradient with Jacobi preconditioning, fixed
/// sequential reductions. apply must implement a symmetric positive operator
/// on the masked subspace; x is both the initial guess and the result.
CgResult cg_solve(const std::function<void(std::span<const double>, std::span<double>)>& apply,
                  std::span<const double> precond_diag, std::span<const std::uint8_t> mask,
                  std::span<const double> b, std::span<double> x, double rel_tol, int max_iter);

}  // namespace anisolab::stencil
