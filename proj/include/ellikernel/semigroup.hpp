#pragma once

#include <cstddef>
#include <vector>

#include "ellikernel/sparse_operator.hpp"

namespace ellikernel {

struct SemigroupOptions {
  /// Operators up to this size use the dense spectral path.
  std::size_t dense_threshold = 4096;
  double tol = 1e-9;
  int krylov_dim = 64;
};

/// Dense spectral calculus for a symmetric PSD operator: exp(-t op) = V exp(-t Lambda) V^T.
/// Eigenvalues below zero (roundoff) are clamped to zero so every exp(-t op) is a contraction.
class SpectralPropagator {
 public:
  explicit SpectralPropagator(const SparseOperator& op);

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  GridFunction apply(double t, const GridFunction& v) const;
  Eigen::MatrixXd semigroup(double t) const;

 private:
  Grid grid_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd V_;
};

/// exp(-t op) v. Dense spectral path for small operators, restarted Lanczos otherwise.
GridFunction semigroup_apply(const SparseOperator& op, double t, const GridFunction& v,
                             const SemigroupOptions& opts = {});

/// One time slice of the discrete heat kernel, K(x,y) = (exp(-t op) e_y)(x) / cell_vol.
struct KernelSlice {
  double t = 0.0;
  Eigen::MatrixXd K;
  double symmetry_defect = 0.0;  // max |K - K^T| / max |K|
  double min_entry = 0.0;        // min K / max |K|
  double mass_defect = 0.0;      // max_x |sum_y K(x,y) cell_vol - 1|

  bool symmetric_ok(double tol = 1e-9) const { return symmetry_defect <= tol; }
  bool positive_ok(double tol = 1e-9) const { return min_entry >= -tol; }
  bool mass_ok(double tol = 1e-9) const { return mass_defect <= tol; }
};

KernelSlice make_kernel_slice(const Grid& grid, double t, Eigen::MatrixXd semigroup);

KernelSlice kernel_matrix(const SparseOperator& op, double t, const SemigroupOptions& opts = {});
KernelSlice kernel_matrix(const SpectralPropagator& prop, double t);

/// `count` log-spaced times in [t_min, t_max]; t_min defaults to max(4 dx^2, 1e-3).
std::vector<double> kernel_time_grid(const Grid& grid, double t_max = 1.0, int count = 16, double t_min = 0.0);

}  // namespace ellikernel
