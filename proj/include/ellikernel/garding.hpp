#pragma once

#include <cstddef>
#include <string>

#include "ellikernel/sparse_operator.hpp"

namespace ellikernel {

/// Largest mu with h >= mu * l on mean-zero grid functions.
///
/// On the torus both forms vanish on constants, so the shifted variant
/// h >= mu*l - nu*|phi|^2 collapses to the unshifted one and nu is reported as 0.
struct GardingResult {
  double mu = 0.0;
  double nu = 0.0;
  /// Minimising generalized eigenvector, normalised to unit 2-norm.
  GridFunction eigvec;
  std::string method;  // "dense" or "lobpcg"
  int iterations = 0;
  double residual = 0.0;
};

struct GardingOptions {
  std::size_t dense_threshold = 2048;
  double rel_tol = 1e-8;
  int max_iterations = 5000;
};

/// Dense congruence W = U_+ Lambda_+^{-1/2} whitening the Laplacian on the
/// mean-zero subspace (W^T Delta W = I). Reusable across fields on one grid.
class LaplacianCongruence {
 public:
  explicit LaplacianCongruence(const SparseOperator& laplacian);
  const Grid& grid() const { return grid_; }
  const Eigen::MatrixXd& whitening() const { return W_; }

 private:
  Grid grid_;
  Eigen::MatrixXd W_;
};

GardingResult garding_constant(const SparseOperator& H, const SparseOperator& laplacian,
                               const GardingOptions& opts = {});

/// Dense path with a precomputed congruence.
GardingResult garding_constant(const SparseOperator& H, const LaplacianCongruence& congruence);

/// Iterative path (LOBPCG on H v = lambda Delta v over mean-zero functions,
/// preconditioned by an inner CG solve with the Laplacian). Throws SolverError
/// when max_iterations is exhausted.
GardingResult garding_constant_iterative(const SparseOperator& H, const SparseOperator& laplacian,
                                         const GardingOptions& opts = {});

}  // namespace ellikernel
