#pragma once

#include <Eigen/Dense>

#include "ellikernel/sparse_operator.hpp"

namespace ellikernel::linalg {

struct KrylovStats {
  int steps = 0;        // accepted time sub-steps (restarts + 1)
  int matvecs = 0;
  double error_estimate = 0.0;
};

/// exp(-t A) v for symmetric PSD A via Lanczos with full reorthogonalisation.
///
/// Each restart builds a basis of dimension `dim` from the current vector and
/// advances by the largest sub-step whose a-posteriori error estimate
/// beta * h_{m+1,m} * |e_m^T exp(-tau T) e_1| stays below tol * |v| * tau / t.
/// Throws SolverError if the step size collapses.
Eigen::VectorXd krylov_expm_apply(const SparseMat& A, double t, const Eigen::VectorXd& v, double tol = 1e-9,
                                  int dim = 64, KrylovStats* stats = nullptr);

}  // namespace ellikernel::linalg
