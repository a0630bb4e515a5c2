#pragma once

#include <vector>

#include "ellikernel/sparse_operator.hpp"

namespace ellikernel {

/// Strictly decreasing viscosity parameters in (0,1].
class EpsSchedule {
 public:
  /// Throws std::invalid_argument unless the values are strictly decreasing in (0,1].
  explicit EpsSchedule(std::vector<double> values);
  /// {2^0, 2^-1, ..., 2^-12}.
  static EpsSchedule standard();

  const std::vector<double>& values() const { return values_; }

 private:
  std::vector<double> values_;
};

/// H + eps * Laplacian, tagged H_eps. Rejects eps outside (0,1].
SparseOperator build_H_eps(const SparseOperator& H, const SparseOperator& laplacian, double eps);

/// Solves (op + I) u = psi by conjugate gradients to relative residual `tol`.
/// Throws SolverError after 10*N iterations without convergence.
GridFunction resolvent_apply(const SparseOperator& op, const GridFunction& psi, double tol = 1e-10,
                             int* iterations = nullptr);

struct ViscosityDiagnostics {
  std::vector<double> eps;
  std::vector<GridFunction> resolvents;  // (H_eps + I)^{-1} psi along the schedule
  std::vector<double> deltas;            // |u_j - u_{j+1}|_2
  GridFunction limit;                    // (H + I)^{-1} psi
  double psi_norm = 0.0;
  /// Some delta_j <= 1e-8 |psi|.
  bool converged = false;
  /// |u_last - limit|_2 and its a-priori bound eps_last * |Laplacian| * |psi|.
  double limit_gap = 0.0;
  double limit_gap_bound = 0.0;
  /// Every delta_j respects (eps_j - eps_{j+1}) |Laplacian| |psi| and the limit gap respects its bound.
  bool consistent = false;
  int solver_iterations = 0;
};

/// Resolvents of H_eps along the schedule, their successive differences, and the
/// eps -> 0 limit, which on a finite grid is the resolvent of H itself.
ViscosityDiagnostics viscosity_limit(const SparseOperator& H, const SparseOperator& laplacian,
                                     const EpsSchedule& schedule, const GridFunction& psi, double tol = 1e-10);

/// max_{x,y} |K_t^{eps}(x;y) - K_t(x;y)| for each eps in the schedule (dense path).
std::vector<double> kernel_viscosity_drift(const SparseOperator& H, const SparseOperator& laplacian,
                                           const EpsSchedule& schedule, double t);

}  // namespace ellikernel
