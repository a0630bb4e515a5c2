#include "ellikernel/viscosity.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ellikernel/errors.hpp"
#include "ellikernel/semigroup.hpp"

namespace ellikernel {

EpsSchedule::EpsSchedule(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw std::invalid_argument("eps schedule is empty");
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0 && values_[i] <= 1.0)) throw std::invalid_argument("eps schedule values must lie in (0,1]");
    if (i > 0 && !(values_[i] < values_[i - 1])) throw std::invalid_argument("eps schedule must be strictly decreasing");
  }
}

EpsSchedule EpsSchedule::standard() {
  std::vector<double> v;
  for (int k = 0; k <= 12; ++k) v.push_back(std::ldexp(1.0, -k));
  return EpsSchedule(std::move(v));
}

SparseOperator build_H_eps(const SparseOperator& H, const SparseOperator& laplacian, double eps) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("build_H_eps: eps must lie in (0,1]");
  if (!(H.grid() == laplacian.grid())) throw std::invalid_argument("build_H_eps: grid mismatch");
  return SparseOperator(H.grid(), SparseMat(H.matrix() + eps * laplacian.matrix()), OperatorTag::H_eps, eps);
}

GridFunction resolvent_apply(const SparseOperator& op, const GridFunction& psi, double tol, int* iterations) {
  if (static_cast<std::size_t>(psi.size()) != op.size()) throw std::invalid_argument("resolvent_apply: size mismatch");
  const auto N = static_cast<Eigen::Index>(op.size());
  SparseMat shifted = op.matrix();
  for (Eigen::Index i = 0; i < N; ++i) shifted.coeffRef(i, i) += 1.0;
  Eigen::ConjugateGradient<SparseMat, Eigen::Lower | Eigen::Upper> cg;
  cg.setTolerance(tol);
  cg.setMaxIterations(static_cast<Eigen::Index>(10) * N);
  cg.compute(shifted);
  GridFunction u = cg.solve(psi);
  if (iterations) *iterations = static_cast<int>(cg.iterations());
  if (cg.info() != Eigen::Success) {
    throw SolverError("resolvent_apply: CG did not converge in " + std::to_string(10 * N) +
                      " iterations (relative residual " + std::to_string(cg.error()) + ")");
  }
  return u;
}

ViscosityDiagnostics viscosity_limit(const SparseOperator& H, const SparseOperator& laplacian,
                                     const EpsSchedule& schedule, const GridFunction& psi, double tol) {
  ViscosityDiagnostics diag;
  diag.eps = schedule.values();
  diag.psi_norm = psi.norm();
  int its = 0;
  for (double eps : diag.eps) {
    diag.resolvents.push_back(resolvent_apply(build_H_eps(H, laplacian, eps), psi, tol, &its));
    diag.solver_iterations += its;
  }
  diag.limit = resolvent_apply(H, psi, tol, &its);
  diag.solver_iterations += its;

  // Resolvent identity: |R(H + e1 D) - R(H + e2 D)| <= |e1 - e2| |D| (resolvents are contractions).
  const double dnorm = laplacian.norm_bound();
  const double slack = 4.0 * tol * diag.psi_norm;
  bool ok = true;
  for (std::size_t j = 0; j + 1 < diag.resolvents.size(); ++j) {
    const double delta = (diag.resolvents[j] - diag.resolvents[j + 1]).norm();
    diag.deltas.push_back(delta);
    if (delta <= 1e-8 * diag.psi_norm) diag.converged = true;
    if (delta > (diag.eps[j] - diag.eps[j + 1]) * dnorm * diag.psi_norm + slack) ok = false;
  }
  diag.limit_gap = (diag.resolvents.back() - diag.limit).norm();
  diag.limit_gap_bound = diag.eps.back() * dnorm * diag.psi_norm + slack;
  if (diag.limit_gap > diag.limit_gap_bound) ok = false;
  diag.consistent = ok;
  return diag;
}

std::vector<double> kernel_viscosity_drift(const SparseOperator& H, const SparseOperator& laplacian,
                                           const EpsSchedule& schedule, double t) {
  const auto base = kernel_matrix(SpectralPropagator(H), t);
  std::vector<double> drift;
  for (double eps : schedule.values()) {
    const auto k = kernel_matrix(SpectralPropagator(build_H_eps(H, laplacian, eps)), t);
    drift.push_back((k.K - base.K).cwiseAbs().maxCoeff());
  }
  return drift;
}

}  // namespace ellikernel
