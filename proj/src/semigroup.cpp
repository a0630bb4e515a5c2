#include "ellikernel/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ellikernel/dense_eigen.hpp"
#include "ellikernel/krylov.hpp"

namespace ellikernel {

SpectralPropagator::SpectralPropagator(const SparseOperator& op) : grid_(op.grid()) {
  auto eig = linalg::sym_eig(op.dense());
  lambda_ = eig.values.cwiseMax(0.0);
  V_ = std::move(eig.vectors);
}

GridFunction SpectralPropagator::apply(double t, const GridFunction& v) const {
  if (t < 0.0) throw std::invalid_argument("semigroup: t must be >= 0");
  if (t == 0.0) return v;
  const Eigen::VectorXd coeff = V_.transpose() * v;
  return V_ * (-t * lambda_.array()).exp().matrix().cwiseProduct(coeff);
}

Eigen::MatrixXd SpectralPropagator::semigroup(double t) const {
  if (t < 0.0) throw std::invalid_argument("semigroup: t must be >= 0");
  const Eigen::VectorXd decay = (-t * lambda_.array()).exp();
  return V_ * decay.asDiagonal() * V_.transpose();
}

GridFunction semigroup_apply(const SparseOperator& op, double t, const GridFunction& v, const SemigroupOptions& opts) {
  if (t < 0.0) throw std::invalid_argument("semigroup_apply: t must be >= 0");
  if (static_cast<std::size_t>(v.size()) != op.size()) throw std::invalid_argument("semigroup_apply: size mismatch");
  if (t == 0.0) return v;
  if (op.size() <= opts.dense_threshold) return SpectralPropagator(op).apply(t, v);
  return linalg::krylov_expm_apply(op.matrix(), t, v, opts.tol, opts.krylov_dim);
}

KernelSlice make_kernel_slice(const Grid& grid, double t, Eigen::MatrixXd semigroup) {
  KernelSlice s;
  s.t = t;
  const double cv = grid.cell_vol();
  s.K = std::move(semigroup) / cv;
  const double kmax = s.K.cwiseAbs().maxCoeff();
  const auto N = s.K.rows();
  double sym = 0.0;
  for (Eigen::Index j = 0; j < N; ++j) {
    for (Eigen::Index i = j + 1; i < N; ++i) sym = std::max(sym, std::abs(s.K(i, j) - s.K(j, i)));
  }
  s.symmetry_defect = kmax > 0.0 ? sym / kmax : 0.0;
  s.min_entry = kmax > 0.0 ? s.K.minCoeff() / kmax : 0.0;
  const Eigen::VectorXd mass = s.K.rowwise().sum() * cv;
  s.mass_defect = (mass.array() - 1.0).abs().maxCoeff();
  return s;
}

KernelSlice kernel_matrix(const SpectralPropagator& prop, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel_matrix: t must be > 0");
  return make_kernel_slice(prop.grid(), t, prop.semigroup(t));
}

KernelSlice kernel_matrix(const SparseOperator& op, double t, const SemigroupOptions& opts) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel_matrix: t must be > 0");
  if (op.size() <= opts.dense_threshold) return kernel_matrix(SpectralPropagator(op), t);
  const auto N = static_cast<Eigen::Index>(op.size());
  Eigen::MatrixXd S(N, N);
#pragma omp parallel for schedule(dynamic)
  for (Eigen::Index y = 0; y < N; ++y) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    e[y] = 1.0;
    S.col(y) = linalg::krylov_expm_apply(op.matrix(), t, e, opts.tol, opts.krylov_dim);
  }
  return make_kernel_slice(op.grid(), t, std::move(S));
}

std::vector<double> kernel_time_grid(const Grid& grid, double t_max, int count, double t_min) {
  if (t_min <= 0.0) t_min = std::max(4.0 * grid.dx() * grid.dx(), 1e-3);
  if (!(t_max > 0.0) || count < 1 || t_min > t_max) throw std::invalid_argument("kernel_time_grid: invalid range");
  std::vector<double> ts(static_cast<std::size_t>(count));
  if (count == 1) {
    ts[0] = t_max;
    return ts;
  }
  const double lmin = std::log(t_min);
  const double lmax = std::log(t_max);
  for (int k = 0; k < count; ++k) ts[static_cast<std::size_t>(k)] = std::exp(lmin + (lmax - lmin) * k / (count - 1));
  ts.front() = t_min;
  ts.back() = t_max;
  return ts;
}

}  // namespace ellikernel
