#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>

#include "ellikernel/grid.hpp"

namespace ellikernel {

using GridFunction = Eigen::VectorXd;
using SparseMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class OperatorTag { H, Delta, H_eps, Other };

std::string to_string(OperatorTag tag);

/// Symmetric sparse operator acting on grid functions (H, the Laplacian or H + eps*Laplacian).
class SparseOperator {
 public:
  SparseOperator(Grid grid, SparseMat mat, OperatorTag tag, double eps = 0.0);

  const Grid& grid() const { return grid_; }
  const SparseMat& matrix() const { return mat_; }
  OperatorTag tag() const { return tag_; }
  /// Viscosity parameter for H_eps operators, 0 otherwise.
  double eps() const { return eps_; }
  std::size_t size() const { return static_cast<std::size_t>(mat_.rows()); }

  GridFunction apply(const GridFunction& v) const { return mat_ * v; }
  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(mat_); }

  /// Max absolute row sum; bounds the spectral norm of a symmetric matrix.
  double norm_bound() const { return norm_; }
  /// max |A_ij - A_ji|.
  double symmetry_defect() const;
  /// max_i |sum_j A_ij|.
  double max_row_sum() const;

 private:
  Grid grid_;
  SparseMat mat_;
  OperatorTag tag_;
  double eps_;
  double norm_ = 0.0;
};

/// Value of a discrete quadratic form, in units of |phi|^2 / length^2.
struct FormValue {
  double value = 0.0;
};

}  // namespace ellikernel
