#pragma once

#include <Eigen/Dense>

namespace ellikernel::linalg {

struct SymEig {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns
};

/// Full eigendecomposition of a dense symmetric matrix (only the lower triangle is read).
SymEig sym_eig(Eigen::MatrixXd a);

/// Smallest eigenpair of a dense symmetric matrix.
struct LowestPair {
  double value;
  Eigen::VectorXd vector;
};
LowestPair sym_eig_lowest(Eigen::MatrixXd a);

}  // namespace ellikernel::linalg
