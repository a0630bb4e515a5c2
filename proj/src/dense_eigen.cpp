#include "ellikernel/dense_eigen.hpp"

#include <Eigen/Eigenvalues>

#include <stdexcept>

#include "ellikernel/errors.hpp"

namespace ellikernel::linalg {

SymEig sym_eig(Eigen::MatrixXd a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("sym_eig: matrix is not square");
  SymEig out;
  if (a.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw SolverError("symmetric eigensolver did not converge");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

LowestPair sym_eig_lowest(Eigen::MatrixXd a) {
  if (a.rows() != a.cols() || a.rows() == 0) throw std::invalid_argument("sym_eig_lowest: need a non-empty square matrix");
  auto eig = sym_eig(std::move(a));
  return {eig.values[0], eig.vectors.col(0)};
}

}  // namespace ellikernel::linalg
