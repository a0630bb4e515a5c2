#include "ellikernel/sparse_operator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ellikernel {

std::string to_string(OperatorTag tag) {
  switch (tag) {
    case OperatorTag::H: return "H";
    case OperatorTag::Delta: return "Delta";
    case OperatorTag::H_eps: return "H_eps";
    case OperatorTag::Other: return "other";
  }
  return "other";
}

SparseOperator::SparseOperator(Grid grid, SparseMat mat, OperatorTag tag, double eps)
    : grid_(grid), mat_(std::move(mat)), tag_(tag), eps_(eps) {
  if (mat_.rows() != mat_.cols() || static_cast<std::size_t>(mat_.rows()) != grid_.size()) {
    throw std::invalid_argument("operator dimensions do not match grid");
  }
  mat_.makeCompressed();
  for (Eigen::Index r = 0; r < mat_.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMat::InnerIterator it(mat_, r); it; ++it) row += std::abs(it.value());
    norm_ = std::max(norm_, row);
  }
}

double SparseOperator::symmetry_defect() const {
  const SparseMat diff = SparseMat(mat_.transpose()) - mat_;
  double worst = 0.0;
  for (Eigen::Index r = 0; r < diff.outerSize(); ++r) {
    for (SparseMat::InnerIterator it(diff, r); it; ++it) worst = std::max(worst, std::abs(it.value()));
  }
  return worst;
}

double SparseOperator::max_row_sum() const {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < mat_.outerSize(); ++r) {
    double row = 0.0;
    for (SparseMat::InnerIterator it(mat_, r); it; ++it) row += it.value();
    worst = std::max(worst, std::abs(row));
  }
  return worst;
}

}  // namespace ellikernel
