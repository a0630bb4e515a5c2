#pragma once

#include <stdexcept>

namespace ellikernel {

/// An iterative solver failed to reach its tolerance within the iteration budget.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ellikernel
