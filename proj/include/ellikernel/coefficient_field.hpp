#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ellikernel/grid.hpp"

namespace ellikernel {

/// Symmetric 2x2 matrix [[xx, xy], [xy, yy]]; in 1d only xx is used.
struct SymMat2 {
  double xx = 0.0;
  double yy = 0.0;
  double xy = 0.0;
};

/// Closed-form eigenvalues (lo, hi) of a symmetric 2x2 matrix.
std::pair<double, double> eig_sym2(const SymMat2& m);

namespace family {

struct Constant {
  double c0 = 1.0;
};

/// One scalar coefficient per cell, in grid index order.
struct ScalarTable {
  std::vector<double> values;
};

/// Alternating blocks of `block` cells per axis; block = 0 means n/8.
struct Checkerboard {
  double c_lo = 0.5;
  double c_hi = 2.0;
  int block = 0;
};

/// exp(sigma * g) with g a unit-variance periodic moving average of normal deviates.
struct Lognormal {
  double sigma = 0.5;
  double correlation_len = 0.5;
};

/// |sin(2 pi x / L)|^power along the first axis; vanishes at x = 0 and x = L/2.
struct DegenerateSine {
  double power = 2.0;
};

/// c = 0 for cell centers with first coordinate in [zero_from, zero_to), c_out elsewhere.
struct DegeneratePlateau {
  double c_out = 1.0;
  double zero_from = 0.0;
  double zero_to = 1.0;
};

/// Constant 2d matrix [[c_xx, c_xy], [c_xy, c_yy]].
struct Anisotropic {
  double c_xx = 2.0;
  double c_yy = 1.0;
  double c_xy = 0.5;
};

}  // namespace family

using FieldFamily = std::variant<family::Constant, family::ScalarTable, family::Checkerboard,
                                 family::Lognormal, family::DegenerateSine,
                                 family::DegeneratePlateau, family::Anisotropic>;

/// Canonical family name as used in scenario files ("constant", "checkerboard", ...).
std::string family_name(const FieldFamily& fam);

/// Piecewise-constant symmetric PSD coefficient matrices, one per cell.
class CoefficientField {
 public:
  CoefficientField(Grid grid, std::vector<SymMat2> mats, std::string family_tag);

  const Grid& grid() const { return grid_; }
  const std::vector<SymMat2>& mats() const { return mats_; }
  const SymMat2& at(std::size_t cell) const { return mats_[cell]; }
  const std::string& family_tag() const { return tag_; }
  /// True when every cell matrix is a multiple of the identity.
  bool is_scalar() const { return scalar_; }
  /// max over cells of the operator norm, i.e. max lambda_max for PSD matrices.
  double norm() const { return norm_; }

 private:
  Grid grid_;
  std::vector<SymMat2> mats_;
  std::string tag_;
  bool scalar_ = true;
  double norm_ = 0.0;
};

/// Builds a field of the given family. `seed` only affects the lognormal family.
/// Throws std::invalid_argument for parameters that would produce a negative
/// eigenvalue or do not fit the grid.
CoefficientField make_field(const Grid& grid, const FieldFamily& fam, std::uint64_t seed = 0);

struct EigRange {
  double mu_pointwise;
  double Lambda_pointwise;
};

/// Pointwise ellipticity range: (min over cells of lambda_min, max over cells of lambda_max).
EigRange field_eig_range(const CoefficientField& field);

}  // namespace ellikernel
