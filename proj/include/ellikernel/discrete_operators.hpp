#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "ellikernel/coefficient_field.hpp"
#include "ellikernel/sparse_operator.hpp"

namespace ellikernel {

/// Per-axis forward differences with periodic wrap: (G_i phi)(x) = (phi(x + dx e_i) - phi(x)) / dx.
std::vector<SparseMat> gradient_matrix(const Grid& grid);

/// Discrete H = -div(C grad) as G^T M_C G.
///
/// Face coefficients are arithmetic means of the two adjacent cells. In 2d the
/// cross terms c_xy couple the cell-centred averages of the two x-faces and the
/// two y-faces around each cell, which keeps the cell-wise quadratic form PSD
/// whenever C(x) is. For a constant scalar field c0 the result equals
/// c0 * assemble_laplacian(grid) entrywise.
SparseOperator assemble_H(const CoefficientField& field);

/// Periodic Laplacian (the operator of the constant unit field), tagged Delta.
SparseOperator assemble_laplacian(const Grid& grid);

/// phi^T op phi * cell_vol. Roundoff-level negative values are clamped to 0;
/// a clearly negative value throws std::domain_error.
FormValue form_h(const SparseOperator& op, const GridFunction& phi);

struct SandwichReport {
  double eps = 0.0;
  int trials = 0;
  /// min over trials of (h_eps - eps*l) / scale; must be >= -1e-10.
  double worst_lower_margin = 0.0;
  /// min over trials of ((1+|C|) l - h_eps) / scale; must be >= -1e-10.
  double worst_upper_margin = 0.0;
  /// Range of h_eps / l over trials with l > 0.
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  int violations = 0;
  bool ok() const { return violations == 0; }
};

/// Checks eps*l(phi) <= h_eps(phi) <= (1 + |C|) l(phi) on seeded random phi.
/// scale = (1 + |C|) * |Laplacian| * |phi|^2 * cell_vol. Violations are reported, not thrown.
SandwichReport sandwich_check(const SparseOperator& H, const SparseOperator& laplacian,
                              const CoefficientField& field, double eps, int trials, std::uint64_t seed);

struct ModulatedWaveResult {
  std::vector<double> wave_numbers;
  /// k^-2 h(phi_k) for each wave number.
  std::vector<double> scaled_forms;
  /// sum over cells of |phi|^2 (xi, C xi) * cell_vol.
  double reference = 0.0;
};

/// Default k schedule {4, 8, 16, 32} * 2 pi / L, truncated at k dx <= pi/4.
std::vector<double> default_wave_numbers(const Grid& grid);

/// Evaluates k^-2 h(e^{i k x.xi} phi) for increasing k. The complex form is the
/// sum of the real forms of the real and imaginary parts. Throws
/// std::invalid_argument when some k violates k*dx <= pi/4 or xi is not a unit vector.
ModulatedWaveResult modulated_wave_limit(const CoefficientField& field, const GridFunction& phi,
                                         std::array<double, 2> xi, const std::vector<double>& wave_numbers);

}  // namespace ellikernel
