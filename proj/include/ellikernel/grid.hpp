#pragma once

#include <array>
#include <cstddef>
#include <span>

namespace ellikernel {

/// Periodic lattice on the flat torus [0,L)^d with n cells per axis.
///
/// Cells are numbered lexicographically with the first axis fastest:
/// index = i + n*j. Cell centers sit at ((i+1/2)dx, (j+1/2)dx).
class Grid {
 public:
  /// Throws std::invalid_argument unless d in {1,2}, n >= 4 and L > 0.
  Grid(int d, int n, double L);

  int dim() const { return d_; }
  int cells_per_axis() const { return n_; }
  double length() const { return L_; }
  double dx() const { return dx_; }
  double cell_vol() const { return cell_vol_; }
  /// Total number of cells, n^d.
  std::size_t size() const { return size_; }

  std::array<double, 2> center(std::size_t idx) const;
  std::array<int, 2> coords(std::size_t idx) const;
  std::size_t index(int i, int j = 0) const;
  /// Neighbour of idx shifted by `step` cells along `axis`, with wraparound.
  std::size_t shift(std::size_t idx, int axis, int step) const;

  /// Minimal signed cell offset along one axis, in [-n/2, n/2].
  int wrapped_offset(int from, int to) const;
  /// Squared torus distance between two cells in units of dx^2 (exact integer).
  long long dist2_cells(std::size_t a, std::size_t b) const;

  bool operator==(const Grid& other) const = default;

 private:
  int d_;
  int n_;
  double L_;
  double dx_;
  double cell_vol_;
  std::size_t size_;
};

Grid build_grid(int d, int n, double L);

/// Euclidean distance on the torus with per-axis wraparound
/// min(|xi - yi|, L - |xi - yi|). Points are given as d coordinates.
double torus_dist(const Grid& grid, std::span<const double> x, std::span<const double> y);

/// Torus distance between two cell centers.
double torus_dist(const Grid& grid, std::size_t a, std::size_t b);

}  // namespace ellikernel
