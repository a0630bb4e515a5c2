#include "ellikernel/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ellikernel {

Grid::Grid(int d, int n, double L) : d_(d), n_(n), L_(L) {
  if (d != 1 && d != 2) {
    throw std::invalid_argument("unsupported dimension d=" + std::to_string(d) + " (need 1 or 2)");
  }
  if (n < 4) {
    throw std::invalid_argument("n >= 4 required (got " + std::to_string(n) + ")");
  }
  if (!(L > 0.0) || !std::isfinite(L)) {
    throw std::invalid_argument("L > 0 required");
  }
  dx_ = L / n;
  cell_vol_ = d == 1 ? dx_ : dx_ * dx_;
  size_ = d == 1 ? static_cast<std::size_t>(n) : static_cast<std::size_t>(n) * n;
}

std::array<int, 2> Grid::coords(std::size_t idx) const {
  const auto n = static_cast<std::size_t>(n_);
  if (d_ == 1) return {static_cast<int>(idx), 0};
  return {static_cast<int>(idx % n), static_cast<int>(idx / n)};
}

std::array<double, 2> Grid::center(std::size_t idx) const {
  const auto c = coords(idx);
  std::array<double, 2> x{(c[0] + 0.5) * dx_, 0.0};
  if (d_ == 2) x[1] = (c[1] + 0.5) * dx_;
  return x;
}

std::size_t Grid::index(int i, int j) const {
  const int ii = ((i % n_) + n_) % n_;
  if (d_ == 1) return static_cast<std::size_t>(ii);
  const int jj = ((j % n_) + n_) % n_;
  return static_cast<std::size_t>(ii) + static_cast<std::size_t>(n_) * static_cast<std::size_t>(jj);
}

std::size_t Grid::shift(std::size_t idx, int axis, int step) const {
  auto c = coords(idx);
  c[axis] += step;
  return index(c[0], c[1]);
}

int Grid::wrapped_offset(int from, int to) const {
  int k = ((to - from) % n_ + n_) % n_;
  if (k > n_ / 2) k -= n_;
  return k;
}

long long Grid::dist2_cells(std::size_t a, std::size_t b) const {
  const auto ca = coords(a);
  const auto cb = coords(b);
  long long acc = 0;
  for (int ax = 0; ax < d_; ++ax) {
    const long long k = wrapped_offset(ca[ax], cb[ax]);
    acc += k * k;
  }
  return acc;
}

Grid build_grid(int d, int n, double L) { return Grid(d, n, L); }

double torus_dist(const Grid& grid, std::span<const double> x, std::span<const double> y) {
  const auto d = static_cast<std::size_t>(grid.dim());
  if (x.size() < d || y.size() < d) throw std::invalid_argument("torus_dist: point has fewer than d coordinates");
  const double L = grid.length();
  double acc = 0.0;
  for (std::size_t ax = 0; ax < d; ++ax) {
    double diff = std::fmod(std::abs(x[ax] - y[ax]), L);
    diff = std::min(diff, L - diff);
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

double torus_dist(const Grid& grid, std::size_t a, std::size_t b) {
  return std::sqrt(static_cast<double>(grid.dist2_cells(a, b))) * grid.dx();
}

}  // namespace ellikernel
