#include "ellikernel/discrete_operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <stdexcept>

namespace ellikernel {

std::vector<SparseMat> gradient_matrix(const Grid& grid) {
  const auto N = static_cast<Eigen::Index>(grid.size());
  const double inv_dx = 1.0 / grid.dx();
  std::vector<SparseMat> out;
  for (int ax = 0; ax < grid.dim(); ++ax) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(2 * grid.size());
    for (std::size_t c = 0; c < grid.size(); ++c) {
      const auto row = static_cast<Eigen::Index>(c);
      trip.emplace_back(row, row, -inv_dx);
      trip.emplace_back(row, static_cast<Eigen::Index>(grid.shift(c, ax, 1)), inv_dx);
    }
    SparseMat G(N, N);
    G.setFromTriplets(trip.begin(), trip.end());
    out.push_back(std::move(G));
  }
  return out;
}

namespace {

double axis_coeff(const SymMat2& m, int axis) { return axis == 0 ? m.xx : m.yy; }

}  // namespace

SparseOperator assemble_H(const CoefficientField& field) {
  const Grid& g = field.grid();
  const auto N = static_cast<Eigen::Index>(g.size());
  const double inv_dx2 = 1.0 / (g.dx() * g.dx());
  const int d = g.dim();

  // face_w[ax][c]: weight of the face between c and c + e_ax.
  std::array<std::vector<double>, 2> face_w;
  for (int ax = 0; ax < d; ++ax) {
    face_w[ax].resize(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double cf = (axis_coeff(field.at(c), ax) + axis_coeff(field.at(g.shift(c, ax, 1)), ax)) * 0.5;
      face_w[ax][c] = cf * inv_dx2;
    }
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.size() * (1 + 2 * d + (d == 2 ? 8 : 0)));
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto row = static_cast<Eigen::Index>(c);
    // Pairwise per-axis sums keep H(c0) == c0 * Laplacian bit-exact.
    double diag = 0.0;
    for (int ax = 0; ax < d; ++ax) {
      const std::size_t left = g.shift(c, ax, -1);
      const std::size_t right = g.shift(c, ax, 1);
      diag += face_w[ax][left] + face_w[ax][c];
      if (face_w[ax][c] != 0.0) trip.emplace_back(row, static_cast<Eigen::Index>(right), -face_w[ax][c]);
      if (face_w[ax][left] != 0.0) trip.emplace_back(row, static_cast<Eigen::Index>(left), -face_w[ax][left]);
    }
    trip.emplace_back(row, row, diag);
  }

  if (d == 2) {
    // 2 c_xy gx gy per cell with gx = (phi_E - phi_W)/(2dx), gy = (phi_N - phi_S)/(2dx).
    for (std::size_t c = 0; c < g.size(); ++c) {
      const double cxy = field.at(c).xy;
      if (cxy == 0.0) continue;
      const double half_k = 0.25 * cxy * inv_dx2;
      const auto E = static_cast<Eigen::Index>(g.shift(c, 0, 1));
      const auto W = static_cast<Eigen::Index>(g.shift(c, 0, -1));
      const auto Nn = static_cast<Eigen::Index>(g.shift(c, 1, 1));
      const auto S = static_cast<Eigen::Index>(g.shift(c, 1, -1));
      const std::array<std::tuple<Eigen::Index, Eigen::Index, double>, 4> pairs{
          {{E, Nn, half_k}, {E, S, -half_k}, {W, Nn, -half_k}, {W, S, half_k}}};
      for (const auto& [p, q, v] : pairs) {
        trip.emplace_back(p, q, v);
        trip.emplace_back(q, p, v);
      }
    }
  }

  SparseMat H(N, N);
  H.setFromTriplets(trip.begin(), trip.end());
  return SparseOperator(g, std::move(H), OperatorTag::H);
}

SparseOperator assemble_laplacian(const Grid& grid) {
  const auto unit = make_field(grid, family::Constant{1.0});
  const auto H = assemble_H(unit);
  return SparseOperator(grid, H.matrix(), OperatorTag::Delta);
}

FormValue form_h(const SparseOperator& op, const GridFunction& phi) {
  if (static_cast<std::size_t>(phi.size()) != op.size()) {
    throw std::invalid_argument("form_h: grid function length " + std::to_string(phi.size()) +
                                " does not match operator size " + std::to_string(op.size()));
  }
  const double cv = op.grid().cell_vol();
  const double raw = phi.dot(op.apply(phi)) * cv;
  if (raw >= 0.0) return {raw};
  const double scale = op.norm_bound() * phi.squaredNorm() * cv;
  if (raw < -1e-10 * scale) throw std::domain_error("form_h: operator is not positive-semidefinite");
  return {0.0};
}

SandwichReport sandwich_check(const SparseOperator& H, const SparseOperator& laplacian,
                              const CoefficientField& field, double eps, int trials, std::uint64_t seed) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("sandwich_check: eps must lie in (0,1]");
  if (!(H.grid() == laplacian.grid())) throw std::invalid_argument("sandwich_check: grid mismatch");
  const SparseOperator H_eps(H.grid(), SparseMat(H.matrix() + eps * laplacian.matrix()), OperatorTag::H_eps, eps);
  const double normC = field.norm();
  const double cv = H.grid().cell_vol();

  SandwichReport rep;
  rep.eps = eps;
  rep.trials = trials;
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  rep.worst_upper_margin = std::numeric_limits<double>::infinity();
  rep.min_ratio = std::numeric_limits<double>::infinity();
  rep.max_ratio = -std::numeric_limits<double>::infinity();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GridFunction phi(static_cast<Eigen::Index>(H.size()));
  for (int k = 0; k < trials; ++k) {
    for (Eigen::Index i = 0; i < phi.size(); ++i) phi[i] = normal(rng);
    const double raw_l = phi.dot(laplacian.apply(phi)) * cv;
    const double raw_he = phi.dot(H_eps.apply(phi)) * cv;
    const double scale = (1.0 + normC) * laplacian.norm_bound() * phi.squaredNorm() * cv;
    const double lower = (raw_he - eps * raw_l) / scale;
    const double upper = ((1.0 + normC) * raw_l - raw_he) / scale;
    rep.worst_lower_margin = std::min(rep.worst_lower_margin, lower);
    rep.worst_upper_margin = std::min(rep.worst_upper_margin, upper);
    if (lower < -1e-10 || upper < -1e-10) ++rep.violations;
    if (raw_l > 0.0) {
      rep.min_ratio = std::min(rep.min_ratio, raw_he / raw_l);
      rep.max_ratio = std::max(rep.max_ratio, raw_he / raw_l);
    }
  }
  return rep;
}

std::vector<double> default_wave_numbers(const Grid& grid) {
  std::vector<double> ks;
  const double base = 2.0 * std::numbers::pi / grid.length();
  for (double m : {4.0, 8.0, 16.0, 32.0}) {
    const double k = m * base;
    if (k * grid.dx() <= std::numbers::pi / 4.0 * (1.0 + 1e-12)) ks.push_back(k);
  }
  return ks;
}

ModulatedWaveResult modulated_wave_limit(const CoefficientField& field, const GridFunction& phi,
                                         std::array<double, 2> xi, const std::vector<double>& wave_numbers) {
  const Grid& g = field.grid();
  if (static_cast<std::size_t>(phi.size()) != g.size()) throw std::invalid_argument("modulated_wave_limit: phi size mismatch");
  if (g.dim() == 1) xi[1] = 0.0;
  const double xi_norm = std::hypot(xi[0], xi[1]);
  if (std::abs(xi_norm - 1.0) > 1e-12) throw std::invalid_argument("modulated_wave_limit: xi must be a unit vector");
  for (std::size_t i = 0; i < wave_numbers.size(); ++i) {
    if (!(wave_numbers[i] > 0.0)) throw std::invalid_argument("modulated_wave_limit: wave numbers must be positive");
    if (i > 0 && !(wave_numbers[i] > wave_numbers[i - 1])) {
      throw std::invalid_argument("modulated_wave_limit: wave numbers must increase");
    }
    if (wave_numbers[i] * g.dx() > std::numbers::pi / 4.0 * (1.0 + 1e-12)) {
      throw std::invalid_argument("modulated_wave_limit: k*dx exceeds pi/4 resolution limit");
    }
  }

  const auto H = assemble_H(field);
  ModulatedWaveResult res;
  res.wave_numbers = wave_numbers;
  const double cv = g.cell_vol();
  for (std::size_t c = 0; c < g.size(); ++c) {
    const auto& m = field.at(c);
    const double quad = m.xx * xi[0] * xi[0] + m.yy * xi[1] * xi[1] + 2.0 * m.xy * xi[0] * xi[1];
    res.reference += phi[static_cast<Eigen::Index>(c)] * phi[static_cast<Eigen::Index>(c)] * quad * cv;
  }

  GridFunction re(phi.size());
  GridFunction im(phi.size());
  for (double k : wave_numbers) {
    for (std::size_t c = 0; c < g.size(); ++c) {
      const auto x = g.center(c);
      const double phase = k * (x[0] * xi[0] + x[1] * xi[1]);
      const auto i = static_cast<Eigen::Index>(c);
      re[i] = std::cos(phase) * phi[i];
      im[i] = std::sin(phase) * phi[i];
    }
    const double h = form_h(H, re).value + form_h(H, im).value;
    res.scaled_forms.push_back(h / (k * k));
  }
  return res;
}

}  // namespace ellikernel
