#include "ellikernel/coefficient_field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace ellikernel {

std::pair<double, double> eig_sym2(const SymMat2& m) {
  if (m.xy == 0.0) return {std::min(m.xx, m.yy), std::max(m.xx, m.yy)};
  const double mean = 0.5 * (m.xx + m.yy);
  const double rad = std::hypot(0.5 * (m.xx - m.yy), m.xy);
  const double hi = mean + rad;
  // det/hi avoids cancellation in mean - rad for nearly singular matrices.
  const double det = m.xx * m.yy - m.xy * m.xy;
  const double lo = hi > 0.0 ? det / hi : mean - rad;
  return {lo, hi};
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

void require_nonneg(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be finite and >= 0 (negative eigenvalue)");
  }
}

std::vector<SymMat2> scalar_mats(const std::vector<double>& c, int d) {
  std::vector<SymMat2> mats(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) mats[k] = SymMat2{c[k], d == 2 ? c[k] : 0.0, 0.0};
  return mats;
}

std::vector<double> lognormal_values(const Grid& g, const family::Lognormal& p, std::uint64_t seed) {
  require_nonneg(p.sigma, "lognormal sigma");
  if (!(p.correlation_len > 0.0)) throw std::invalid_argument("lognormal correlation_len must be > 0");
  const int n = g.cells_per_axis();
  const int width = std::clamp(static_cast<int>(std::lround(p.correlation_len / g.dx())), 1, n);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> white(g.size());
  for (auto& w : white) w = normal(rng);

  // Separable periodic box filter of `width` cells along each axis.
  const int lo = -(width - 1) / 2;
  std::vector<double> smooth = white;
  for (int ax = 0; ax < g.dim(); ++ax) {
    std::vector<double> out(g.size(), 0.0);
    for (std::size_t c = 0; c < g.size(); ++c) {
      double acc = 0.0;
      for (int k = 0; k < width; ++k) acc += smooth[g.shift(c, ax, lo + k)];
      out[c] = acc;
    }
    smooth = std::move(out);
  }
  const double norm = std::sqrt(std::pow(static_cast<double>(width), g.dim()));
  std::vector<double> c(g.size());
  for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::exp(p.sigma * smooth[k] / norm);
  return c;
}

}  // namespace

std::string family_name(const FieldFamily& fam) {
  return std::visit(overloaded{
                        [](const family::Constant&) { return std::string("constant"); },
                        [](const family::ScalarTable&) { return std::string("scalar_table"); },
                        [](const family::Checkerboard&) { return std::string("checkerboard"); },
                        [](const family::Lognormal&) { return std::string("lognormal"); },
                        [](const family::DegenerateSine&) { return std::string("degenerate_sine"); },
                        [](const family::DegeneratePlateau&) { return std::string("degenerate_plateau"); },
                        [](const family::Anisotropic&) { return std::string("anisotropic"); },
                    },
                    fam);
}

CoefficientField::CoefficientField(Grid grid, std::vector<SymMat2> mats, std::string family_tag)
    : grid_(grid), mats_(std::move(mats)), tag_(std::move(family_tag)) {
  if (mats_.size() != grid_.size()) throw std::invalid_argument("coefficient field size does not match grid");
  for (auto& m : mats_) {
    if (grid_.dim() == 1) {
      m.yy = 0.0;
      m.xy = 0.0;
      require_nonneg(m.xx, "coefficient");
      norm_ = std::max(norm_, m.xx);
      continue;
    }
    if (!std::isfinite(m.xx) || !std::isfinite(m.yy) || !std::isfinite(m.xy)) {
      throw std::invalid_argument("coefficient matrix has non-finite entries");
    }
    const auto [lo, hi] = eig_sym2(m);
    if (lo < -1e-12 * std::max(1.0, std::abs(hi))) {
      throw std::invalid_argument("coefficient matrix has a negative eigenvalue");
    }
    if (m.xy != 0.0 || m.xx != m.yy) scalar_ = false;
    norm_ = std::max(norm_, hi);
  }
}

CoefficientField make_field(const Grid& g, const FieldFamily& fam, std::uint64_t seed) {
  const int d = g.dim();
  const int n = g.cells_per_axis();
  const double L = g.length();
  std::vector<double> c(g.size());

  return std::visit(
      overloaded{
          [&](const family::Constant& p) {
            require_nonneg(p.c0, "constant c0");
            std::fill(c.begin(), c.end(), p.c0);
            return CoefficientField(g, scalar_mats(c, d), "constant(" + fmt_num(p.c0) + ")");
          },
          [&](const family::ScalarTable& p) {
            if (p.values.size() != g.size()) {
              throw std::invalid_argument("scalar_table needs " + std::to_string(g.size()) + " values, got " +
                                          std::to_string(p.values.size()));
            }
            for (double v : p.values) require_nonneg(v, "scalar_table value");
            return CoefficientField(g, scalar_mats(p.values, d), "scalar_table");
          },
          [&](const family::Checkerboard& p) {
            require_nonneg(p.c_lo, "checkerboard c_lo");
            require_nonneg(p.c_hi, "checkerboard c_hi");
            if (p.block < 0) throw std::invalid_argument("checkerboard block must be >= 0");
            const int block = p.block == 0 ? std::max(1, n / 8) : p.block;
            for (std::size_t k = 0; k < g.size(); ++k) {
              const auto ij = g.coords(k);
              const int parity = (ij[0] / block + (d == 2 ? ij[1] / block : 0)) % 2;
              c[k] = parity == 0 ? p.c_lo : p.c_hi;
            }
            return CoefficientField(g, scalar_mats(c, d),
                                    "checkerboard(" + fmt_num(p.c_lo) + "," + fmt_num(p.c_hi) + ")");
          },
          [&](const family::Lognormal& p) {
            return CoefficientField(g, scalar_mats(lognormal_values(g, p, seed), d),
                                    "lognormal(" + fmt_num(p.sigma) + "," + fmt_num(p.correlation_len) + ")");
          },
          [&](const family::DegenerateSine& p) {
            if (!(p.power > 0.0)) throw std::invalid_argument("degenerate_sine power must be > 0");
            for (std::size_t k = 0; k < g.size(); ++k) {
              const double x = g.center(k)[0];
              c[k] = std::pow(std::abs(std::sin(2.0 * std::numbers::pi * x / L)), p.power);
            }
            return CoefficientField(g, scalar_mats(c, d), "degenerate_sine(" + fmt_num(p.power) + ")");
          },
          [&](const family::DegeneratePlateau& p) {
            require_nonneg(p.c_out, "degenerate_plateau c_out");
            if (!(p.zero_from < p.zero_to)) throw std::invalid_argument("degenerate_plateau needs zero_from < zero_to");
            for (std::size_t k = 0; k < g.size(); ++k) {
              const double x = g.center(k)[0];
              c[k] = (x >= p.zero_from && x < p.zero_to) ? 0.0 : p.c_out;
            }
            return CoefficientField(g, scalar_mats(c, d), "degenerate_plateau(" + fmt_num(p.c_out) + ")");
          },
          [&](const family::Anisotropic& p) {
            if (d != 2) throw std::invalid_argument("anisotropic family requires d = 2");
            require_nonneg(p.c_xx, "anisotropic c_xx");
            require_nonneg(p.c_yy, "anisotropic c_yy");
            if (p.c_xx * p.c_yy - p.c_xy * p.c_xy < 0.0) {
              throw std::invalid_argument("anisotropic requires c_xx*c_yy - c_xy^2 >= 0");
            }
            std::vector<SymMat2> mats(g.size(), SymMat2{p.c_xx, p.c_yy, p.c_xy});
            return CoefficientField(g, std::move(mats),
                                    "anisotropic(" + fmt_num(p.c_xx) + "," + fmt_num(p.c_yy) + "," +
                                        fmt_num(p.c_xy) + ")");
          },
      },
      fam);
}

EigRange field_eig_range(const CoefficientField& field) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  const bool one_d = field.grid().dim() == 1;
  for (const auto& m : field.mats()) {
    if (one_d) {
      lo = std::min(lo, m.xx);
      hi = std::max(hi, m.xx);
    } else {
      const auto [l, h] = eig_sym2(m);
      lo = std::min(lo, l);
      hi = std::max(hi, h);
    }
  }
  return {lo, hi};
}

}  // namespace ellikernel
