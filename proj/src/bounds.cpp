#include "ellikernel/bounds.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "ellikernel/discrete_operators.hpp"

namespace ellikernel {

BumpRho::BumpRho(double r) : r_(r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("bump_rho: r must be > 0");
}

double BumpRho::operator()(double u) const {
  const double half = 0.5 * r_;
  if (u <= half * half) return 1.0;
  if (u >= r_ * r_) return 0.0;
  const double s = (std::sqrt(u) - half) / half;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

BumpRho bump_rho(double r) { return BumpRho(r); }

// ---------------------------------------------------------------------------

namespace {

constexpr std::size_t kMaxViolations = 100;

double time_weight(double t, int d) { return d == 1 ? std::sqrt(t) : t; }

/// All cell offsets with squared length <= max_k2 (in dx units).
std::vector<std::array<int, 2>> offsets_within(const Grid& g, double max_k2) {
  std::vector<std::array<int, 2>> out;
  const int n = g.cells_per_axis();
  const int reach = std::min(n / 2, static_cast<int>(std::floor(std::sqrt(std::max(max_k2, 0.0)))) + 1);
  const int ylo = g.dim() == 2 ? -reach : 0;
  const int yhi = g.dim() == 2 ? reach : 0;
  for (int oy = ylo; oy <= yhi; ++oy) {
    for (int ox = -reach; ox <= reach; ++ox) {
      // Skip offsets that alias on small grids.
      if (ox <= -(n + 1) / 2 || ox > n / 2 || oy <= -(n + 1) / 2 || oy > n / 2) continue;
      const double k2 = static_cast<double>(ox * ox + oy * oy);
      if (k2 <= max_k2) out.push_back({ox, oy});
    }
  }
  return out;
}

std::size_t shifted(const Grid& g, std::size_t x, const std::array<int, 2>& o) {
  const auto c = g.coords(x);
  return g.index(c[0] + o[0], c[1] + o[1]);
}

}  // namespace

LowerBoundScanner::LowerBoundScanner(const Grid& grid, double r, double a_threshold, double t_max)
    : grid_(grid), r_(r), threshold_(a_threshold), t_max_(t_max), a_(std::numeric_limits<double>::infinity()) {
  if (!(r > 0.0)) throw std::invalid_argument("local_lower_bound: r must be > 0");
  if (r * std::sqrt(t_max) > grid.length() / 4.0 * (1.0 + 1e-12)) {
    throw std::invalid_argument("local_lower_bound: r*sqrt(t_max) exceeds L/4 (torus locality)");
  }
}

void LowerBoundScanner::add(const KernelSlice& slice) {
  const double t = slice.t;
  if (t > t_max_ * (1.0 + 1e-12)) throw std::invalid_argument("local_lower_bound: slice time exceeds t_max");
  const double dx = grid_.dx();
  const double max_k2 = r_ * r_ * t / (dx * dx) * (1.0 + 1e-12);
  const auto offs = offsets_within(grid_, max_k2);
  const double tw = time_weight(t, grid_.dim());
  auto heap_cmp = [](const LowerBoundViolation& l, const LowerBoundViolation& r) { return l.value < r.value; };
  for (std::size_t x = 0; x < grid_.size(); ++x) {
    for (const auto& o : offs) {
      const std::size_t y = shifted(grid_, x, o);
      const double v = tw * slice.K(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      ++probes_;
      if (x != y) ++offdiag_probes_;
      a_ = std::min(a_, v);
      if (v < threshold_) {
        if (worst_.size() < kMaxViolations) {
          worst_.push_back({t, x, y, v});
          std::push_heap(worst_.begin(), worst_.end(), heap_cmp);
        } else if (v < worst_.front().value) {
          std::pop_heap(worst_.begin(), worst_.end(), heap_cmp);
          worst_.back() = {t, x, y, v};
          std::push_heap(worst_.begin(), worst_.end(), heap_cmp);
        }
      }
    }
  }
}

LowerBoundResult LowerBoundScanner::result() const {
  if (offdiag_probes_ == 0) throw std::invalid_argument("radius below resolution");
  LowerBoundResult res;
  res.a = std::max(a_, 0.0);
  res.r = r_;
  res.threshold = threshold_;
  res.verdict = res.a >= threshold_;
  res.probes = probes_;
  res.violations = worst_;
  std::sort(res.violations.begin(), res.violations.end(), [](const auto& l, const auto& r) {
    if (l.value != r.value) return l.value < r.value;
    if (l.t != r.t) return l.t < r.t;
    if (l.x != r.x) return l.x < r.x;
    return l.y < r.y;
  });
  return res;
}

LowerBoundResult local_lower_bound(std::span<const KernelSlice> kernels, const Grid& grid, double r,
                                   double a_threshold) {
  double t_max = 0.0;
  for (const auto& k : kernels) t_max = std::max(t_max, k.t);
  LowerBoundScanner scan(grid, r, a_threshold, t_max);
  for (const auto& k : kernels) scan.add(k);
  return scan.result();
}

// ---------------------------------------------------------------------------

double AronsonFit::upper_env(double s) const { return a * std::exp(-b * s); }
double AronsonFit::lower_env(double s) const { return a_prime * std::exp(-b_prime * s); }

std::vector<double> aronson_b_grid(const AronsonOptions& opts) {
  std::vector<double> grid(static_cast<std::size_t>(opts.b_points));
  const double lo = std::log(opts.b_min);
  const double hi = std::log(opts.b_max);
  for (int k = 0; k < opts.b_points; ++k) {
    grid[static_cast<std::size_t>(k)] = std::exp(lo + (hi - lo) * k / (opts.b_points - 1));
  }
  return grid;
}

namespace {

AronsonFit fit_envelopes(std::span<const EnvelopePoint> upper, std::span<const EnvelopePoint> lower,
                         std::size_t admissible, const AronsonOptions& opts) {
  if (admissible < opts.min_points) throw std::invalid_argument("insufficient kernel data");
  const auto bs = aronson_b_grid(opts);
  AronsonFit fit;
  fit.s_cap = opts.s_cap;
  fit.b_grid_ratio = bs.size() > 1 ? bs[1] / bs[0] : 1.0;

  std::vector<EnvelopePoint> up;
  for (const auto& p : upper) {
    if (p.value > opts.positivity_floor) up.push_back(p);
  }
  std::vector<EnvelopePoint> lo;
  for (const auto& p : lower) {
    if (p.s > opts.s_cap) continue;
    if (p.value <= opts.positivity_floor) fit.lower_vanishes = true;
    lo.push_back(p);
  }
  fit.upper_points = up.size();
  fit.lower_points = lo.size();
  if (up.empty()) throw std::invalid_argument("insufficient kernel data");

  // Upper: log a(b) = max(w + b s) is nondecreasing in b.
  std::vector<double> log_a(bs.size(), -std::numeric_limits<double>::infinity());
  for (const auto& p : up) {
    const double w = std::log(p.value);
    for (std::size_t k = 0; k < bs.size(); ++k) log_a[k] = std::max(log_a[k], w + bs[k] * p.s);
  }
  const double best_a = *std::min_element(log_a.begin(), log_a.end());
  std::size_t kb = 0;
  for (std::size_t k = 0; k < bs.size(); ++k) {
    if (log_a[k] <= best_a + 1e-9) kb = k;
  }
  fit.b = bs[kb];
  fit.a = std::exp(log_a[kb]);
  for (;;) {
    const bool ok = std::all_of(up.begin(), up.end(), [&](const auto& p) { return p.value <= fit.upper_env(p.s); });
    if (ok) break;
    fit.a = std::nextafter(fit.a, std::numeric_limits<double>::infinity()) * (1.0 + 1e-15);
  }

  // Lower: log a'(b') = min(w + b' s) is nondecreasing in b'.
  if (fit.lower_vanishes || lo.empty()) {
    fit.a_prime = 0.0;
    fit.b_prime = bs.back();
  } else {
    std::vector<double> log_ap(bs.size(), std::numeric_limits<double>::infinity());
    for (const auto& p : lo) {
      const double w = std::log(p.value);
      for (std::size_t k = 0; k < bs.size(); ++k) log_ap[k] = std::min(log_ap[k], w + bs[k] * p.s);
    }
    const double best_ap = *std::max_element(log_ap.begin(), log_ap.end());
    std::size_t kp = bs.size() - 1;
    for (std::size_t k = bs.size(); k-- > 0;) {
      if (log_ap[k] >= best_ap - 1e-9) kp = k;
    }
    fit.b_prime = bs[kp];
    fit.a_prime = std::exp(log_ap[kp]);
    for (;;) {
      const bool ok = std::all_of(lo.begin(), lo.end(), [&](const auto& p) { return p.value >= fit.lower_env(p.s); });
      if (ok) break;
      fit.a_prime = std::nextafter(fit.a_prime, 0.0) * (1.0 - 1e-15);
    }
  }

  std::size_t inside = 0;
  for (const auto& p : up) inside += p.value <= fit.upper_env(p.s) ? 1 : 0;
  for (const auto& p : lo) inside += p.value >= fit.lower_env(p.s) ? 1 : 0;
  const std::size_t total = up.size() + lo.size();
  fit.inside_fraction = total > 0 ? static_cast<double>(inside) / static_cast<double>(total) : 1.0;
  return fit;
}

}  // namespace

AronsonFit aronson_fit_points(std::span<const EnvelopePoint> points, const AronsonOptions& opts) {
  std::size_t admissible = 0;
  for (const auto& p : points) admissible += p.value > opts.positivity_floor ? 1 : 0;
  return fit_envelopes(points, points, admissible, opts);
}

EnvelopeCollector::EnvelopeCollector(const Grid& grid) : grid_(grid) {
  const double n = grid.cells_per_axis();
  offsets_ = offsets_within(grid, n * n / 16.0);
  for (const auto& o : offsets_) offset_key_.push_back(static_cast<long long>(o[0]) * o[0] + static_cast<long long>(o[1]) * o[1]);
  keys_ = offset_key_;
  std::sort(keys_.begin(), keys_.end());
  keys_.erase(std::unique(keys_.begin(), keys_.end()), keys_.end());
  for (auto& k : offset_key_) k = std::lower_bound(keys_.begin(), keys_.end(), k) - keys_.begin();
}

void EnvelopeCollector::add(const KernelSlice& slice) {
  const double t = slice.t;
  const double tw = time_weight(t, grid_.dim());
  const double dx2 = grid_.dx() * grid_.dx();
  const std::size_t base = bins_.size();
  for (long long key : keys_) {
    bins_.push_back({t, static_cast<double>(key) * dx2 / t, 0.0, std::numeric_limits<double>::infinity()});
  }
  const AronsonOptions defaults;
  for (std::size_t x = 0; x < grid_.size(); ++x) {
    for (std::size_t o = 0; o < offsets_.size(); ++o) {
      const std::size_t y = shifted(grid_, x, offsets_[o]);
      const double v = tw * slice.K(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y));
      Bin& bin = bins_[base + static_cast<std::size_t>(offset_key_[o])];
      bin.max_val = std::max(bin.max_val, v);
      bin.min_val = std::min(bin.min_val, v);
      ++pairs_;
      if (v > defaults.positivity_floor) ++positive_pairs_;
    }
  }
}

std::vector<EnvelopePoint> EnvelopeCollector::upper_candidates() const {
  std::vector<EnvelopePoint> out;
  for (const auto& b : bins_) out.push_back({b.t, b.s, b.max_val});
  return out;
}

std::vector<EnvelopePoint> EnvelopeCollector::lower_candidates() const {
  std::vector<EnvelopePoint> out;
  for (const auto& b : bins_) out.push_back({b.t, b.s, b.min_val});
  return out;
}

AronsonFit aronson_fit(const EnvelopeCollector& collector, const AronsonOptions& opts) {
  const auto up = collector.upper_candidates();
  const auto lo = collector.lower_candidates();
  return fit_envelopes(up, lo, collector.positive_pairs(), opts);
}

AronsonFit aronson_fit(std::span<const KernelSlice> kernels, const Grid& grid, const AronsonOptions& opts) {
  EnvelopeCollector collector(grid);
  for (const auto& k : kernels) collector.add(k);
  return aronson_fit(collector, opts);
}

std::vector<EnvelopePoint> kernel_profile(const KernelSlice& slice, const Grid& grid, std::size_t source) {
  std::vector<EnvelopePoint> out;
  const double tw = time_weight(slice.t, grid.dim());
  const long long n = grid.cells_per_axis();
  const double dx2 = grid.dx() * grid.dx();
  for (std::size_t x = 0; x < grid.size(); ++x) {
    const long long k2 = grid.dist2_cells(x, source);
    if (16 * k2 > n * n) continue;
    out.push_back({slice.t, static_cast<double>(k2) * dx2 / slice.t,
                   tw * slice.K(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(source))});
  }
  return out;
}

// ---------------------------------------------------------------------------

double cks_difference_form(const KernelSlice& slice, const Grid& grid, const GridFunction& phi,
                           const GridFunction& chi) {
  const auto N = static_cast<Eigen::Index>(grid.size());
  if (phi.size() != N || chi.size() != N) throw std::invalid_argument("cks_difference_form: size mismatch");
  std::vector<Eigen::Index> support;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (!(chi[i] >= 0.0 && chi[i] <= 1.0)) throw std::invalid_argument("cks_difference_form: chi must lie in [0,1]");
    if (phi[i] != 0.0 && chi[i] != 1.0) throw std::invalid_argument("cks_difference_form: chi must be 1 on supp phi");
    if (chi[i] > 0.0) support.push_back(i);
  }
  double acc = 0.0;
  for (Eigen::Index x : support) {
    double row = 0.0;
    for (Eigen::Index y : support) {
      const double diff = phi[x] - phi[y];
      row += slice.K(x, y) * chi[y] * diff * diff;
    }
    acc += chi[x] * row;
  }
  const double cv = grid.cell_vol();
  return acc * cv * cv / (2.0 * slice.t);
}

std::vector<CksAuditEntry> cks_audit(const SparseOperator& H, const KernelSlice& slice,
                                     std::span<const GridFunction> phis, std::span<const GridFunction> chis) {
  if (phis.size() != chis.size()) throw std::invalid_argument("cks_audit: phi/chi count mismatch");
  std::vector<CksAuditEntry> out;
  for (std::size_t i = 0; i < phis.size(); ++i) {
    const double value = cks_difference_form(slice, H.grid(), phis[i], chis[i]);
    const double form = form_h(H, phis[i]).value;
    const double scale = form + value;
    out.push_back({slice.t, i, value, form, form >= value - 1e-8 * scale});
  }
  return out;
}

double rho_second_moment(double r, int d) {
  if (d != 1 && d != 2) throw std::invalid_argument("rho_second_moment: d must be 1 or 2");
  const BumpRho rho(r);
  const double half = 0.5 * r;
  // Radial integrand: d=1 gives 2 x^2 rho, d=2 gives pi q^3 rho (angular factor of cos^2).
  auto radial = [&](double q) {
    const double w = rho(q * q);
    return d == 1 ? 2.0 * q * q * w : std::numbers::pi * q * q * q * w;
  };
  const double plateau = d == 1 ? 2.0 * half * half * half / 3.0 : std::numbers::pi * std::pow(half, 4) / 4.0;
  double err = 0.0;
  const double bridge =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(radial, half, r, 20, 1e-12, &err);
  return plateau + bridge;
}

CksResult cks_mu_recovery(double a, double r, int d) {
  if (!(r > 0.0)) throw std::invalid_argument("cks_mu_recovery: r must be > 0");
  CksResult res;
  res.r = r;
  res.d = d;
  res.plateau_fraction = 0.5;
  res.I_rho = rho_second_moment(r, d);
  res.mu_cks = 0.5 * std::max(a, 0.0) * res.I_rho;
  return res;
}

// ---------------------------------------------------------------------------

EquivalenceReport equivalence_verdicts(const CoefficientField& field, const GardingResult& garding,
                                       const LowerBoundResult& lower, const AronsonFit& fit,
                                       const Thresholds& thresholds) {
  EquivalenceReport rep;
  rep.thresholds = thresholds;
  rep.mu_pointwise = field_eig_range(field).mu_pointwise;
  rep.garding_mu = garding.mu;
  rep.a = lower.a;
  rep.a_prime = fit.a_prime;
  rep.strongly_elliptic = rep.mu_pointwise >= thresholds.mu;
  rep.local_lower_bound = lower.a >= thresholds.a;
  rep.aronson_lower = fit.a_prime >= thresholds.a_prime;
  rep.consistent = rep.strongly_elliptic == rep.local_lower_bound && rep.local_lower_bound == rep.aronson_lower;
  rep.mu_cks = cks_mu_recovery(lower.a, lower.r, field.grid().dim()).mu_cks;
  rep.cks_chain_ok = rep.mu_cks <= garding.mu + 1e-6;
  return rep;
}

}  // namespace ellikernel
