#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "ellikernel/coefficient_field.hpp"
#include "ellikernel/garding.hpp"
#include "ellikernel/semigroup.hpp"

namespace ellikernel {

// ---------------------------------------------------------------------------
// Smooth cutoff

/// rho(u) on squared distances u >= 0: 1 on [0, (r/2)^2], 0 on [r^2, inf), and
/// exp(1 - 1/(1 - s^2)) with s = (sqrt(u) - r/2)/(r/2) in between.
class BumpRho {
 public:
  explicit BumpRho(double r);
  double radius() const { return r_; }
  double operator()(double u) const;

 private:
  double r_;
};

BumpRho bump_rho(double r);

// ---------------------------------------------------------------------------
// Local small-time lower bound  K_t(x;y) >= a t^{-d/2} for |x-y| <= r sqrt(t)

struct LowerBoundViolation {
  double t;
  std::size_t x;
  std::size_t y;
  double value;  // t^{d/2} K_t(x;y)
};

struct LowerBoundResult {
  double a = 0.0;
  double r = 0.0;
  double threshold = 0.0;
  bool verdict = false;
  /// Up to 100 probe points below threshold, worst first.
  std::vector<LowerBoundViolation> violations;
  std::size_t probes = 0;
};

/// Streams kernel slices into the min of t^{d/2} K over the probe window.
class LowerBoundScanner {
 public:
  /// Throws std::invalid_argument if r sqrt(t_max) > L/4 or r <= 0.
  LowerBoundScanner(const Grid& grid, double r, double a_threshold, double t_max = 1.0);
  void add(const KernelSlice& slice);
  /// Throws std::invalid_argument("radius below resolution") if no off-diagonal pair was probed.
  LowerBoundResult result() const;

 private:
  Grid grid_;
  double r_;
  double threshold_;
  double t_max_;
  double a_;
  std::size_t probes_ = 0;
  std::size_t offdiag_probes_ = 0;
  std::vector<LowerBoundViolation> worst_;  // max-heap on value, size <= 100
};

LowerBoundResult local_lower_bound(std::span<const KernelSlice> kernels, const Grid& grid, double r,
                                   double a_threshold);

// ---------------------------------------------------------------------------
// Aronson envelope fit  a' e^{-b' s} <= t^{d/2} K <= a e^{-b s},  s = |x-y|^2 / t

struct EnvelopePoint {
  double t;
  double s;
  double value;  // t^{d/2} K
};

struct AronsonFit {
  double a = 0.0;
  double b = 0.0;
  double a_prime = 0.0;
  double b_prime = 0.0;
  double s_cap = 16.0;
  /// Ratio between consecutive b grid points.
  double b_grid_ratio = 0.0;
  std::size_t upper_points = 0;
  std::size_t lower_points = 0;
  /// Fraction of admissible points on or inside both envelopes (1.0 by construction).
  double inside_fraction = 0.0;
  /// Some pair in the lower window has t^{d/2} K <= 1e-13, which forces a' = 0.
  bool lower_vanishes = false;

  double upper_env(double s) const;
  double lower_env(double s) const;
};

struct AronsonOptions {
  double b_min = 1.0 / 16.0;
  double b_max = 16.0;
  int b_points = 64;
  double s_cap = 16.0;
  double positivity_floor = 1e-13;
  std::size_t min_points = 100;
};

/// The log-spaced b grid.
std::vector<double> aronson_b_grid(const AronsonOptions& opts = {});

/// Fits both envelopes to explicit data points. Upper: smallest a over the b grid,
/// then the largest b that keeps it. Lower (s <= s_cap): largest a', then the
/// smallest b' that keeps it. Points with value <= positivity_floor are excluded
/// from the upper fit; inside the lower window they force a' = 0.
/// Throws std::invalid_argument("insufficient kernel data") below min_points.
AronsonFit aronson_fit_points(std::span<const EnvelopePoint> points, const AronsonOptions& opts = {});

/// Collapses kernel slices to per-(t, |x-y|) extremes over pairs within L/4.
class EnvelopeCollector {
 public:
  explicit EnvelopeCollector(const Grid& grid);
  void add(const KernelSlice& slice);
  /// Per-bin extremes; each entry stands for every pair in the bin.
  std::vector<EnvelopePoint> upper_candidates() const;
  std::vector<EnvelopePoint> lower_candidates() const;
  std::size_t positive_pairs() const { return positive_pairs_; }
  std::size_t pairs() const { return pairs_; }

 private:
  struct Bin {
    double t;
    double s;
    double max_val;  // max over positive entries, 0 if none
    double min_val;
  };
  Grid grid_;
  std::vector<std::array<int, 2>> offsets_;
  std::vector<long long> offset_key_;
  std::vector<long long> keys_;  // distinct squared cell distances, ascending
  std::vector<Bin> bins_;
  std::size_t positive_pairs_ = 0;
  std::size_t pairs_ = 0;

};

AronsonFit aronson_fit(const EnvelopeCollector& collector, const AronsonOptions& opts = {});
AronsonFit aronson_fit(std::span<const KernelSlice> kernels, const Grid& grid, const AronsonOptions& opts = {});

/// Profile of one kernel column: (t, s, t^{d/2} K(x; source)) for every x within L/4 of source.
std::vector<EnvelopePoint> kernel_profile(const KernelSlice& slice, const Grid& grid, std::size_t source = 0);

// ---------------------------------------------------------------------------
// Carlen-Kusuoka-Stroock recovery of a Garding constant from kernel lower bounds

/// (2t)^{-1} sum_{x,y} K_t(x;y) chi(x) chi(y) (phi(x) - phi(y))^2 cell_vol^2.
/// Throws std::invalid_argument if chi leaves [0,1] or chi != 1 where phi != 0.
double cks_difference_form(const KernelSlice& slice, const Grid& grid, const GridFunction& phi,
                           const GridFunction& chi);

struct CksAuditEntry {
  double t;
  std::size_t phi_index;
  double value;   // difference form
  double form;    // h(phi)
  bool ok;        // form >= value - 1e-8 * scale
};

/// Checks h(phi) >= cks_difference_form for one slice and a family of test functions.
std::vector<CksAuditEntry> cks_audit(const SparseOperator& H, const KernelSlice& slice,
                                     std::span<const GridFunction> phis, std::span<const GridFunction> chis);

struct CksResult {
  double mu_cks = 0.0;
  double r = 0.0;
  double plateau_fraction = 0.5;
  double I_rho = 0.0;
  int d = 1;
  std::vector<CksAuditEntry> difference_form_values;
};

/// int_{R^d} rho(|x|^2) (e.x)^2 dx for a unit vector e, by adaptive Gauss-Kronrod.
double rho_second_moment(double r, int d);

/// mu_cks = a * I_rho / 2.
CksResult cks_mu_recovery(double a, double r, int d);

// ---------------------------------------------------------------------------
// Equivalence verdicts

struct Thresholds {
  double mu = 1e-4;
  double a = 1e-4;
  double a_prime = 1e-6;
};

struct EquivalenceReport {
  bool strongly_elliptic = false;   // V1: mu_pointwise >= mu threshold
  bool local_lower_bound = false;   // V2: lower.a >= a threshold
  bool aronson_lower = false;       // V3: fit.a' >= a' threshold
  bool consistent = false;
  double mu_pointwise = 0.0;
  double garding_mu = 0.0;
  double a = 0.0;
  double a_prime = 0.0;
  double mu_cks = 0.0;
  bool cks_chain_ok = false;        // mu_cks <= garding.mu + 1e-6
  Thresholds thresholds;
};

EquivalenceReport equivalence_verdicts(const CoefficientField& field, const GardingResult& garding,
                                       const LowerBoundResult& lower, const AronsonFit& fit,
                                       const Thresholds& thresholds = {});

}  // namespace ellikernel
