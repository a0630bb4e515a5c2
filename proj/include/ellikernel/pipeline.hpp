#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ellikernel/bounds.hpp"
#include "ellikernel/coefficient_field.hpp"
#include "ellikernel/garding.hpp"
#include "ellikernel/scenario.hpp"

namespace ellikernel {

/// A module error annotated with the pipeline stage that raised it.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct ViscositySummary {
  std::vector<double> eps;
  std::vector<double> deltas;
  std::vector<double> delta_bounds;  // (eps_j - eps_{j+1}) |Laplacian| |psi|
  double psi_norm = 0.0;
  bool converged = false;
  double limit_gap = 0.0;
  double limit_gap_bound = 0.0;
  bool consistent = false;
  int solver_iterations = 0;
};

struct KernelDiagnostics {
  double t;
  double symmetry_defect;
  double min_entry;
  double mass_defect;
};

struct Report {
  Scenario scenario;
  EigRange eig_range{};
  double field_norm = 0.0;
  std::string field_tag;
  double laplacian_norm = 0.0;

  std::optional<GardingResult> garding;
  std::optional<ViscositySummary> viscosity;

  std::vector<double> times;
  std::string kernel_path;  // "dense" or "krylov"
  std::vector<KernelDiagnostics> kernel_diagnostics;
  std::vector<EnvelopePoint> profile;  // column of the source cell 0

  std::optional<LowerBoundResult> lower_bound;
  std::optional<AronsonFit> aronson;
  std::optional<CksResult> cks;
  std::optional<EquivalenceReport> verdicts;

  /// Wall-clock seconds per stage; excluded from determinism comparisons.
  std::map<std::string, double> timing;

  /// V1, V2 and V3 agree. False when the equivalence analysis did not run.
  bool consistent() const { return verdicts && verdicts->consistent; }
};

struct RunOptions {
  int threads = 0;  // 0 keeps the OpenMP default
};

/// Runs the requested analyses (and those they depend on) in order:
/// assemble, Garding/viscosity, kernel slices, bounds, verdicts.
Report run_scenario(const Scenario& sc, const RunOptions& opts = {});

/// Analyses a request implies: kernel-based analyses pull in the kernel, and
/// equivalence pulls in garding, lower_bound, aronson and cks.
std::set<Analysis> resolve_analyses(const std::set<Analysis>& requested);

}  // namespace ellikernel
