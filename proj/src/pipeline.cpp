#include "ellikernel/pipeline.hpp"

#include <chrono>
#include <memory>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ellikernel/discrete_operators.hpp"
#include "ellikernel/semigroup.hpp"
#include "ellikernel/test_functions.hpp"
#include "ellikernel/viscosity.hpp"

namespace ellikernel {

namespace {

class StageClock {
 public:
  StageClock(Report& report, std::string stage)
      : report_(report), stage_(std::move(stage)), start_(std::chrono::steady_clock::now()) {}
  ~StageClock() {
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start_;
    report_.timing[stage_] += dt.count();
  }

 private:
  Report& report_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

template <class F>
auto stage(Report& report, const std::string& name, F&& body) {
  StageClock clock(report, name);
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

std::set<Analysis> resolve_analyses(const std::set<Analysis>& requested) {
  std::set<Analysis> out = requested;
  if (out.contains(Analysis::equivalence)) {
    out.insert({Analysis::garding, Analysis::lower_bound, Analysis::aronson, Analysis::cks});
  }
  if (out.contains(Analysis::cks)) out.insert(Analysis::lower_bound);
  if (out.contains(Analysis::lower_bound) || out.contains(Analysis::aronson) || out.contains(Analysis::cks)) {
    out.insert(Analysis::kernel);
  }
  return out;
}

Report run_scenario(const Scenario& sc, const RunOptions& opts) {
#ifdef _OPENMP
  if (opts.threads > 0) omp_set_num_threads(opts.threads);
#endif
  const auto t_start = std::chrono::steady_clock::now();
  Report report;
  report.scenario = sc;
  const auto todo = resolve_analyses(sc.analyses);
  auto wants = [&](Analysis a) { return todo.contains(a); };

  const Grid grid = stage(report, "assemble", [&] { return Grid(sc.d, sc.n, sc.L); });
  const auto field = stage(report, "assemble", [&] { return make_field(grid, sc.family, sc.seed); });
  const auto H = stage(report, "assemble", [&] { return assemble_H(field); });
  const auto laplacian = stage(report, "assemble", [&] { return assemble_laplacian(grid); });
  report.eig_range = field_eig_range(field);
  report.field_norm = field.norm();
  report.field_tag = field.family_tag();
  report.laplacian_norm = laplacian.norm_bound();

  if (wants(Analysis::garding)) {
    report.garding = stage(report, "garding", [&] { return garding_constant(H, laplacian); });
  }

  if (wants(Analysis::viscosity)) {
    report.viscosity = stage(report, "viscosity", [&] {
      const double L = grid.length();
      const GridFunction psi = smooth_bump(grid, {L / 2, L / 2}, L / 4);
      const EpsSchedule schedule(sc.eps_schedule);
      const auto diag = viscosity_limit(H, laplacian, schedule, psi);
      ViscositySummary s;
      s.eps = diag.eps;
      s.deltas = diag.deltas;
      for (std::size_t j = 0; j + 1 < diag.eps.size(); ++j) {
        s.delta_bounds.push_back((diag.eps[j] - diag.eps[j + 1]) * laplacian.norm_bound() * diag.psi_norm);
      }
      s.psi_norm = diag.psi_norm;
      s.converged = diag.converged;
      s.limit_gap = diag.limit_gap;
      s.limit_gap_bound = diag.limit_gap_bound;
      s.consistent = diag.consistent;
      s.solver_iterations = diag.solver_iterations;
      return s;
    });
  }

  if (wants(Analysis::kernel)) {
    report.times = kernel_time_grid(grid, sc.time_grid.t_max, sc.time_grid.count, sc.time_grid.t_min);
    const SemigroupOptions sg_opts;
    const bool dense = grid.size() <= sg_opts.dense_threshold;
    report.kernel_path = dense ? "dense" : "krylov";
    std::unique_ptr<SpectralPropagator> prop;
    if (dense) prop = stage(report, "kernel", [&] { return std::make_unique<SpectralPropagator>(H); });

    std::optional<LowerBoundScanner> scanner;
    if (wants(Analysis::lower_bound)) {
      scanner = stage(report, "lower_bound",
                      [&] { return LowerBoundScanner(grid, sc.radius, sc.thresholds.a, sc.time_grid.t_max); });
    }
    std::optional<EnvelopeCollector> collector;
    if (wants(Analysis::aronson)) collector.emplace(grid);
    std::vector<GridFunction> phis, chis;
    if (wants(Analysis::cks)) {
      for (auto& f : bump_test_functions(grid, sc.cks_functions, sc.test_seed)) {
        phis.push_back(std::move(f.phi));
        chis.push_back(std::move(f.chi));
      }
      report.cks = CksResult{};
    }

    for (double t : report.times) {
      const KernelSlice slice =
          stage(report, "kernel", [&] { return dense ? kernel_matrix(*prop, t) : kernel_matrix(H, t, sg_opts); });
      report.kernel_diagnostics.push_back({t, slice.symmetry_defect, slice.min_entry, slice.mass_defect});
      const auto prof = kernel_profile(slice, grid, 0);
      report.profile.insert(report.profile.end(), prof.begin(), prof.end());
      if (scanner) stage(report, "lower_bound", [&] { scanner->add(slice); });
      if (collector) stage(report, "aronson", [&] { collector->add(slice); });
      if (report.cks) {
        const auto audit = stage(report, "cks", [&] { return cks_audit(H, slice, phis, chis); });
        auto& dst = report.cks->difference_form_values;
        dst.insert(dst.end(), audit.begin(), audit.end());
      }
    }

    if (scanner) report.lower_bound = stage(report, "lower_bound", [&] { return scanner->result(); });
    if (collector) report.aronson = stage(report, "aronson", [&] { return aronson_fit(*collector); });
    if (report.cks) {
      auto audit = std::move(report.cks->difference_form_values);
      report.cks = stage(report, "cks", [&] { return cks_mu_recovery(report.lower_bound->a, sc.radius, sc.d); });
      report.cks->difference_form_values = std::move(audit);
    }
  }

  if (wants(Analysis::equivalence)) {
    report.verdicts = stage(report, "equivalence", [&] {
      return equivalence_verdicts(field, *report.garding, *report.lower_bound, *report.aronson, sc.thresholds);
    });
  }

  const std::chrono::duration<double> total = std::chrono::steady_clock::now() - t_start;
  report.timing["total"] = total.count();
  return report;
}

}  // namespace ellikernel
