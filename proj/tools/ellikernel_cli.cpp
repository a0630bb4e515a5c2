// ellikernel command line: run scenarios, list the gallery, re-emit reports.
//
// Exit codes: 0 consistent verdicts, 2 inconsistent verdicts, 1 execution error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ellikernel/pipeline.hpp"
#include "ellikernel/report_io.hpp"
#include "ellikernel/scenario.hpp"

namespace ek = ellikernel;

namespace {

constexpr int kConsistent = 0;
constexpr int kError = 1;
constexpr int kInconsistent = 2;

std::string default_out_dir() {
  if (const char* env = std::getenv("ELLIKERNEL_OUT"); env && *env) return env;
  return "ellikernel-out";
}

void print_verdicts(const ek::Report& r) {
  std::cout << r.scenario.name << ":";
  if (!r.verdicts) {
    std::cout << " (equivalence analysis not requested)\n";
    return;
  }
  const auto& v = *r.verdicts;
  std::cout << " V1=" << (v.strongly_elliptic ? "true" : "false") << " V2=" << (v.local_lower_bound ? "true" : "false")
            << " V3=" << (v.aronson_lower ? "true" : "false") << " consistent=" << (v.consistent ? "true" : "false")
            << "\n  mu_pointwise=" << v.mu_pointwise << " garding_mu=" << v.garding_mu << " a=" << v.a
            << " a'=" << v.a_prime << " mu_cks=" << v.mu_cks << (v.cks_chain_ok ? "" : " (chain check FAILED)")
            << "\n";
}

int exit_code(const ek::Report& r) {
  if (!r.verdicts) return kConsistent;
  return r.verdicts->consistent ? kConsistent : kInconsistent;
}

ek::Scenario resolve(const std::string& what, const std::optional<std::uint64_t>& seed) {
  ek::Scenario sc = ek::load_scenario(what);
  if (seed) {
    sc.seed = *seed;
    ek::validate_scenario(sc);
  }
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Heat kernel bounds and ellipticity for divergence-form operators on periodic grids"};
  app.require_subcommand(1);

  std::string target;
  std::string out_dir = default_out_dir();
  std::optional<std::uint64_t> seed;
  int threads = 0;
  std::string formats = "json";

  auto* run = app.add_subcommand("run", "Run a scenario (gallery name or JSON file) and write the report");
  run->add_option("scenario", target, "Gallery name or path to a scenario file")->required();
  run->add_option("--out", out_dir, "Output directory (default: $ELLIKERNEL_OUT or ./ellikernel-out)");
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_option("--threads", threads, "Worker threads (0 = default)")->check(CLI::NonNegativeNumber);
  run->add_option("--formats", formats, "Comma-separated subset of json,csv,svg");

  auto* check = app.add_subcommand("check", "Run a scenario and print verdicts only");
  check->add_option("scenario", target, "Gallery name or path to a scenario file")->required();
  check->add_option("--seed", seed, "Override the scenario seed");
  check->add_option("--threads", threads, "Worker threads (0 = default)")->check(CLI::NonNegativeNumber);

  auto* gal = app.add_subcommand("gallery", "List the builtin scenarios");
  bool gallery_json = false;
  gal->add_flag("--json", gallery_json, "Print the scenarios as JSON");

  std::string report_path;
  std::string to = "csv";
  auto* rep = app.add_subcommand("report", "Re-emit a saved JSON report as CSV tables or SVG plots");
  rep->add_option("json", report_path, "Report file written by `run`")->required()->check(CLI::ExistingFile);
  rep->add_option("--to", to, "csv, svg or both (comma-separated)");
  rep->add_option("--out", out_dir, "Output directory (default: $ELLIKERNEL_OUT or ./ellikernel-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kError;
  }

  try {
    if (*gal) {
      const auto list = ek::gallery();
      if (gallery_json) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& sc : list) arr.push_back(ek::scenario_to_json(sc));
        std::cout << arr.dump(2) << "\n";
      } else {
        for (const auto& sc : list) {
          std::cout << sc.name << "  d=" << sc.d << " n=" << sc.n << " L=" << sc.L
                    << " family=" << ek::family_name(sc.family) << "\n";
        }
      }
      return kConsistent;
    }
    if (*run) {
      const auto fmt = ek::parse_formats(formats);
      const auto sc = resolve(target, seed);
      const auto report = ek::run_scenario(sc, {threads});
      print_verdicts(report);
      for (const auto& p : ek::emit_report(report, out_dir, fmt)) std::cout << "wrote " << p.string() << "\n";
      return exit_code(report);
    }
    if (*check) {
      const auto report = ek::run_scenario(resolve(target, seed), {threads});
      print_verdicts(report);
      return exit_code(report);
    }
    if (*rep) {
      auto fmt = ek::parse_formats(to);
      if (fmt.json) throw std::invalid_argument("--to accepts csv and svg only");
      std::ifstream in(report_path);
      std::stringstream buf;
      buf << in.rdbuf();
      const auto doc = nlohmann::json::parse(buf.str());
      for (const auto& p : ek::emit_document(doc, out_dir, fmt)) std::cout << "wrote " << p.string() << "\n";
      return kConsistent;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
