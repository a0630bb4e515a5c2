#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ellikernel/bounds.hpp"
#include "ellikernel/coefficient_field.hpp"

namespace ellikernel {

enum class Analysis { garding, viscosity, kernel, lower_bound, aronson, cks, equivalence };

std::string to_string(Analysis a);
std::optional<Analysis> analysis_from_string(const std::string& s);

/// Malformed or out-of-range scenario configuration. `field()` names the offending key.
class ScenarioError : public std::invalid_argument {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::invalid_argument("scenario field '" + field + "': " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct TimeGridSpec {
  double t_min = 0.0;  // 0 selects max(4 dx^2, 1e-3)
  double t_max = 1.0;
  int count = 16;
};

struct Scenario {
  std::string name;
  int d = 1;
  int n = 64;
  double L = 8.0;
  FieldFamily family = family::Constant{1.0};
  std::uint64_t seed = 0;
  TimeGridSpec time_grid;
  Thresholds thresholds;
  std::vector<double> eps_schedule;  // empty selects 2^0 .. 2^-12
  std::set<Analysis> analyses;       // empty selects all
  double radius = 1.0;               // probe radius r for the local lower bound
  int cks_functions = 20;
  std::uint64_t test_seed = 7;
};

/// Scenario from its JSON form. Missing keys take defaults; unknown keys are rejected.
Scenario parse_scenario(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& sc);

/// Throws ScenarioError naming the first invalid field.
void validate_scenario(const Scenario& sc);

/// A gallery name or a path to a JSON scenario file.
Scenario load_scenario(const std::string& name_or_path);

std::vector<Scenario> gallery();
std::optional<Scenario> gallery_lookup(const std::string& name);

}  // namespace ellikernel
