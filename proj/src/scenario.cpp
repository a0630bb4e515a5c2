#include "ellikernel/scenario.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ellikernel/grid.hpp"
#include "ellikernel/viscosity.hpp"

namespace ellikernel {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<Analysis, const char*>, 7> kAnalysisNames{{
    {Analysis::garding, "garding"},
    {Analysis::viscosity, "viscosity"},
    {Analysis::kernel, "kernel"},
    {Analysis::lower_bound, "lower_bound"},
    {Analysis::aronson, "aronson"},
    {Analysis::cks, "cks"},
    {Analysis::equivalence, "equivalence"},
}};

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ScenarioError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

template <class T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ScenarioError(where.empty() ? key : where + "." + key, std::string("wrong type: ") + e.what());
  }
}

FieldFamily parse_family(const std::string& name, const json& p) {
  if (!p.is_object()) throw ScenarioError("params", "must be an object");
  const std::string w = "params";
  if (name == "constant") {
    reject_unknown(p, {"c0"}, w);
    return family::Constant{get_or(p, "c0", 1.0, w)};
  }
  if (name == "scalar_table") {
    reject_unknown(p, {"values"}, w);
    if (!p.contains("values")) throw ScenarioError("params.values", "required for scalar_table");
    return family::ScalarTable{get_or(p, "values", std::vector<double>{}, w)};
  }
  if (name == "checkerboard") {
    reject_unknown(p, {"c_lo", "c_hi", "block"}, w);
    family::Checkerboard f;
    return family::Checkerboard{get_or(p, "c_lo", f.c_lo, w), get_or(p, "c_hi", f.c_hi, w), get_or(p, "block", f.block, w)};
  }
  if (name == "lognormal") {
    reject_unknown(p, {"sigma", "correlation_len"}, w);
    family::Lognormal f;
    return family::Lognormal{get_or(p, "sigma", f.sigma, w), get_or(p, "correlation_len", f.correlation_len, w)};
  }
  if (name == "degenerate_sine") {
    reject_unknown(p, {"power"}, w);
    return family::DegenerateSine{get_or(p, "power", 2.0, w)};
  }
  if (name == "degenerate_plateau") {
    reject_unknown(p, {"c_out", "zero_from", "zero_to"}, w);
    family::DegeneratePlateau f;
    return family::DegeneratePlateau{get_or(p, "c_out", f.c_out, w), get_or(p, "zero_from", f.zero_from, w),
                                     get_or(p, "zero_to", f.zero_to, w)};
  }
  if (name == "anisotropic") {
    reject_unknown(p, {"c_xx", "c_yy", "c_xy"}, w);
    family::Anisotropic f;
    return family::Anisotropic{get_or(p, "c_xx", f.c_xx, w), get_or(p, "c_yy", f.c_yy, w), get_or(p, "c_xy", f.c_xy, w)};
  }
  throw ScenarioError("family", "unknown family '" + name + "'");
}

json family_params(const FieldFamily& fam) {
  return std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, family::Constant>) return {{"c0", f.c0}};
        if constexpr (std::is_same_v<F, family::ScalarTable>) return {{"values", f.values}};
        if constexpr (std::is_same_v<F, family::Checkerboard>) return {{"c_lo", f.c_lo}, {"c_hi", f.c_hi}, {"block", f.block}};
        if constexpr (std::is_same_v<F, family::Lognormal>) return {{"sigma", f.sigma}, {"correlation_len", f.correlation_len}};
        if constexpr (std::is_same_v<F, family::DegenerateSine>) return {{"power", f.power}};
        if constexpr (std::is_same_v<F, family::DegeneratePlateau>)
          return {{"c_out", f.c_out}, {"zero_from", f.zero_from}, {"zero_to", f.zero_to}};
        if constexpr (std::is_same_v<F, family::Anisotropic>) return {{"c_xx", f.c_xx}, {"c_yy", f.c_yy}, {"c_xy", f.c_xy}};
      },
      fam);
}

}  // namespace

std::string to_string(Analysis a) {
  for (const auto& [k, name] : kAnalysisNames) {
    if (k == a) return name;
  }
  return "unknown";
}

std::optional<Analysis> analysis_from_string(const std::string& s) {
  for (const auto& [k, name] : kAnalysisNames) {
    if (s == name) return k;
  }
  return std::nullopt;
}

Scenario parse_scenario(const json& j) {
  if (!j.is_object()) throw ScenarioError("<root>", "scenario must be a JSON object");
  reject_unknown(j, {"name", "d", "n", "L", "family", "params", "seed", "time_grid", "thresholds", "eps_schedule",
                     "analyses", "radius", "cks_functions", "test_seed"},
                 "");
  Scenario sc;
  if (!j.contains("name")) throw ScenarioError("name", "required");
  sc.name = get_or(j, "name", std::string{}, "");
  sc.d = get_or(j, "d", sc.d, "");
  sc.n = get_or(j, "n", sc.n, "");
  sc.L = get_or(j, "L", sc.L, "");
  const std::string fam = get_or(j, "family", std::string("constant"), "");
  sc.family = parse_family(fam, j.contains("params") ? j.at("params") : json::object());
  sc.seed = get_or(j, "seed", sc.seed, "");
  if (j.contains("time_grid")) {
    const auto& tg = j.at("time_grid");
    if (!tg.is_object()) throw ScenarioError("time_grid", "must be an object");
    reject_unknown(tg, {"t_min", "t_max", "count"}, "time_grid");
    sc.time_grid.t_min = get_or(tg, "t_min", sc.time_grid.t_min, "time_grid");
    sc.time_grid.t_max = get_or(tg, "t_max", sc.time_grid.t_max, "time_grid");
    sc.time_grid.count = get_or(tg, "count", sc.time_grid.count, "time_grid");
  }
  if (j.contains("thresholds")) {
    const auto& th = j.at("thresholds");
    if (!th.is_object()) throw ScenarioError("thresholds", "must be an object");
    reject_unknown(th, {"mu", "a", "a_prime"}, "thresholds");
    sc.thresholds.mu = get_or(th, "mu", sc.thresholds.mu, "thresholds");
    sc.thresholds.a = get_or(th, "a", sc.thresholds.a, "thresholds");
    sc.thresholds.a_prime = get_or(th, "a_prime", sc.thresholds.a_prime, "thresholds");
  }
  sc.eps_schedule = get_or(j, "eps_schedule", sc.eps_schedule, "");
  for (const auto& name : get_or(j, "analyses", std::vector<std::string>{}, "")) {
    const auto a = analysis_from_string(name);
    if (!a) throw ScenarioError("analyses", "unknown analysis '" + name + "'");
    sc.analyses.insert(*a);
  }
  sc.radius = get_or(j, "radius", sc.radius, "");
  sc.cks_functions = get_or(j, "cks_functions", sc.cks_functions, "");
  sc.test_seed = get_or(j, "test_seed", sc.test_seed, "");
  validate_scenario(sc);

  if (sc.eps_schedule.empty()) sc.eps_schedule = EpsSchedule::standard().values();
  if (sc.analyses.empty()) {
    for (const auto& [k, _] : kAnalysisNames) sc.analyses.insert(k);
  }
  if (sc.time_grid.t_min == 0.0) {
    const double dx = sc.L / sc.n;
    sc.time_grid.t_min = std::max(4.0 * dx * dx, 1e-3);
  }
  return sc;
}

json scenario_to_json(const Scenario& sc) {
  json analyses = json::array();
  for (Analysis a : sc.analyses) analyses.push_back(to_string(a));
  return {
      {"name", sc.name},
      {"d", sc.d},
      {"n", sc.n},
      {"L", sc.L},
      {"family", family_name(sc.family)},
      {"params", family_params(sc.family)},
      {"seed", sc.seed},
      {"time_grid", {{"t_min", sc.time_grid.t_min}, {"t_max", sc.time_grid.t_max}, {"count", sc.time_grid.count}}},
      {"thresholds", {{"mu", sc.thresholds.mu}, {"a", sc.thresholds.a}, {"a_prime", sc.thresholds.a_prime}}},
      {"eps_schedule", sc.eps_schedule},
      {"analyses", analyses},
      {"radius", sc.radius},
      {"cks_functions", sc.cks_functions},
      {"test_seed", sc.test_seed},
  };
}

void validate_scenario(const Scenario& sc) {
  if (sc.name.empty()) throw ScenarioError("name", "must be non-empty");
  for (char c : sc.name) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.'))
      throw ScenarioError("name", "only letters, digits, '-', '_' and '.' are allowed");
  }
  if (sc.d != 1 && sc.d != 2) throw ScenarioError("d", "d must be 1 or 2");
  if (sc.n < 4) throw ScenarioError("n", "n >= 4 required");
  if (!(sc.L > 0.0) || !std::isfinite(sc.L)) throw ScenarioError("L", "L > 0 required");
  const Grid grid(sc.d, sc.n, sc.L);
  try {
    (void)make_field(grid, sc.family, sc.seed);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("params", e.what());
  }

  const auto& tg = sc.time_grid;
  if (tg.count < 2) throw ScenarioError("time_grid.count", "count >= 2 required");
  if (!(tg.t_max > 0.0) || tg.t_max > 1.0) throw ScenarioError("time_grid.t_max", "t_max must lie in (0, 1]");
  if (tg.t_min < 0.0 || (tg.t_min > 0.0 && tg.t_min >= tg.t_max))
    throw ScenarioError("time_grid.t_min", "t_min must lie in (0, t_max) (0 selects the default)");
  if (tg.t_min == 0.0 && std::max(4.0 * grid.dx() * grid.dx(), 1e-3) >= tg.t_max)
    throw ScenarioError("time_grid.t_max", "t_max must exceed the default t_min");

  if (!(sc.thresholds.mu > 0.0)) throw ScenarioError("thresholds.mu", "must be positive");
  if (!(sc.thresholds.a > 0.0)) throw ScenarioError("thresholds.a", "must be positive");
  if (!(sc.thresholds.a_prime > 0.0)) throw ScenarioError("thresholds.a_prime", "must be positive");

  if (!sc.eps_schedule.empty()) {
    try {
      (void)EpsSchedule(sc.eps_schedule);
    } catch (const std::invalid_argument& e) {
      throw ScenarioError("eps_schedule", e.what());
    }
  }
  if (!(sc.radius > 0.0)) throw ScenarioError("radius", "must be positive");
  if (sc.radius * std::sqrt(tg.t_max) > sc.L / 4.0) throw ScenarioError("radius", "r sqrt(t_max) must not exceed L/4");
  if (sc.cks_functions < 0) throw ScenarioError("cks_functions", "must be non-negative");
}

Scenario load_scenario(const std::string& name_or_path) {
  if (auto sc = gallery_lookup(name_or_path)) return *sc;
  std::ifstream in(name_or_path);
  if (!in) throw std::runtime_error("cannot open scenario '" + name_or_path + "' (not a gallery name or readable file)");
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  try {
    j = json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw std::runtime_error(name_or_path + ": " + e.what());
  }
  try {
    return parse_scenario(j);
  } catch (const ScenarioError& e) {
    throw ScenarioError(e.field(), name_or_path + ": " + e.what());
  }
}

std::vector<Scenario> gallery() {
  auto entry = [](const char* name, int d, int n, FieldFamily fam, std::uint64_t seed = 0) {
    json j = {{"name", name}, {"d", d}, {"n", n}, {"L", 8.0}, {"seed", seed}};
    j["family"] = family_name(fam);
    j["params"] = family_params(fam);
    return parse_scenario(j);
  };
  return {
      entry("elliptic-constant-1d", 1, 128, family::Constant{1.0}),
      entry("elliptic-checkerboard-1d", 1, 128, family::Checkerboard{0.5, 2.0, 0}),
      entry("elliptic-lognormal-1d", 1, 128, family::Lognormal{0.5, 0.5}, 42),
      entry("anisotropic-2d", 2, 32, family::Anisotropic{2.0, 1.0, 0.5}),
      entry("checkerboard-2d", 2, 32, family::Checkerboard{0.25, 4.0, 0}),
      entry("degenerate-sine-1d", 1, 64, family::DegenerateSine{2.0}),
      entry("degenerate-plateau-1d", 1, 128, family::DegeneratePlateau{1.0, 0.0, 2.0}),
      entry("zero-field-1d", 1, 128, family::Constant{0.0}),
  };
}

std::optional<Scenario> gallery_lookup(const std::string& name) {
  for (auto& sc : gallery()) {
    if (sc.name == name) return sc;
  }
  return std::nullopt;
}

}  // namespace ellikernel
