#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ellikernel/pipeline.hpp"
#include "ellikernel/scenario.hpp"

using namespace ellikernel;
using nlohmann::json;

namespace {

json minimal() {
  return json{{"name", "mini"}, {"d", 1}, {"n", 64}, {"L", 8.0}, {"family", "constant"}, {"params", {{"c0", 1.0}}}};
}

std::string field_of(const json& j) {
  try {
    parse_scenario(j);
  } catch (const ScenarioError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config takes defaults") {
  const auto sc = parse_scenario(minimal());
  CHECK(sc.name == "mini");
  CHECK(sc.n == 64);
  CHECK(sc.seed == 0);
  CHECK(sc.radius == 1.0);
  CHECK(sc.time_grid.t_max == 1.0);
  CHECK(sc.time_grid.count == 16);
  CHECK(sc.time_grid.t_min == doctest::Approx(4.0 / 64.0));
  CHECK(sc.eps_schedule.size() == 13);
  CHECK(sc.analyses.size() == 7);
  CHECK(sc.thresholds.mu == 1e-4);
  CHECK(std::holds_alternative<family::Constant>(sc.family));
}

TEST_CASE("validation errors name the field") {
  auto j = minimal();
  j["n"] = 3;
  CHECK(field_of(j) == "n");
  CHECK_THROWS_WITH_AS(parse_scenario(j), doctest::Contains("n >= 4 required"), ScenarioError);

  j = minimal();
  j["bogus"] = 1;
  CHECK(field_of(j) == "bogus");

  j = minimal();
  j["d"] = "two";
  CHECK(field_of(j) == "d");

  j = minimal();
  j["family"] = "fractal";
  CHECK(field_of(j) == "family");

  j = minimal();
  j["params"] = {{"c1", 1.0}};
  CHECK(field_of(j) == "params.c1");

  j = minimal();
  j["family"] = "checkerboard";
  j["params"] = {{"c_lo", -1.0}, {"c_hi", 1.0}};
  CHECK(field_of(j) == "params");

  j = minimal();
  j["radius"] = 5.0;
  CHECK(field_of(j) == "radius");

  j = minimal();
  j["analyses"] = {"garding", "tea"};
  CHECK(field_of(j).rfind("analyses", 0) == 0);

  j = minimal();
  j["eps_schedule"] = {0.5, 1.0};
  CHECK(field_of(j) == "eps_schedule");

  j = minimal();
  j["name"] = "has space";
  CHECK(field_of(j) == "name");
}

TEST_CASE("gallery") {
  const auto all = gallery();
  CHECK(all.size() >= 8);
  for (const char* name : {"elliptic-constant-1d", "elliptic-checkerboard-1d", "elliptic-lognormal-1d", "anisotropic-2d",
                           "checkerboard-2d", "degenerate-sine-1d", "degenerate-plateau-1d", "zero-field-1d"}) {
    CHECK(gallery_lookup(name).has_value());
  }
  CHECK_FALSE(gallery_lookup("nope").has_value());
  const auto sine = load_scenario("degenerate-sine-1d");
  CHECK(sine.n == 64);
  CHECK(std::holds_alternative<family::DegenerateSine>(sine.family));

  const auto plateau = *gallery_lookup("degenerate-plateau-1d");
  CHECK(field_eig_range(make_field(Grid(plateau.d, plateau.n, plateau.L), plateau.family, plateau.seed)).mu_pointwise ==
        0.0);
  for (const auto& sc : all) CHECK_NOTHROW(validate_scenario(sc));
}

TEST_CASE("scenario JSON round trip") {
  for (const auto& sc : gallery()) {
    const auto j = scenario_to_json(sc);
    const auto back = parse_scenario(j);
    CHECK(scenario_to_json(back) == j);
  }
}

TEST_CASE("load_scenario from files") {
  const auto dir = std::filesystem::temp_directory_path() / "ellikernel_test_scenario";
  std::filesystem::create_directories(dir);
  const auto good = dir / "good.json";
  std::ofstream(good) << minimal().dump(2);
  CHECK(load_scenario(good.string()).name == "mini");

  const auto bad = dir / "bad.json";
  std::ofstream(bad) << "{\n  \"name\": \"x\",\n  \"d\": \n}";
  CHECK_THROWS_WITH(load_scenario(bad.string()), doctest::Contains("line"));
  CHECK_THROWS(load_scenario((dir / "missing.json").string()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("resolve_analyses pulls in dependencies") {
  const auto eq = resolve_analyses({Analysis::equivalence});
  for (auto a : {Analysis::garding, Analysis::kernel, Analysis::lower_bound, Analysis::aronson, Analysis::cks,
                 Analysis::equivalence}) {
    CHECK(eq.count(a) == 1);
  }
  CHECK(eq.count(Analysis::viscosity) == 0);
  const auto cks = resolve_analyses({Analysis::cks});
  CHECK(cks.count(Analysis::lower_bound) == 1);
  CHECK(cks.count(Analysis::kernel) == 1);
  CHECK(resolve_analyses({Analysis::garding}) == std::set<Analysis>{Analysis::garding});
  for (auto a : {Analysis::garding, Analysis::viscosity, Analysis::kernel, Analysis::lower_bound, Analysis::aronson,
                 Analysis::cks, Analysis::equivalence}) {
    CHECK(analysis_from_string(to_string(a)) == a);
  }
}

TEST_CASE("pipeline on gallery scenarios") {
  const auto constant = run_scenario(*gallery_lookup("elliptic-constant-1d"));
  REQUIRE(constant.verdicts);
  CHECK(constant.verdicts->strongly_elliptic);
  CHECK(constant.verdicts->local_lower_bound);
  CHECK(constant.verdicts->aronson_lower);
  CHECK(constant.consistent());
  CHECK(constant.garding->mu == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(constant.kernel_diagnostics.size() == 16);
  CHECK(constant.viscosity->consistent);
  CHECK(constant.timing.count("total") == 1);

  const auto zero = run_scenario(*gallery_lookup("zero-field-1d"));
  CHECK_FALSE(zero.verdicts->strongly_elliptic);
  CHECK_FALSE(zero.verdicts->local_lower_bound);
  CHECK_FALSE(zero.verdicts->aronson_lower);
  CHECK(zero.consistent());

  const auto cb = run_scenario(*gallery_lookup("checkerboard-2d"));
  CHECK(cb.consistent());
  CHECK(cb.verdicts->strongly_elliptic);
  CHECK(cb.garding->mu >= 0.1);
}

TEST_CASE("pipeline runs only what was asked") {
  auto sc = *gallery_lookup("elliptic-checkerboard-1d");
  sc.analyses = {Analysis::garding};
  const auto r = run_scenario(sc);
  CHECK(r.garding.has_value());
  CHECK_FALSE(r.viscosity.has_value());
  CHECK(r.kernel_diagnostics.empty());
  CHECK_FALSE(r.verdicts.has_value());
  CHECK_FALSE(r.consistent());
}

TEST_CASE("stage errors carry the stage name") {
  auto sc = *gallery_lookup("elliptic-constant-1d");
  sc.radius = 0.01;
  try {
    run_scenario(sc);
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.stage() == "lower_bound");
    CHECK(std::string(e.what()).find("radius below resolution") != std::string::npos);
  }
}
