#include <doctest.h>

#include <string>

#include "eemc/config.hpp"
#include "eemc/errors.hpp"

using namespace eemc;

namespace {

const char* kTable = R"(target: gaussian
covariance: [[0.96, 2.44], [2.44, 7.04]]
temperatures: [10, 5, 2, 1]
theta: 0.5
)";

std::string message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool mentions(const std::vector<std::string>& lines, const std::string& needle) {
  for (const auto& l : lines)
    if (l.find(needle) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("shipped configurations validate") {
  for (const char* name : {"table1_gaussian.yaml", "finite5.yaml", "oracle_demo.yaml"}) {
    RunConfig c = load_config(std::string(EEMC_CONFIG_DIR) + "/" + name);
    ValidationReport rep = validate_config(c);
    CHECK_MESSAGE(rep.ok(), name);
    CHECK(rep.warnings.empty());
    CHECK_NOTHROW(make_ladder(c));
  }
  RunConfig t = load_config(std::string(EEMC_CONFIG_DIR) + "/table1_gaussian.yaml");
  CHECK(t.temperatures == std::vector<double>{10, 5, 2, 1});
  CHECK(t.thetas == std::vector<double>{0.5});
  CHECK(t.iterations == 10000);
  CHECK(t.replications == 100);
  LadderConfig lc = make_ladder(t);
  CHECK(lc.ladder.level_count() == 4);
  for (std::size_t l = 1; l < 4; ++l) CHECK(lc.ladder.theta(l) == 0.5);
}

TEST_CASE("parse errors carry line and key") {
  std::string bad_value = message("target: gaussian\ntemperatures: [2, 1]\niterations: lots\n");
  CHECK(bad_value.find("iterations") != std::string::npos);
  CHECK(bad_value.find("line 3") != std::string::npos);

  std::string unknown = message("target: finite\nenergy: [1, 2]\n");
  CHECK(unknown.find("unknown key 'energy'") != std::string::npos);
  CHECK(unknown.find("line 2") != std::string::npos);

  std::string syntax = message("target: finite\ntemperatures: [2, 1\n");
  CHECK(syntax.find("parse error at line") != std::string::npos);

  CHECK(message("- just\n- a list\n").find("mapping") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/eemc.yaml"), ConfigError);
}

TEST_CASE("temperatures must strictly decrease to one") {
  RunConfig c = parse_config(kTable);
  c.temperatures = {10, 5, 5, 1};
  ValidationReport rep = validate_config(c);
  CHECK_FALSE(rep.ok());
  CHECK(mentions(rep.errors, "t_1 = 5 >= t_2 = 5"));
  c.temperatures = {10, 5, 2, 1.5};
  CHECK(mentions(validate_config(c).errors, "last temperature"));
  c.temperatures = {};
  CHECK_FALSE(validate_config(c).ok());
  c.temperatures = {10, 5, 2, 1};
  CHECK(validate_config(c).ok());
}

TEST_CASE("theta must lie in (0, 1]") {
  RunConfig c = parse_config(kTable);
  c.thetas = {0.5, 0.0, 0.5};
  ValidationReport rep = validate_config(c);
  CHECK_FALSE(rep.ok());
  CHECK(mentions(rep.errors, "theta_2"));
  c.thetas = {1.2};
  CHECK_FALSE(validate_config(c).ok());
  c.thetas = {0.5, 0.5};
  CHECK(mentions(validate_config(c).errors, "expected 3 theta values"));
  c.thetas = {1.0, 0.3, 0.9};
  CHECK(validate_config(c).ok());
  CHECK_THROWS_AS(make_ladder(parse_config(std::string(kTable) + "thetas_extra: 1\n")), ConfigError);
  RunConfig zero = parse_config("target: finite\nenergies: [0, 1]\ntemperatures: [2, 1]\ntheta: 0\n");
  CHECK_THROWS_AS(make_ladder(zero), ConfigError);
}

TEST_CASE("structural checks") {
  RunConfig c = parse_config(kTable);
  c.kernels = {"rwm", "hmc"};
  CHECK_FALSE(validate_config(c).ok());
  c = parse_config(kTable);
  c.burn_in = c.iterations;
  CHECK_FALSE(validate_config(c).ok());
  c = parse_config(kTable);
  c.covariance = {{1.0, 2.0}, {2.0, 1.0}};
  CHECK_FALSE(validate_config(c).ok());
  c = parse_config("target: finite\nenergies: [0, 1, 2]\ntemperatures: [1]\nfunction: [1, 0]\n");
  CHECK(mentions(validate_config(c).errors, "one value per state"));
  c = parse_config("target: uniform\ntemperatures: [1]\n");
  CHECK_FALSE(validate_config(c).ok());
  c = parse_config("target: finite\nenergies: [0, 1]\ntemperatures: [1]\nfinite_move_prob: 0\n");
  CHECK_FALSE(validate_config(c).ok());
}

TEST_CASE("drift bounds are reported and violations only warn") {
  RunConfig c = parse_config(std::string(kTable) + "drift_lambda: 0.5\nkappa: 0.05\n");
  ValidationReport rep = validate_config(c);
  CHECK(rep.ok());
  REQUIRE(rep.bounds.size() == 3);
  CHECK(rep.bounds[0].lower_bound == doctest::Approx(2.0 / 3));
  CHECK_FALSE(rep.bounds[0].satisfied);
  CHECK(rep.bounds[1].lower_bound == doctest::Approx(1.0 / 3.5));
  CHECK(rep.bounds[1].satisfied);
  CHECK(rep.bounds[2].lower_bound == doctest::Approx(1.0 / 5.5));
  CHECK(rep.bounds[2].satisfied);
  REQUIRE(rep.warnings.size() == 1);
  CHECK(rep.warnings[0].find("theta_1") != std::string::npos);

  RunConfig big = parse_config(std::string(kTable) + "drift_lambda: 0.5\nkappa: 0.2\n");
  ValidationReport r2 = validate_config(big);
  CHECK_FALSE(r2.ok());
  CHECK(mentions(r2.errors, "level 1"));
  RunConfig wrong = parse_config(std::string(kTable) + "drift_lambda: [0.5, 0.5]\nkappa: 0.05\n");
  CHECK_FALSE(validate_config(wrong).ok());
}

TEST_CASE("digest follows the configuration text") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  RunConfig a = parse_config(kTable);
  RunConfig b = parse_config(kTable);
  RunConfig c = parse_config(std::string(kTable) + "seed: 2\n");
  CHECK(a.digest.size() == 16);
  CHECK(a.digest == b.digest);
  CHECK(a.digest != c.digest);
}

TEST_CASE("hidden exact sampler and refresh scale") {
  RunConfig c = parse_config(std::string(kTable) + "exact_sampler: false\nir_refresh_scale: 2\n");
  LadderConfig lc = make_ladder(c);
  CHECK_FALSE(lc.target.has_exact_sampler());
  CHECK(lc.refresh_kernels.size() == 4);
}
