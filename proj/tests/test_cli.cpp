// Runs the eemc executable end to end in a scratch directory.

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "eemc/csv.hpp"

namespace fs = std::filesystem;
using namespace eemc;

namespace {

struct Result {
  int status;
  std::string out;
};

const fs::path& scratch() {
  static const fs::path dir = [] {
    fs::path p = fs::path(EEMC_SCRATCH_DIR) / "cli";
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

Result run(const std::string& args) {
  std::string cmd = std::string(EEMC_BIN) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  std::string out;
  char buf[4096];
  while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
  int raw = pclose(pipe);
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  fs::path p = scratch() / name;
  std::ofstream(p) << text;
  return p;
}

std::string config(const char* name) { return std::string(EEMC_CONFIG_DIR) + "/" + name; }

}  // namespace

TEST_CASE("validate exit status") {
  Result ok = run("validate " + config("table1_gaussian.yaml"));
  CHECK(ok.status == 0);
  CHECK(ok.out.find("valid (config digest") != std::string::npos);

  fs::path bad = write_config("bad_temps.yaml", "target: finite\nenergies: [0, 1]\ntemperatures: [1, 2, 1]\ntheta: 0.5\n");
  Result r = run("validate " + bad.string());
  CHECK(r.status == 1);
  CHECK(r.out.find("t_0 = 1 >= t_1 = 2") != std::string::npos);

  fs::path zero = write_config("zero_theta.yaml", "target: finite\nenergies: [0, 1]\ntemperatures: [2, 1]\ntheta: 0\n");
  CHECK(run("validate " + zero.string()).status == 1);

  fs::path drift = write_config("drift.yaml",
                                "target: finite\nenergies: [0, 1]\ntemperatures: [2, 1]\ntheta: 0.5\n"
                                "drift_lambda: 0.5\nkappa: 0.4\n");
  Result d = run("validate " + drift.string());
  CHECK(d.status == 0);
  CHECK(d.out.find("warning: theta_1") != std::string::npos);
  CHECK(d.out.find("not satisfied") != std::string::npos);

  fs::path garbled = write_config("garbled.yaml", "target: finite\nenergies: [0, 1\n");
  CHECK(run("validate " + garbled.string()).status == 1);
  CHECK(run("validate /nonexistent.yaml").status != 0);
  CHECK(run("").status != 0);
}

TEST_CASE("run is reproducible and shaped per level") {
  fs::path cfg = write_config("small.yaml",
                              "target: gaussian\ncovariance: [[0.96, 2.44], [2.44, 7.04]]\n"
                              "temperatures: [10, 5, 2, 1]\ntheta: 0.5\nkernel: ee\niterations: 500\nseed: 3\n");
  fs::path a = scratch() / "run_a", b = scratch() / "run_b";
  REQUIRE(run("run " + cfg.string() + " --out " + a.string()).status == 0);
  REQUIRE(run("run " + cfg.string() + " --out " + b.string()).status == 0);
  std::string ca = slurp(a / "trajectory.csv");
  CHECK(ca == slurp(b / "trajectory.csv"));
  CHECK_FALSE(fs::exists(a / "FAILED"));

  std::ifstream in(a / "trajectory.csv");
  CsvTable t = read_csv(in);
  REQUIRE(t.rows.size() == 4 * 500);
  CHECK(t.header == std::vector<std::string>{"iteration", "level", "x1", "x2", "branch", "accepted"});
  std::vector<int> per_level(4, 0);
  for (const auto& row : t.rows) ++per_level[std::stoi(row[t.column("level")])];
  for (int c : per_level) CHECK(c == 500);
  REQUIRE_FALSE(t.comments.empty());

  auto meta = nlohmann::json::parse(slurp(a / "metadata.json"));
  CHECK(meta["levels"] == 4);
  CHECK(t.comments[0].find(meta["config_digest"].get<std::string>()) != std::string::npos);

  fs::path c = scratch() / "run_c";
  REQUIRE(run("run " + cfg.string() + " --out " + c.string() + " --seed 4").status == 0);
  CHECK(slurp(c / "trajectory.csv") != ca);

  fs::path single = scratch() / "run_rwm";
  REQUIRE(run("run " + cfg.string() + " --kernel rwm --out " + single.string()).status == 0);
  std::ifstream sin(single / "trajectory.csv");
  CHECK(read_csv(sin).rows.size() == 500);
}

TEST_CASE("a missing exact sampler fails cleanly") {
  fs::path cfg = write_config("hidden.yaml",
                              "target: gaussian\ncovariance: [[1, 0], [0, 1]]\nexact_sampler: false\n"
                              "temperatures: [2, 1]\ntheta: 0.5\niterations: 100\n");
  fs::path out = scratch() / "hidden";
  Result r = run("run " + cfg.string() + " --kernel ee_limit --out " + out.string());
  CHECK(r.status == 1);
  CHECK(r.out.find("error:") != std::string::npos);
  CHECK(fs::exists(out / "FAILED"));
  CHECK_FALSE(fs::exists(out / "trajectory.csv"));

  // a later successful run clears the sentinel
  REQUIRE(run("run " + cfg.string() + " --kernel ee --out " + out.string()).status == 0);
  CHECK_FALSE(fs::exists(out / "FAILED"));
}

TEST_CASE("table1 writes a round-trippable MSE table") {
  fs::path cfg = write_config("t1.yaml",
                              "target: gaussian\ncovariance: [[0.96, 2.44], [2.44, 7.04]]\n"
                              "temperatures: [10, 5, 2, 1]\ntheta: 0.5\niterations: 300\nreplications: 3\n");
  fs::path out = scratch() / "t1";
  Result r = run("table1 " + cfg.string() + " --out " + out.string() + " --jobs 2");
  REQUIRE(r.status == 0);
  CHECK(r.out.find("Ratios") != std::string::npos);
  std::ifstream in(out / "table1.csv");
  CsvTable t = read_csv(in);
  CHECK(t.rows.size() == 10);
  CHECK(t.header.size() == 6);
  CHECK(fs::exists(out / "table1.txt"));

  fs::path one = write_config("t1_single.yaml",
                              "target: gaussian\ncovariance: [[0.96, 2.44], [2.44, 7.04]]\n"
                              "temperatures: [10, 5, 2, 1]\ntheta: 0.5\niterations: 200\nreplications: 1\n");
  Result s = run("table1 " + one.string() + " --out " + (scratch() / "t1_single").string());
  CHECK(s.status == 0);
  CHECK(s.out.find("unreliable") != std::string::npos);
  auto meta = nlohmann::json::parse(slurp(scratch() / "t1_single" / "metadata.json"));
  CHECK(meta["ratios_reliable"] == false);
}

TEST_CASE("oracle report") {
  // 3 states, flat energies, move probability 2/3: every row is uniform
  fs::path iid = write_config("iid.yaml",
                              "target: finite\nenergies: [0, 0, 0]\nfinite_move_prob: 0.6666666666666666\n"
                              "temperatures: [2, 1]\ntheta: 0.5\nfunction: [1, 0, 0]\n");
  fs::path out = scratch() / "oracle_iid";
  REQUIRE(run("oracle " + iid.string() + " --out " + out.string()).status == 0);
  auto j = nlohmann::json::parse(slurp(out / "variance_report.json"));
  CHECK(j["sigma_star_sq"].get<double>() == doctest::Approx(2.0 / 9).epsilon(1e-12));
  CHECK(j.contains("second_moment_limit"));
  CHECK_FALSE(j.contains("simulation"));

  fs::path one = write_config("theta1.yaml",
                              "target: finite\nenergies: [0, 1, 0.5, 2]\ntemperatures: [3, 1]\ntheta: 1\n");
  fs::path out1 = scratch() / "oracle_theta1";
  REQUIRE(run("oracle " + one.string() + " --out " + out1.string()).status == 0);
  auto j1 = nlohmann::json::parse(slurp(out1 / "variance_report.json"));
  CHECK(j1["clt_variance"].get<double>() == j1["sigma_star_sq"].get<double>());
  CHECK(j1["second_moment_limit"] == "not applicable");

  fs::path sim = write_config("sim.yaml",
                              "target: finite\nenergies: [0, 0, 0, 0, 0]\nfinite_move_prob: 0.2\n"
                              "temperatures: [2, 1]\ntheta: 0.5\noracle_replications: 50\noracle_steps: 500\n");
  fs::path out2 = scratch() / "oracle_sim";
  Result r = run("oracle " + sim.string() + " --out " + out2.string());
  REQUIRE(r.status == 0);
  CHECK(r.out.find("simulated variance") != std::string::npos);
  auto j2 = nlohmann::json::parse(slurp(out2 / "variance_report.json"));
  CHECK(j2["simulation"]["replications"] == 50);
  CHECK(j2["simulation"]["reference"] == "second_moment_limit");

  Result g = run("oracle " + config("table1_gaussian.yaml") + " --out " + (scratch() / "oracle_gauss").string());
  CHECK(g.status == 1);
  CHECK(fs::exists(scratch() / "oracle_gauss" / "FAILED"));
}
