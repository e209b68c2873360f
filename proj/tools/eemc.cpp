// eemc: validation, single runs, the replicated MSE table and the finite-state
// variance oracle, all driven by one configuration file.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "eemc/analysis.hpp"
#include "eemc/config.hpp"
#include "eemc/csv.hpp"
#include "eemc/errors.hpp"
#include "eemc/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace eemc;

namespace {

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
};

RunConfig load_with_overrides(const std::string& path, const Overrides& o) {
  RunConfig c = load_config(path);
  if (o.seed) c.seed = *o.seed;
  if (o.out) c.output = *o.out;
  if (o.jobs) c.jobs = *o.jobs;
  return c;
}

std::string timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  out << j.dump(2) << '\n';
}

json metadata(const RunConfig& c, const std::string& command) {
  return json{{"command", command},       {"config_digest", c.digest}, {"seed", c.seed},
              {"iterations", c.iterations}, {"burn_in", c.burn_in},     {"replications", c.replications},
              {"jobs", c.jobs},           {"created", timestamp()}};
}

// Runs `body` inside the output directory contract: a FAILED sentinel marks
// partial output, and the exit status is non-zero on any error.
int guarded(const RunConfig& c, const std::function<void(const fs::path&)>& body) {
  fs::path out(c.output);
  try {
    fs::create_directories(out);
    fs::remove(out / "FAILED");
    body(out);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    std::error_code ec;
    if (fs::is_directory(out, ec)) {
      std::ofstream sentinel(out / "FAILED");
      sentinel << e.what() << '\n';
    }
    return 1;
  }
}

int cmd_validate(const std::string& path) {
  RunConfig c;
  try {
    c = load_config(path);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  ValidationReport rep = validate_config(c);
  for (const ThetaBound& b : rep.bounds)
    std::cout << "level " << b.level << ": theta = " << format_real(b.theta)
              << ", drift lower bound = " << format_real(b.lower_bound)
              << (b.satisfied ? " (ok)" : " (not satisfied)") << '\n';
  for (const std::string& w : rep.warnings) std::cout << "warning: " << w << '\n';
  for (const std::string& e : rep.errors) std::cerr << "error: " << e << '\n';
  std::cout << (rep.ok() ? "valid" : "invalid") << " (config digest " << c.digest << ")\n";
  return rep.ok() ? 0 : 1;
}

int cmd_run(const std::string& path, const Overrides& o, const std::optional<std::string>& kernel) {
  RunConfig c;
  try {
    c = load_with_overrides(path, o);
    if (kernel) c.kernel = *kernel;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return guarded(c, [&](const fs::path& out) {
    LadderConfig lc = make_ladder(c);
    SamplerKind kind = parse_sampler_kind(c.kernel);
    Trajectory traj;
    switch (kind) {
      case SamplerKind::ee:
        traj = run_ladder(lc, Scheme::ee, c.iterations, c.seed);
        break;
      case SamplerKind::ir:
        traj = run_ladder(lc, Scheme::ir, c.iterations, c.seed);
        break;
      case SamplerKind::rwm:
        traj = run_single(lc, SingleKind::rwm, c.iterations, c.seed);
        break;
      case SamplerKind::ee_limit:
        traj = run_single(lc, SingleKind::ee_limit, c.iterations, c.seed);
        break;
      case SamplerKind::ir_limit:
        traj = run_single(lc, SingleKind::ir_limit, c.iterations, c.seed);
        break;
    }
    {
      std::ofstream csv(out / "trajectory.csv");
      write_trajectory_csv(traj, c.digest, csv);
    }
    json meta = metadata(c, "run");
    meta["sampler"] = c.kernel;
    meta["levels"] = traj.levels.size();
    write_json(out / "metadata.json", meta);
    std::cout << "wrote " << traj.iterations() << " iterations x " << traj.levels.size()
              << " level(s) to " << (out / "trajectory.csv").string() << '\n';
  });
}

int cmd_table1(const std::string& path, const Overrides& o) {
  RunConfig c;
  try {
    c = load_with_overrides(path, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return guarded(c, [&](const fs::path& out) {
    LadderConfig lc = make_ladder(c);
    std::vector<SamplerKind> samplers;
    for (const std::string& k : c.kernels) samplers.push_back(parse_sampler_kind(k));
    std::vector<Estimand> estimands =
        lc.target.is_finite() ? finite_moment_estimands(lc.target) : gaussian_moment_estimands(lc.target);
    HarnessOptions opts{c.replications, c.iterations, c.burn_in, c.seed, c.jobs};
    MseTable table = mse_harness(lc, samplers, estimands, opts);
    {
      std::ofstream csv(out / "table1.csv");
      csv << "# config_digest=" << c.digest << '\n';
      write_mse_csv(table, csv);
    }
    std::string text = format_mse_table(table);
    {
      std::ofstream txt(out / "table1.txt");
      txt << text;
    }
    json meta = metadata(c, "table1");
    meta["samplers"] = c.kernels;
    meta["ratios_reliable"] = table.ratios_reliable();
    write_json(out / "metadata.json", meta);
    std::cout << text;
  });
}

int cmd_oracle(const std::string& path, const Overrides& o, bool simulate) {
  RunConfig c;
  try {
    c = load_with_overrides(path, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return guarded(c, [&](const fs::path& out) {
    if (c.target_kind != "finite") throw ConfigError("oracle needs a finite target");
    if (c.temperatures.size() != 2) throw ConfigError("oracle needs exactly two temperatures");
    LadderConfig lc = make_ladder(c);
    TwoLevelInstance inst{lc.target, lc.ladder, lc.kernels[0].base_matrix(),
                          lc.kernels[1].base_matrix(), lc.ladder.theta(1)};
    const auto n = static_cast<Eigen::Index>(lc.target.state_count());
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n);
    if (c.function.empty()) {
      f[0] = 1.0;
    } else {
      for (Eigen::Index i = 0; i < n; ++i) f[i] = c.function[static_cast<std::size_t>(i)];
    }
    VarianceReport rep = ee_limit_clt_variance(inst, f);

    json j;
    j["config_digest"] = c.digest;
    j["theta"] = inst.theta;
    j["function"] = std::vector<double>(f.data(), f.data() + f.size());
    j["sigma_star_sq"] = rep.sigma_star_sq;
    j["gamma_gbar"] = rep.gamma_gbar;
    j["clt_variance"] = rep.clt_variance;
    j["second_moment_limit"] =
        rep.second_moment_limit ? json(*rep.second_moment_limit) : json("not applicable");
    j["gbar"] = std::vector<double>(rep.gbar.data(), rep.gbar.data() + rep.gbar.size());

    std::cout << "sigma_star_sq       " << format_real(rep.sigma_star_sq) << '\n'
              << "gamma_gbar          " << format_real(rep.gamma_gbar) << '\n'
              << "clt_variance        " << format_real(rep.clt_variance) << '\n'
              << "second_moment_limit "
              << (rep.second_moment_limit ? format_real(*rep.second_moment_limit) : "not applicable")
              << '\n';

    const std::size_t reps = c.oracle_replications;
    if (simulate || reps > 0) {
      const std::size_t r = reps > 0 ? reps : 2000;
      Eigen::VectorXd pi1 = lc.target.tempered_distribution(1.0);
      Eigen::VectorXd fc = f.array() - pi1.dot(f);
      ScaledSumStats st = simulate_scaled_sum(
          lc, Scheme::ee, 1, [&fc](const State& x) { return fc[static_cast<Eigen::Index>(state_index(x))]; },
          c.oracle_steps, r, c.seed, c.jobs);
      json sim{{"replications", st.replications},
               {"steps", st.steps},
               {"variance", st.variance},
               {"standard_error", st.standard_error},
               {"mean", st.mean}};
      double reference = rep.second_moment_limit.value_or(rep.clt_variance);
      sim["z_score"] = (st.variance - reference) / st.standard_error;
      sim["reference"] = rep.second_moment_limit ? "second_moment_limit" : "clt_variance";
      j["simulation"] = sim;
      std::cout << "simulated variance  " << format_real(st.variance) << " +/- "
                << format_real(st.standard_error) << " (" << r << " replications of "
                << c.oracle_steps << " steps)\n";
    }
    write_json(out / "variance_report.json", j);
    json meta = metadata(c, "oracle");
    write_json(out / "metadata.json", meta);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equi-energy and importance-resampling samplers with an exact variance oracle"};
  app.require_subcommand(1);

  Overrides o;
  std::string config_path;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the master seed");
    sub->add_option("--out", o.out, "Override the output directory");
    sub->add_option("--jobs", o.jobs, "Maximum number of worker threads")->check(CLI::PositiveNumber);
  };

  auto* validate = app.add_subcommand("validate", "Check a configuration and report theta bounds");
  validate->add_option("config", config_path, "Configuration file")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "Run one sampler and write its trajectory");
  add_common(run);
  std::optional<std::string> kernel;
  run->add_option("--kernel", kernel, "Sampler kind: rwm|ee|ir|ee_limit|ir_limit");

  auto* table1 = app.add_subcommand("table1", "Replicated MSE comparison of all samplers");
  add_common(table1);

  auto* oracle = app.add_subcommand("oracle", "Exact asymptotic-variance report for a finite instance");
  add_common(oracle);
  bool simulate = false;
  oracle->add_flag("--simulate", simulate, "Add the replicated simulation cross-check");

  CLI11_PARSE(app, argc, argv);

  if (*validate) return cmd_validate(config_path);
  if (*run) return cmd_run(config_path, o, kernel);
  if (*table1) return cmd_table1(config_path, o);
  if (*oracle) return cmd_oracle(config_path, o, simulate);
  return 1;
}
