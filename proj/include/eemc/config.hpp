#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "eemc/harness.hpp"
#include "eemc/ladder.hpp"

namespace eemc {

/// Flat run configuration. Keys (YAML syntax, one per line):
///
///   target: gaussian | finite
///   covariance: [[..], ..]        gaussian covariance
///   exact_sampler: true           gaussian only; false hides the exact sampler
///   energies: [..]                finite energies
///   finite_move_prob: 0.5         ring-walk proposal of the finite base kernels
///   temperatures: [t_0, .., 1]
///   theta: 0.5  or  thetas: [..]  mixing probabilities for levels 1..K
///   proposal_scale: 1.0           random-walk standard deviation
///   ir_refresh_scale: 1.0         optional separate scale for the IR T_0 move
///   kernel: ee                    sampler for `run`
///   kernels: [rwm, ir, ...]       samplers for `table1` (first is the baseline)
///   iterations, replications, seed, burn_in, jobs, output
///   include_initial_state: false
///   drift_lambda: [..], kappa: k  optional drift constants for `validate`
///   function: [..]                finite oracle test function (default 1{x=0})
///   oracle_replications, oracle_steps   simulation cross-check for `oracle`
struct RunConfig {
  std::string target_kind = "gaussian";
  std::vector<std::vector<double>> covariance;
  bool exact_sampler = true;
  std::vector<double> energies;
  double finite_move_prob = 0.5;
  std::vector<double> temperatures;
  std::vector<double> thetas;
  double proposal_scale = 1.0;
  std::optional<double> ir_refresh_scale;
  std::string kernel = "ee";
  std::vector<std::string> kernels{"rwm", "ir", "ir_limit", "ee", "ee_limit"};
  std::size_t iterations = 10000;
  std::size_t replications = 100;
  std::uint64_t seed = 1;
  std::size_t burn_in = 0;
  std::size_t jobs = 1;
  std::string output = "out";
  bool include_initial_state = false;
  std::vector<double> drift_lambda;
  std::vector<double> kappa;
  std::vector<double> function;
  std::size_t oracle_replications = 0;
  std::size_t oracle_steps = 100000;

  /// FNV-1a digest of the configuration text, as 16 hex digits.
  std::string digest;
};

/// Parses configuration text. Throws ConfigError with line/key context.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct ThetaBound {
  std::size_t level;
  double theta;
  double lower_bound;
  bool satisfied;
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::vector<ThetaBound> bounds;
  bool ok() const { return errors.empty(); }
};

/// Structural checks against every module precondition, plus theta lower
/// bounds when drift constants are given (violations are warnings).
ValidationReport validate_config(const RunConfig& config);

EnergyTarget make_target(const RunConfig& config);
/// Builds the ladder configuration; throws ConfigError if invalid.
LadderConfig make_ladder(const RunConfig& config);

std::string fnv1a_hex(const std::string& text);

}  // namespace eemc
