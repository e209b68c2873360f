#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "eemc/ladder.hpp"

namespace eemc {

enum class SamplerKind { rwm, ir, ir_limit, ee, ee_limit };

const char* to_string(SamplerKind k);
/// Display name used in the MSE table ("RWM", "IR-MCMC", ...).
const char* display_name(SamplerKind k);
SamplerKind parse_sampler_kind(const std::string& name);

struct Estimand {
  std::string name;
  std::function<double(const State&)> f;
  double truth = 0.0;
};

/// E X_i and E X_i^2 for every coordinate of a zero-mean Gaussian target,
/// with truths read off the covariance.
std::vector<Estimand> gaussian_moment_estimands(const EnergyTarget& target);
/// E X and E X^2 of the state index at temperature 1, computed exactly.
std::vector<Estimand> finite_moment_estimands(const EnergyTarget& target);

struct HarnessOptions {
  std::size_t replications = 100;
  std::size_t iterations = 10000;
  std::size_t burn_in = 0;
  std::uint64_t seed = 1;
  std::size_t jobs = 1;
};

/// Ergodic averages of each estimand over iterations burn_in+1..iterations of
/// the coldest chain of one run.
std::vector<double> run_averages(const LadderConfig& config, SamplerKind kind,
                                 std::span<const Estimand> estimands, std::size_t iterations,
                                 std::size_t burn_in, std::uint64_t seed);

struct MseRow {
  SamplerKind kind;
  std::vector<double> mse;
  /// Replication standard error of each MSE.
  std::vector<double> mse_se;
  /// MSE of the first (baseline) sampler divided by this row's MSE.
  std::vector<double> ratio;
};

struct MseTable {
  std::vector<std::string> estimands;
  std::vector<MseRow> rows;
  std::size_t replications = 0;
  std::size_t iterations = 0;

  /// Ratios from a single replication carry no information.
  bool ratios_reliable() const { return replications >= 2; }
  const MseRow& row(SamplerKind kind) const;
};

/// Runs every sampler `replications` times. Replication r of every sampler
/// uses seed derive_seed(options.seed, r); results do not depend on `jobs`.
MseTable mse_harness(const LadderConfig& config, std::span<const SamplerKind> samplers,
                     std::span<const Estimand> estimands, const HarnessOptions& options);

struct ScaledSumStats {
  std::size_t replications = 0;
  std::size_t steps = 0;
  double mean = 0.0;
  /// Sample variance of n^{-1/2} S_n across replications.
  double variance = 0.0;
  /// Normal-theory standard error of `variance`: variance * sqrt(2 / (R - 1)).
  double standard_error = 0.0;
};

/// Runs `replications` independent ladders for `steps` iterations and
/// collects S_n / sqrt(n), S_n = sum_{k<=n} f(X_k^(level)). Replication r
/// uses seed derive_seed(seed, r).
ScaledSumStats simulate_scaled_sum(const LadderConfig& config, Scheme scheme, std::size_t level,
                                   const std::function<double(const State&)>& f, std::size_t steps,
                                   std::size_t replications, std::uint64_t seed,
                                   std::size_t jobs = 1);

/// CSV with one MSE row and one ratio row per sampler, one column per
/// estimand, full round-trip precision.
void write_mse_csv(const MseTable& table, std::ostream& out);
/// Aligned plain-text table, values rounded to 4 decimals.
std::string format_mse_table(const MseTable& table);

}  // namespace eemc
