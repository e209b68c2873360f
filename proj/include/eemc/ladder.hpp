#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eemc/kernels.hpp"
#include "eemc/reservoir.hpp"
#include "eemc/state.hpp"
#include "eemc/targets.hpp"

namespace eemc {

enum class Scheme { ee, ir };
enum class SingleKind { rwm, ee_limit, ir_limit };

const char* to_string(Scheme s);
const char* to_string(SingleKind k);

/// Everything a ladder run needs besides the seed.
struct LadderConfig {
  EnergyTarget target;
  TemperatureLadder ladder;
  /// One kernel per level 0..K; kernels[l].theta() is theta_l for l >= 1.
  std::vector<KernelConfig> kernels;
  /// Optional T_0 kernels for the IR resample move, one per level; empty
  /// means T_0 = P^(l).
  std::vector<KernelConfig> refresh_kernels;
  /// Starting states per level; empty means the zero vector (continuous) or
  /// state 0 (finite).
  std::vector<State> initial_states;
  /// Push X_0 into the reservoirs before the first iteration.
  bool include_initial_state = false;
};

/// Default kernels: continuous levels use a Gaussian random walk with
/// covariance proposal_scale^2 * I; finite levels use the Metropolis matrix
/// of a ring-walk proposal with the given move probability.
LadderConfig make_ladder_config(EnergyTarget target, TemperatureLadder ladder,
                                double proposal_scale = 1.0, double finite_move_prob = 0.5);

/// Throws InvalidArgument if the config is internally inconsistent.
void validate(const LadderConfig& config);

State initial_state(const LadderConfig& config, std::size_t level);

/// Joint state of the K+1 coupled chains and the K reservoirs.
struct LadderState {
  std::vector<State> states;
  std::vector<Reservoir> reservoirs;
  std::size_t iteration = 0;
  std::vector<Rng> streams;
};

/// Level l draws from derive_stream(seed, l). IR reservoirs carry a weight
/// index for the next colder level's importance function.
LadderState init_ladder_state(const LadderConfig& config, Scheme scheme, std::uint64_t seed);

/// One iteration: level 0 moves by its base kernel, levels 1..K by the
/// scheme's adaptive kernel reading the reservoirs as of the previous
/// iteration, and only then are the new states of levels 0..K-1 pushed.
/// If `outcomes` is non-empty it receives one StepOutcome per level.
void ladder_step(LadderState& state, const LadderConfig& config, Scheme scheme,
                 std::span<StepOutcome> outcomes = {});

/// One step of a non-adaptive chain at `level`.
StepOutcome single_step(const LadderConfig& config, SingleKind kind, std::size_t level,
                        const State& x, Rng& rng);

struct LevelTrace {
  std::size_t level = 0;
  std::vector<State> states;
  std::vector<Branch> branches;
  std::vector<bool> accepted;
};

struct Trajectory {
  std::string sampler;
  std::uint64_t seed = 0;
  std::vector<LevelTrace> levels;

  std::size_t iterations() const { return levels.empty() ? 0 : levels.front().states.size(); }
};

Trajectory run_ladder(const LadderConfig& config, Scheme scheme, std::size_t iterations,
                      std::uint64_t seed);

/// A single chain at `level` (default: the coldest level K), drawing from
/// derive_stream(seed, level) so that level-0 runs reproduce the ladder's
/// level-0 trace.
Trajectory run_single(const LadderConfig& config, SingleKind kind, std::size_t iterations,
                      std::uint64_t seed, std::optional<std::size_t> level = std::nullopt);

}  // namespace eemc
