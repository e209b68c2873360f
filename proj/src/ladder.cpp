#include "eemc/ladder.hpp"

#include <cassert>
#include <string>

#include "eemc/errors.hpp"

namespace eemc {

const char* to_string(Scheme s) { return s == Scheme::ee ? "ee" : "ir"; }

const char* to_string(SingleKind k) {
  switch (k) {
    case SingleKind::rwm:
      return "rwm";
    case SingleKind::ee_limit:
      return "ee_limit";
    case SingleKind::ir_limit:
      return "ir_limit";
  }
  return "?";
}

LadderConfig make_ladder_config(EnergyTarget target, TemperatureLadder ladder, double proposal_scale,
                                double finite_move_prob) {
  if (!(proposal_scale > 0.0)) throw InvalidArgument("proposal_scale must be positive");
  std::vector<KernelConfig> kernels;
  for (std::size_t l = 0; l < ladder.level_count(); ++l) {
    double theta = l == 0 ? 1.0 : ladder.theta(l);
    if (target.is_finite()) {
      Eigen::MatrixXd base = metropolis_matrix(target, ladder.temperature(l),
                                               ring_proposal(target.state_count(), finite_move_prob));
      kernels.push_back(KernelConfig::finite(base, theta));
    } else {
      const int d = target.dimension();
      kernels.push_back(KernelConfig::random_walk(
          proposal_scale * proposal_scale * Eigen::MatrixXd::Identity(d, d), theta));
    }
  }
  return LadderConfig{std::move(target), std::move(ladder), std::move(kernels), {}, {}, false};
}

void validate(const LadderConfig& config) {
  const std::size_t levels = config.ladder.level_count();
  if (config.kernels.size() != levels)
    throw InvalidArgument("expected one kernel per level (" + std::to_string(levels) + "), got " +
                          std::to_string(config.kernels.size()));
  if (!config.refresh_kernels.empty() && config.refresh_kernels.size() != levels)
    throw InvalidArgument("refresh kernels must be absent or given for every level");
  for (std::size_t l = 0; l < levels; ++l) {
    const KernelConfig& k = config.kernels[l];
    if (k.is_finite() != config.target.is_finite())
      throw InvalidArgument("kernel " + std::to_string(l) + " does not match the target kind");
    if (k.is_finite() &&
        static_cast<std::size_t>(k.base_matrix().rows()) != config.target.state_count())
      throw InvalidArgument("base matrix of level " + std::to_string(l) + " has the wrong size");
    if (!k.is_finite() && k.proposal_covariance().rows() != config.target.dimension())
      throw InvalidArgument("proposal of level " + std::to_string(l) + " has the wrong dimension");
  }
  if (!config.initial_states.empty()) {
    if (config.initial_states.size() != levels)
      throw InvalidArgument("initial states must be absent or given for every level");
    for (const State& s : config.initial_states)
      if (!config.target.valid_state(s)) throw InvalidArgument("invalid initial state");
  }
}

State initial_state(const LadderConfig& config, std::size_t level) {
  if (!config.initial_states.empty()) return config.initial_states.at(level);
  return State::Zero(config.target.dimension());
}

LadderState init_ladder_state(const LadderConfig& config, Scheme scheme, std::uint64_t seed) {
  validate(config);
  LadderState s;
  const std::size_t levels = config.ladder.level_count();
  for (std::size_t l = 0; l < levels; ++l) {
    s.states.push_back(initial_state(config, l));
    s.streams.push_back(derive_stream(seed, l));
  }
  for (std::size_t l = 0; l + 1 < levels; ++l) {
    if (scheme == Scheme::ir) {
      // Weight index for level l+1's importance function r^(l+1).
      s.reservoirs.emplace_back([target = config.target, ladder = config.ladder, l](const State& x) {
        return importance_log_weight(target, ladder, l + 1, x);
      });
    } else {
      s.reservoirs.emplace_back();
    }
    if (config.include_initial_state) s.reservoirs.back().push(s.states[l]);
  }
  return s;
}

void ladder_step(LadderState& state, const LadderConfig& config, Scheme scheme,
                 std::span<StepOutcome> outcomes) {
  const std::size_t levels = config.ladder.level_count();
  const bool record = !outcomes.empty();
  if (record && outcomes.size() != levels)
    throw InvalidArgument("outcome buffer must hold one entry per level");

  StepOutcome out = rwm_step(config.target, config.ladder, 0, state.states[0], config.kernels[0],
                             state.streams[0]);
  if (record) outcomes[0] = out;
  // Level 0 can be committed at once: levels >= 1 read only the reservoirs.
  State new_level0 = std::move(out.next);

  for (std::size_t l = 1; l < levels; ++l) {
    const Reservoir& hotter = state.reservoirs[l - 1];
    // Timing contract: the hotter reservoir holds X_1..X_{n-1} at time n.
    assert(hotter.size() == state.iteration + (config.include_initial_state ? 1 : 0));
    const KernelConfig* refresh =
        config.refresh_kernels.empty() ? nullptr : &config.refresh_kernels[l];
    StepOutcome o =
        scheme == Scheme::ee
            ? ee_adaptive_step(config.target, config.ladder, l, state.states[l], hotter,
                               config.kernels[l], state.streams[l])
            : ir_adaptive_step(config.target, config.ladder, l, state.states[l], hotter,
                               config.kernels[l], state.streams[l], refresh);
    state.states[l] = o.next;
    if (record) outcomes[l] = std::move(o);
  }
  state.states[0] = std::move(new_level0);

  for (std::size_t l = 0; l + 1 < levels; ++l) state.reservoirs[l].push(state.states[l]);
  ++state.iteration;
}

StepOutcome single_step(const LadderConfig& config, SingleKind kind, std::size_t level,
                        const State& x, Rng& rng) {
  const KernelConfig& k = config.kernels.at(level);
  switch (kind) {
    case SingleKind::rwm:
      return rwm_step(config.target, config.ladder, level, x, k, rng);
    case SingleKind::ee_limit:
      return limit_ee_step(config.target, config.ladder, level, x, k, rng);
    case SingleKind::ir_limit:
      return limit_ir_step(config.target, config.ladder, level, x, k, rng);
  }
  throw InvalidArgument("unknown single-chain kind");
}

namespace {

void record(LevelTrace& trace, const StepOutcome& o) {
  trace.states.push_back(o.next);
  trace.branches.push_back(o.branch);
  trace.accepted.push_back(o.accepted);
}

}  // namespace

Trajectory run_ladder(const LadderConfig& config, Scheme scheme, std::size_t iterations,
                      std::uint64_t seed) {
  if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
  LadderState state = init_ladder_state(config, scheme, seed);
  const std::size_t levels = config.ladder.level_count();
  for (auto& r : state.reservoirs) r.reserve(iterations + 1);

  Trajectory traj;
  traj.sampler = to_string(scheme);
  traj.seed = seed;
  traj.levels.resize(levels);
  for (std::size_t l = 0; l < levels; ++l) {
    traj.levels[l].level = l;
    traj.levels[l].states.reserve(iterations);
  }
  std::vector<StepOutcome> outcomes(levels);
  for (std::size_t n = 0; n < iterations; ++n) {
    ladder_step(state, config, scheme, outcomes);
    for (std::size_t l = 0; l < levels; ++l) record(traj.levels[l], outcomes[l]);
  }
  return traj;
}

Trajectory run_single(const LadderConfig& config, SingleKind kind, std::size_t iterations,
                      std::uint64_t seed, std::optional<std::size_t> level) {
  if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
  validate(config);
  const std::size_t lvl = level.value_or(config.ladder.top_level());
  if (lvl > config.ladder.top_level()) throw InvalidArgument("level out of range");
  if (kind != SingleKind::rwm && !config.target.has_exact_sampler())
    throw MissingExactSampler(std::string(to_string(kind)) +
                              " needs an exact tempered sampler, which this target lacks");
  if (kind == SingleKind::ee_limit && lvl == 0)
    throw InvalidArgument("ee_limit needs a hotter level, so level must be >= 1");

  Rng rng = derive_stream(seed, lvl);
  Trajectory traj;
  traj.sampler = to_string(kind);
  traj.seed = seed;
  traj.levels.resize(1);
  traj.levels[0].level = lvl;
  traj.levels[0].states.reserve(iterations);
  State x = initial_state(config, lvl);
  for (std::size_t n = 0; n < iterations; ++n) {
    StepOutcome o = single_step(config, kind, lvl, x, rng);
    x = o.next;
    record(traj.levels[0], o);
  }
  return traj;
}

}  // namespace eemc
