#include "eemc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "eemc/csv.hpp"
#include "eemc/errors.hpp"

namespace eemc {

const char* to_string(SamplerKind k) {
  switch (k) {
    case SamplerKind::rwm:
      return "rwm";
    case SamplerKind::ir:
      return "ir";
    case SamplerKind::ir_limit:
      return "ir_limit";
    case SamplerKind::ee:
      return "ee";
    case SamplerKind::ee_limit:
      return "ee_limit";
  }
  return "?";
}

const char* display_name(SamplerKind k) {
  switch (k) {
    case SamplerKind::rwm:
      return "RWM";
    case SamplerKind::ir:
      return "IR-MCMC";
    case SamplerKind::ir_limit:
      return "Limit IR-MCMC";
    case SamplerKind::ee:
      return "EE";
    case SamplerKind::ee_limit:
      return "Limit EE";
  }
  return "?";
}

SamplerKind parse_sampler_kind(const std::string& name) {
  for (SamplerKind k : {SamplerKind::rwm, SamplerKind::ir, SamplerKind::ir_limit, SamplerKind::ee,
                        SamplerKind::ee_limit})
    if (name == to_string(k)) return k;
  throw InvalidArgument("unknown sampler kind '" + name + "' (expected rwm|ee|ir|ee_limit|ir_limit)");
}

std::vector<Estimand> gaussian_moment_estimands(const EnergyTarget& target) {
  if (target.is_finite() || target.covariance().size() == 0)
    throw InvalidArgument("moment estimands need a Gaussian target");
  std::vector<Estimand> out;
  const int d = target.dimension();
  for (int i = 0; i < d; ++i)
    out.push_back({"E(X" + std::to_string(i + 1) + ")", [i](const State& x) { return x[i]; }, 0.0});
  for (int i = 0; i < d; ++i)
    out.push_back({"E(X" + std::to_string(i + 1) + "^2)", [i](const State& x) { return x[i] * x[i]; },
                   target.covariance()(i, i)});
  return out;
}

std::vector<Estimand> finite_moment_estimands(const EnergyTarget& target) {
  Eigen::VectorXd p = target.tempered_distribution(1.0);
  double m1 = 0.0, m2 = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    m1 += p[i] * static_cast<double>(i);
    m2 += p[i] * static_cast<double>(i * i);
  }
  return {{"E(X)", [](const State& x) { return x[0]; }, m1},
          {"E(X^2)", [](const State& x) { return x[0] * x[0]; }, m2}};
}

std::vector<double> run_averages(const LadderConfig& config, SamplerKind kind,
                                 std::span<const Estimand> estimands, std::size_t iterations,
                                 std::size_t burn_in, std::uint64_t seed) {
  if (iterations <= burn_in) throw InvalidArgument("iterations must exceed burn_in");
  std::vector<double> sums(estimands.size(), 0.0);
  auto accumulate = [&](std::size_t n, const State& x) {
    if (n < burn_in) return;
    for (std::size_t j = 0; j < estimands.size(); ++j) sums[j] += estimands[j].f(x);
  };

  if (kind == SamplerKind::ee || kind == SamplerKind::ir) {
    const Scheme scheme = kind == SamplerKind::ee ? Scheme::ee : Scheme::ir;
    LadderState state = init_ladder_state(config, scheme, seed);
    for (auto& r : state.reservoirs) r.reserve(iterations + 1);
    for (std::size_t n = 0; n < iterations; ++n) {
      ladder_step(state, config, scheme);
      accumulate(n, state.states.back());
    }
  } else {
    validate(config);
    const SingleKind single = kind == SamplerKind::rwm        ? SingleKind::rwm
                              : kind == SamplerKind::ee_limit ? SingleKind::ee_limit
                                                              : SingleKind::ir_limit;
    if (single != SingleKind::rwm && !config.target.has_exact_sampler())
      throw MissingExactSampler(std::string(to_string(kind)) + " needs an exact tempered sampler");
    const std::size_t level = config.ladder.top_level();
    Rng rng = derive_stream(seed, level);
    State x = initial_state(config, level);
    for (std::size_t n = 0; n < iterations; ++n) {
      x = single_step(config, single, level, x, rng).next;
      accumulate(n, x);
    }
  }
  for (double& s : sums) s /= static_cast<double>(iterations - burn_in);
  return sums;
}

const MseRow& MseTable::row(SamplerKind kind) const {
  for (const MseRow& r : rows)
    if (r.kind == kind) return r;
  throw InvalidArgument(std::string("no row for sampler ") + to_string(kind));
}

MseTable mse_harness(const LadderConfig& config, std::span<const SamplerKind> samplers,
                     std::span<const Estimand> estimands, const HarnessOptions& options) {
  if (samplers.empty()) throw InvalidArgument("no samplers requested");
  if (estimands.empty()) throw InvalidArgument("no estimands requested");
  if (options.replications < 1) throw InvalidArgument("replications must be at least 1");
  validate(config);

  const std::size_t n_samplers = samplers.size();
  const std::size_t reps = options.replications;
  const std::size_t n_tasks = n_samplers * reps;
  // errors[task][estimand] = average - truth
  std::vector<std::vector<double>> errors(n_tasks);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      std::size_t task = next.fetch_add(1);
      if (task >= n_tasks) return;
      const std::size_t s = task / reps;
      const std::size_t r = task % reps;
      try {
        std::vector<double> avg =
            run_averages(config, samplers[s], estimands, options.iterations, options.burn_in,
                         derive_seed(options.seed, r));
        for (std::size_t j = 0; j < estimands.size(); ++j) avg[j] -= estimands[j].truth;
        errors[task] = std::move(avg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_tasks);
        return;
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, n_tasks));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < jobs; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  MseTable table;
  table.replications = reps;
  table.iterations = options.iterations;
  for (const Estimand& e : estimands) table.estimands.push_back(e.name);
  for (std::size_t s = 0; s < n_samplers; ++s) {
    MseRow row{samplers[s], {}, {}, {}};
    for (std::size_t j = 0; j < estimands.size(); ++j) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t r = 0; r < reps; ++r) {
        double sq = errors[s * reps + r][j] * errors[s * reps + r][j];
        sum += sq;
        sum_sq += sq * sq;
      }
      double mse = sum / static_cast<double>(reps);
      double var = reps > 1 ? std::max(0.0, (sum_sq - static_cast<double>(reps) * mse * mse) /
                                                static_cast<double>(reps - 1))
                            : 0.0;
      row.mse.push_back(mse);
      row.mse_se.push_back(std::sqrt(var / static_cast<double>(reps)));
    }
    table.rows.push_back(std::move(row));
  }
  for (MseRow& row : table.rows)
    for (std::size_t j = 0; j < estimands.size(); ++j)
      row.ratio.push_back(table.rows.front().mse[j] / row.mse[j]);
  return table;
}

ScaledSumStats simulate_scaled_sum(const LadderConfig& config, Scheme scheme, std::size_t level,
                                   const std::function<double(const State&)>& f, std::size_t steps,
                                   std::size_t replications, std::uint64_t seed, std::size_t jobs) {
  if (replications < 2) throw InvalidArgument("need at least two replications");
  if (steps < 1) throw InvalidArgument("steps must be at least 1");
  if (level > config.ladder.top_level()) throw InvalidArgument("level out of range");
  validate(config);
  std::vector<double> scaled(replications);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (;;) {
      std::size_t r = next.fetch_add(1);
      if (r >= replications) return;
      try {
        LadderState state = init_ladder_state(config, scheme, derive_seed(seed, r));
        for (auto& res : state.reservoirs) res.reserve(steps + 1);
        double sum = 0.0;
        for (std::size_t n = 0; n < steps; ++n) {
          ladder_step(state, config, scheme);
          sum += f(state.states[level]);
        }
        scaled[r] = sum / std::sqrt(static_cast<double>(steps));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(replications);
        return;
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, replications));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ScaledSumStats st;
  st.replications = replications;
  st.steps = steps;
  for (double v : scaled) st.mean += v;
  st.mean /= static_cast<double>(replications);
  for (double v : scaled) st.variance += (v - st.mean) * (v - st.mean);
  st.variance /= static_cast<double>(replications - 1);
  st.standard_error = st.variance * std::sqrt(2.0 / static_cast<double>(replications - 1));
  return st;
}

void write_mse_csv(const MseTable& table, std::ostream& out) {
  out << "sampler,row";
  for (const std::string& e : table.estimands) out << ',' << e;
  out << '\n';
  for (const MseRow& row : table.rows) {
    for (const char* label : {"MSE", "Ratios"}) {
      const auto& values = std::string(label) == "MSE" ? row.mse : row.ratio;
      out << to_string(row.kind) << ',' << label;
      for (double v : values) out << ',' << format_real(v);
      out << '\n';
    }
  }
}

std::string format_mse_table(const MseTable& table) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << std::left << std::setw(16) << "" << std::setw(8) << "";
  for (const std::string& e : table.estimands) os << std::right << std::setw(12) << e;
  os << '\n';
  for (const MseRow& row : table.rows) {
    os << std::left << std::setw(16) << display_name(row.kind) << std::setw(8) << "MSE";
    for (double v : row.mse) os << std::right << std::setw(12) << v;
    os << '\n' << std::left << std::setw(16) << "" << std::setw(8) << "Ratios";
    for (double v : row.ratio) os << std::right << std::setw(12) << std::setprecision(2) << v;
    os << std::setprecision(4) << '\n';
  }
  os << "Based on " << table.replications << " replications of " << table.iterations
     << " iterations of each sampler.";
  if (!table.ratios_reliable()) os << " Ratios from a single replication are unreliable.";
  os << '\n';
  return os.str();
}

}  // namespace eemc
