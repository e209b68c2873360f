#include "eemc/reservoir.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>

#include "eemc/errors.hpp"

namespace eemc {

namespace {

// Rescale the prefix sums once a new weight exceeds the reference by this
// much in log space; exp(500) is far from overflow.
constexpr double kRescaleThreshold = 500.0;

}  // namespace

Reservoir::Reservoir(LogWeightFn log_weight) : log_weight_(std::move(log_weight)) {}

void Reservoir::reserve(std::size_t n) {
  samples_.reserve(n);
  if (log_weight_) cumulative_.reserve(n);
}

void Reservoir::push(const State& x) {
  if (log_weight_) {
    double lw = log_weight_(x);
    if (!std::isfinite(lw)) throw NonFiniteWeight("non-finite log weight for pushed state");
    if (cumulative_.empty()) {
      reference_ = lw;
    } else if (lw - reference_ > kRescaleThreshold) {
      double factor = std::exp(reference_ - lw);
      for (double& c : cumulative_) c *= factor;
      reference_ = lw;
    }
    double previous = cumulative_.empty() ? 0.0 : cumulative_.back();
    cumulative_.push_back(previous + std::exp(lw - reference_));
  }
  samples_.push_back(x);
}

const State& Reservoir::sample_uniform(Rng& rng) const {
  if (samples_.empty()) throw EmptyReservoir();
  std::uniform_int_distribution<std::size_t> pick(0, samples_.size() - 1);
  return samples_[pick(rng)];
}

const State& Reservoir::sample_indexed(Rng& rng) const {
  if (samples_.empty()) throw EmptyReservoir();
  if (!log_weight_) throw InvalidArgument("reservoir carries no weight index");
  double target = uniform01(rng) * cumulative_.back();
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  if (it == cumulative_.end()) --it;
  return samples_[static_cast<std::size_t>(it - cumulative_.begin())];
}

void Reservoir::write_csv(std::ostream& out) const {
  if (samples_.empty()) return;
  out << "index";
  for (Eigen::Index j = 0; j < samples_.front().size(); ++j) out << ",x" << j + 1;
  out << '\n';
  char buf[32];
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    out << i;
    for (Eigen::Index j = 0; j < samples_[i].size(); ++j) {
      auto res = std::to_chars(buf, buf + sizeof buf, samples_[i][j]);
      out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    out << '\n';
  }
}

const State& sample_weighted(const Reservoir& reservoir, const LogWeightFn& log_weight, Rng& rng) {
  if (reservoir.empty()) throw EmptyReservoir();
  const std::size_t n = reservoir.size();
  std::vector<double> lw(n);
  double max_lw = -INFINITY;
  for (std::size_t k = 0; k < n; ++k) {
    lw[k] = log_weight(reservoir[k]);
    if (!std::isfinite(lw[k])) throw NonFiniteWeight("non-finite log weight in reservoir");
    max_lw = std::max(max_lw, lw[k]);
  }
  double total = 0.0;
  for (double& w : lw) {
    w = std::exp(w - max_lw);
    total += w;
  }
  double target = uniform01(rng) * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    acc += lw[k];
    if (target < acc) return reservoir[k];
  }
  // Rounding can leave target == total; fall back to the last positive weight.
  for (std::size_t k = n; k-- > 0;)
    if (lw[k] > 0.0) return reservoir[k];
  return reservoir[n - 1];
}

Eigen::VectorXd empirical_distribution(const Reservoir& reservoir, std::size_t state_count) {
  if (reservoir.empty()) throw EmptyReservoir();
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(state_count));
  for (const State& x : reservoir.samples()) {
    std::size_t i = state_index(x);
    if (i >= state_count) throw InvalidArgument("reservoir state outside the finite state space");
    p[static_cast<Eigen::Index>(i)] += 1.0;
  }
  return p / static_cast<double>(reservoir.size());
}

}  // namespace eemc
