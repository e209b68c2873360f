#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "eemc/errors.hpp"
#include "eemc/state.hpp"

namespace eemc {

using LogWeightFn = std::function<double(const State&)>;

/// Append-only empirical measure of one chain's history. An empty reservoir
/// is the zero measure; n pushes give the uniform measure on the n states,
/// which is what the recursion mu_n = mu_{n-1} + (delta_x - mu_{n-1}) / n
/// produces from mu_0 = 0.
///
/// A reservoir may carry a fixed log-weight function. It then keeps running
/// prefix sums of the weights so that weighted draws cost O(log n).
class Reservoir {
 public:
  Reservoir() = default;
  explicit Reservoir(LogWeightFn log_weight);

  void push(const State& x);

  std::size_t size() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  const State& operator[](std::size_t i) const { return samples_[i]; }
  std::span<const State> samples() const { return samples_; }
  void reserve(std::size_t n);

  /// Each stored sample with probability 1/size(). Throws EmptyReservoir.
  const State& sample_uniform(Rng& rng) const;

  bool has_weight_index() const { return static_cast<bool>(log_weight_); }
  /// Weighted draw from the attached weight index (one uniform variate).
  const State& sample_indexed(Rng& rng) const;

  /// (1/n) sum f(X_k) in insertion order.
  template <class F>
  double empirical_mean(F&& f) const {
    if (samples_.empty()) throw EmptyReservoir();
    double sum = 0.0;
    for (const State& x : samples_) sum += f(x);
    return sum / static_cast<double>(samples_.size());
  }

  void write_csv(std::ostream& out) const;

 private:
  std::vector<State> samples_;
  LogWeightFn log_weight_;
  // cumulative_[k] = sum_{i<=k} exp(logw_i - reference_)
  std::vector<double> cumulative_;
  double reference_ = 0.0;
};

/// Draws sample k with probability proportional to exp(log_weight(X_k)),
/// recomputing the normalization (max-shifted) on every call. Throws
/// EmptyReservoir or NonFiniteWeight.
const State& sample_weighted(const Reservoir& reservoir, const LogWeightFn& log_weight, Rng& rng);

/// Probability vector of the empirical measure of a finite-state reservoir.
Eigen::VectorXd empirical_distribution(const Reservoir& reservoir, std::size_t state_count);

}  // namespace eemc
