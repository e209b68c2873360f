#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "eemc/state.hpp"

namespace eemc {

enum class TargetKind { continuous, finite };

/// Energy-based target family pi^(l)(x) ~ exp(-E(x)/t_l). Immutable after
/// construction. Normalizing constants are never formed; every density is
/// used through log differences.
class EnergyTarget {
 public:
  using EnergyFn = std::function<double(const State&)>;

  /// Zero-mean Gaussian N(0, covariance): E(x) = x' inv(covariance) x / 2.
  /// The exact tempered sampler draws from N(0, t * covariance).
  static EnergyTarget gaussian(const Eigen::MatrixXd& covariance);

  /// Finite state space {0, ..., n-1} with the given energies.
  static EnergyTarget finite(std::vector<double> energies);

  /// Continuous target given only through its energy; no exact sampler.
  static EnergyTarget custom(int dimension, EnergyFn energy);

  TargetKind kind() const { return kind_; }
  bool is_finite() const { return kind_ == TargetKind::finite; }
  /// Coordinates per state (1 for finite targets).
  int dimension() const { return dimension_; }
  std::size_t state_count() const { return energies_.size(); }
  std::span<const double> energies() const { return energies_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }

  bool valid_state(const State& x) const;
  /// E(x). Throws InvalidArgument for invalid states or non-finite energies.
  double energy(const State& x) const;

  bool has_exact_sampler() const { return has_exact_sampler_; }
  /// Draws exactly from the target tempered at `temperature`.
  State sample_tempered(double temperature, Rng& rng) const;

  /// Normalized tempered law of a finite target.
  Eigen::VectorXd tempered_distribution(double temperature) const;

  /// Copy of this target with the exact sampler disabled.
  EnergyTarget without_exact_sampler() const;

 private:
  EnergyTarget() = default;

  TargetKind kind_ = TargetKind::continuous;
  int dimension_ = 0;
  bool has_exact_sampler_ = false;
  std::vector<double> energies_;
  Eigen::MatrixXd covariance_;
  Eigen::MatrixXd precision_;
  Eigen::MatrixXd cholesky_;
  EnergyFn custom_energy_;
};

/// Temperatures t_0 > t_1 > ... > t_K = 1 and mixing probabilities
/// theta_1..theta_K. Level 0 is the hottest chain and has no theta.
class TemperatureLadder {
 public:
  TemperatureLadder(std::vector<double> temperatures, std::vector<double> thetas);

  std::size_t top_level() const { return temperatures_.size() - 1; }
  std::size_t level_count() const { return temperatures_.size(); }
  double temperature(std::size_t level) const;
  double theta(std::size_t level) const;
  std::span<const double> temperatures() const { return temperatures_; }
  std::span<const double> thetas() const { return thetas_; }

 private:
  std::vector<double> temperatures_;
  std::vector<double> thetas_;
};

double tempered_log_density(const EnergyTarget& target, const TemperatureLadder& ladder,
                            std::size_t level, const State& x);

/// log r^(l)(x) = E(x)/t_{l-1} - E(x)/t_l, for 1 <= level <= K.
double importance_log_weight(const EnergyTarget& target, const TemperatureLadder& ladder,
                             std::size_t level, const State& x);

}  // namespace eemc
