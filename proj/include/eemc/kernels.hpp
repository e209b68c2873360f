#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <vector>

#include "eemc/reservoir.hpp"
#include "eemc/state.hpp"
#include "eemc/targets.hpp"

namespace eemc {

enum class Branch { local, exchange, resample };

const char* to_string(Branch b);

struct StepOutcome {
  State next;
  Branch branch = Branch::local;
  bool accepted = false;
  std::optional<double> log_accept_ratio;
};

/// Per-level kernel parameters: the local move P^(l) and the mixing
/// probability theta. Continuous targets move by a Gaussian random walk with
/// the given proposal covariance; finite targets move by one draw from a
/// row-stochastic base matrix whose stationary law is the tempered target.
class KernelConfig {
 public:
  static KernelConfig random_walk(const Eigen::MatrixXd& proposal_covariance, double theta = 1.0);
  static KernelConfig finite(const Eigen::MatrixXd& base_matrix, double theta = 1.0);

  bool is_finite() const { return finite_; }
  double theta() const { return theta_; }
  KernelConfig with_theta(double theta) const;

  const Eigen::MatrixXd& proposal_covariance() const { return proposal_covariance_; }
  const Eigen::MatrixXd& base_matrix() const { return base_matrix_; }

  /// x + z with z ~ N(0, proposal covariance).
  State propose(const State& x, Rng& rng) const;
  /// One draw from row `from` of the base matrix.
  std::size_t draw_base(std::size_t from, Rng& rng) const;

 private:
  KernelConfig() = default;

  bool finite_ = false;
  double theta_ = 1.0;
  Eigen::MatrixXd proposal_covariance_;
  Eigen::MatrixXd proposal_cholesky_;
  Eigen::MatrixXd base_matrix_;
  std::vector<std::vector<double>> cumulative_rows_;
};

/// Metropolis step for pi^(level). On finite targets this is one draw from
/// the configured base matrix.
StepOutcome rwm_step(const EnergyTarget& target, const TemperatureLadder& ladder, std::size_t level,
                     const State& x, const KernelConfig& config, Rng& rng);

/// Equi-energy step: with probability theta a local move, otherwise a uniform
/// draw Y from the hotter chain's history accepted with probability
/// min(1, r(Y)/r(x)). An empty reservoir forces the local branch.
StepOutcome ee_adaptive_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                             std::size_t level, const State& x, const Reservoir& hotter,
                             const KernelConfig& config, Rng& rng);

/// Importance-resampling step: with probability theta a local move,
/// otherwise Y is drawn from the hotter history with weights r(Y) and the
/// chain moves by one step of `refresh` (T_0) started at Y. Passing no
/// refresh kernel reuses `config`.
StepOutcome ir_adaptive_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                             std::size_t level, const State& x, const Reservoir& hotter,
                             const KernelConfig& config, Rng& rng,
                             const KernelConfig* refresh = nullptr);

/// Limiting EE kernel: theta P + (1 - theta) R, R the independence sampler
/// with proposal pi^(level-1). Needs an exact sampler.
StepOutcome limit_ee_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                          std::size_t level, const State& x, const KernelConfig& config, Rng& rng);

/// Limiting IR kernel: theta P + (1 - theta) pi^(level). Needs an exact sampler.
StepOutcome limit_ir_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                          std::size_t level, const State& x, const KernelConfig& config, Rng& rng);

/// Smallest theta allowed by the drift condition:
/// 1 / (1 + (1 - lambda) (gap / kappa - 1)), gap = 1/t_level - 1/t_prev.
/// Throws KappaTooLarge unless 0 < kappa < gap.
double theta_lower_bound(double lambda, double kappa, double t_level, double t_prev);

enum class MatrixKind { base, ee_limit, ir_limit, ee_frozen, ir_frozen };

/// Explicit transition matrix of a kernel on a finite target. The frozen
/// kinds replace pi^(level-1) by a fixed probability vector `measure`
/// (for ir_frozen, the resampling weights are measure(y) r(y)).
Eigen::MatrixXd finite_kernel_matrix(MatrixKind kind, const EnergyTarget& target,
                                     const TemperatureLadder& ladder, std::size_t level,
                                     const Eigen::MatrixXd& base_matrix, double theta);
Eigen::MatrixXd finite_kernel_matrix(MatrixKind kind, const EnergyTarget& target,
                                     const TemperatureLadder& ladder, std::size_t level,
                                     const Eigen::MatrixXd& base_matrix, double theta,
                                     const Eigen::VectorXd& measure);

/// Symmetric ring-walk proposal on n states: moves to each neighbour with
/// probability move_prob / 2, stays otherwise.
Eigen::MatrixXd ring_proposal(std::size_t state_count, double move_prob);

/// Metropolis matrix for the finite target tempered at `temperature` built
/// from a symmetric proposal matrix.
Eigen::MatrixXd metropolis_matrix(const EnergyTarget& target, double temperature,
                                  const Eigen::MatrixXd& proposal);

}  // namespace eemc
