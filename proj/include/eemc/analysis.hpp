#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <optional>
#include <span>

#include "eemc/targets.hpp"

namespace eemc {

/// Row-stochastic matrix together with its stationary law.
struct FiniteChainModel {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd stationary;

  /// Validates the matrix and solves for its stationary vector.
  static FiniteChainModel from_matrix(const Eigen::MatrixXd& matrix);
};

/// Solves pi' M = pi', sum(pi) = 1 directly. Throws SingularSystem for
/// reducible chains.
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& matrix);

/// Solution of U - M U = f - pi(f) normalized so that pi(U) = pi(f), i.e.
/// U = sum_k (M - 1 pi')^k f, obtained from (I - M + 1 pi') U = f.
Eigen::VectorXd poisson_solve(const FiniteChainModel& model, const Eigen::VectorXd& f);

/// Asymptotic variance of n^{-1/2} sum f(X_k) for the stationary chain,
/// pi(f^2) + 2 sum_{k>=1} pi(f M^k f) after centering f.
double asymptotic_variance(const FiniteChainModel& model, const Eigen::VectorXd& f);

/// Gamma(f, g) = pi( U_f U_g - (M U_f)(M U_g) ) with U_h the Poisson solution
/// of h for `model`. Symmetric, bilinear and positive semidefinite.
double gamma_covariance(const FiniteChainModel& model, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& g);

/// Two-level finite instance: level 0 runs base0 at t_0, level 1 runs the
/// EE kernel around base1 at t_1 = 1 with mixing probability theta.
struct TwoLevelInstance {
  EnergyTarget target;
  TemperatureLadder ladder;  // exactly two levels
  Eigen::MatrixXd base0;
  Eigen::MatrixXd base1;
  double theta = 0.5;

  FiniteChainModel model0() const;
  /// The limiting EE kernel theta P^(1) + (1 - theta) R^(1).
  FiniteChainModel limit_model() const;
  /// P^(0) = P^(1) and pi^(0) = pi^(1).
  bool levels_coincide() const;
};

/// H(x, y) = T(y, x, U) - R(x, U) with U the Poisson solution of the
/// pi^(1)-centered f for the limiting kernel. Rows are indexed by x, columns
/// by y; every row has zero pi^(0)-mean.
Eigen::MatrixXd ee_h_function(const TwoLevelInstance& instance, const FiniteChainModel& model0,
                              const FiniteChainModel& limit_model, const Eigen::VectorXd& f);

struct VarianceReport {
  double sigma_star_sq = 0.0;
  double gamma_gbar = 0.0;
  double clt_variance = 0.0;
  /// Only defined when both levels share kernel and stationary law.
  std::optional<double> second_moment_limit;
  Eigen::VectorXd gbar;
};

/// Asymptotic variance of the level-1 EE chain:
/// sigma_star^2 + 4 (1 - theta)^2 Gamma(gbar, gbar), plus the second-moment
/// limit with coefficient 2 when the two levels coincide.
VarianceReport ee_limit_clt_variance(const TwoLevelInstance& instance, const Eigen::VectorXd& f);

struct BatchMeansResult {
  double estimate = 0.0;
  double standard_error = 0.0;
};

/// Non-overlapping batch means estimate of the asymptotic (per-step)
/// variance of the sample mean. Each batch must hold at least 100 values;
/// trailing values that do not fill a batch are dropped.
BatchMeansResult batch_means_variance(std::span<const double> values, std::size_t batch_count);

}  // namespace eemc
