#include "eemc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eemc/errors.hpp"

namespace eemc {

namespace {

constexpr double kRowSumTolerance = 1e-12;

// Consumes exactly one uniform variate.
bool metropolis_accept(double log_ratio, Rng& rng) {
  double u = uniform01(rng);
  return log_ratio >= 0.0 || u < std::exp(log_ratio);
}

void check_level(const TemperatureLadder& ladder, std::size_t level, bool adaptive) {
  if (level > ladder.top_level()) throw InvalidArgument("level out of range");
  if (adaptive && level == 0) throw InvalidArgument("adaptive kernels require level >= 1");
}

void check_state(const EnergyTarget& target, const State& x) {
  if (x.size() != target.dimension())
    throw InvalidArgument("state dimension " + std::to_string(x.size()) +
                          " does not match target dimension " +
                          std::to_string(target.dimension()));
}

void check_base_matrix(const Eigen::MatrixXd& m, std::size_t states) {
  const auto n = static_cast<Eigen::Index>(states);
  if (m.rows() != n || m.cols() != n)
    throw InvalidArgument("base matrix must be " + std::to_string(states) + "x" +
                          std::to_string(states));
  if (!m.allFinite() || m.minCoeff() < 0.0)
    throw InvalidArgument("base matrix entries must be finite and non-negative");
  for (Eigen::Index i = 0; i < n; ++i)
    if (std::abs(m.row(i).sum() - 1.0) > kRowSumTolerance)
      throw InvalidArgument("base matrix row " + std::to_string(i) + " does not sum to 1");
}

// min(1, r(y)/r(x)) for all (x, y) at the given level.
Eigen::MatrixXd exchange_acceptance(const EnergyTarget& target, const TemperatureLadder& ladder,
                                    std::size_t level) {
  const auto n = static_cast<Eigen::Index>(target.state_count());
  Eigen::VectorXd lw(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lw[i] = importance_log_weight(target, ladder, level, finite_state(static_cast<std::size_t>(i)));
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) a(x, y) = std::exp(std::min(0.0, lw[y] - lw[x]));
  return a;
}

// Independence-MH kernel with proposal `proposal` and acceptance `accept`.
Eigen::MatrixXd exchange_kernel(const Eigen::VectorXd& proposal, const Eigen::MatrixXd& accept) {
  const Eigen::Index n = proposal.size();
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double moved = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      r(x, y) = proposal[y] * accept(x, y);
      moved += r(x, y);
    }
    r(x, x) = 1.0 - moved;
  }
  return r;
}

}  // namespace

const char* to_string(Branch b) {
  switch (b) {
    case Branch::local:
      return "local";
    case Branch::exchange:
      return "exchange";
    case Branch::resample:
      return "resample";
  }
  return "?";
}

KernelConfig KernelConfig::random_walk(const Eigen::MatrixXd& proposal_covariance, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  if (proposal_covariance.rows() != proposal_covariance.cols() || proposal_covariance.rows() == 0 ||
      proposal_covariance.rows() > kMaxDimension)
    throw InvalidArgument("proposal covariance must be square with dimension 1.." +
                          std::to_string(kMaxDimension));
  Eigen::LLT<Eigen::MatrixXd> llt(proposal_covariance);
  if (!proposal_covariance.allFinite() || llt.info() != Eigen::Success ||
      !proposal_covariance.isApprox(proposal_covariance.transpose()))
    throw InvalidArgument("proposal covariance must be symmetric positive definite");
  KernelConfig c;
  c.theta_ = theta;
  c.proposal_covariance_ = proposal_covariance;
  c.proposal_cholesky_ = llt.matrixL();
  return c;
}

KernelConfig KernelConfig::finite(const Eigen::MatrixXd& base_matrix, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  check_base_matrix(base_matrix, static_cast<std::size_t>(base_matrix.rows()));
  KernelConfig c;
  c.finite_ = true;
  c.theta_ = theta;
  c.base_matrix_ = base_matrix;
  c.cumulative_rows_.resize(static_cast<std::size_t>(base_matrix.rows()));
  for (Eigen::Index i = 0; i < base_matrix.rows(); ++i) {
    auto& row = c.cumulative_rows_[static_cast<std::size_t>(i)];
    double acc = 0.0;
    for (Eigen::Index j = 0; j < base_matrix.cols(); ++j) {
      acc += base_matrix(i, j);
      row.push_back(acc);
    }
  }
  return c;
}

KernelConfig KernelConfig::with_theta(double theta) const {
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  KernelConfig c = *this;
  c.theta_ = theta;
  return c;
}

State KernelConfig::propose(const State& x, Rng& rng) const {
  const auto d = static_cast<int>(proposal_cholesky_.rows());
  double z[kMaxDimension];
  for (int i = 0; i < d; ++i) z[i] = standard_normal(rng);
  State y = x;
  for (int i = 0; i < d; ++i) {
    double step = 0.0;
    for (int j = 0; j <= i; ++j) step += proposal_cholesky_(i, j) * z[j];
    y[i] += step;
  }
  return y;
}

std::size_t KernelConfig::draw_base(std::size_t from, Rng& rng) const {
  const auto& row = cumulative_rows_.at(from);
  double u = uniform01(rng);
  for (std::size_t j = 0; j < row.size(); ++j)
    if (u < row[j]) return j;
  // u can exceed a row total that rounds just below 1.
  for (std::size_t j = row.size(); j-- > 0;)
    if (base_matrix_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(j)) > 0.0) return j;
  return from;
}

StepOutcome rwm_step(const EnergyTarget& target, const TemperatureLadder& ladder, std::size_t level,
                     const State& x, const KernelConfig& config, Rng& rng) {
  check_level(ladder, level, false);
  check_state(target, x);
  if (target.is_finite() != config.is_finite())
    throw InvalidArgument("kernel config does not match the target kind");
  StepOutcome out;
  out.branch = Branch::local;
  if (target.is_finite()) {
    if (static_cast<std::size_t>(config.base_matrix().rows()) != target.state_count())
      throw InvalidArgument("base matrix size does not match the number of states");
    std::size_t next = config.draw_base(state_index(x), rng);
    out.next = finite_state(next);
    out.accepted = next != state_index(x);
    return out;
  }
  if (config.proposal_covariance().rows() != target.dimension())
    throw InvalidArgument("proposal dimension does not match target dimension");
  State y = config.propose(x, rng);
  const double t = ladder.temperature(level);
  double log_ratio = (target.energy(x) - target.energy(y)) / t;
  out.log_accept_ratio = log_ratio;
  out.accepted = metropolis_accept(log_ratio, rng);
  out.next = out.accepted ? y : x;
  return out;
}

StepOutcome ee_adaptive_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                             std::size_t level, const State& x, const Reservoir& hotter,
                             const KernelConfig& config, Rng& rng) {
  check_level(ladder, level, true);
  double u = uniform01(rng);
  if (hotter.empty() || u < config.theta()) return rwm_step(target, ladder, level, x, config, rng);
  check_state(target, x);
  const State& y = hotter.sample_uniform(rng);
  double log_ratio =
      importance_log_weight(target, ladder, level, y) - importance_log_weight(target, ladder, level, x);
  StepOutcome out;
  out.branch = Branch::exchange;
  out.log_accept_ratio = log_ratio;
  out.accepted = metropolis_accept(log_ratio, rng);
  out.next = out.accepted ? y : x;
  return out;
}

StepOutcome ir_adaptive_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                             std::size_t level, const State& x, const Reservoir& hotter,
                             const KernelConfig& config, Rng& rng, const KernelConfig* refresh) {
  check_level(ladder, level, true);
  double u = uniform01(rng);
  if (hotter.empty() || u < config.theta()) return rwm_step(target, ladder, level, x, config, rng);
  check_state(target, x);
  const State& y = hotter.has_weight_index()
                       ? hotter.sample_indexed(rng)
                       : sample_weighted(
                             hotter,
                             [&](const State& s) { return importance_log_weight(target, ladder, level, s); },
                             rng);
  StepOutcome out = rwm_step(target, ladder, level, y, refresh ? *refresh : config, rng);
  out.branch = Branch::resample;
  return out;
}

StepOutcome limit_ee_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                          std::size_t level, const State& x, const KernelConfig& config, Rng& rng) {
  check_level(ladder, level, true);
  if (!target.has_exact_sampler())
    throw MissingExactSampler("limit EE kernel needs an exact sampler for the hotter level");
  double u = uniform01(rng);
  if (u < config.theta()) return rwm_step(target, ladder, level, x, config, rng);
  check_state(target, x);
  State y = target.sample_tempered(ladder.temperature(level - 1), rng);
  double log_ratio =
      importance_log_weight(target, ladder, level, y) - importance_log_weight(target, ladder, level, x);
  StepOutcome out;
  out.branch = Branch::exchange;
  out.log_accept_ratio = log_ratio;
  out.accepted = metropolis_accept(log_ratio, rng);
  out.next = out.accepted ? y : x;
  return out;
}

StepOutcome limit_ir_step(const EnergyTarget& target, const TemperatureLadder& ladder,
                          std::size_t level, const State& x, const KernelConfig& config, Rng& rng) {
  check_level(ladder, level, false);
  if (!target.has_exact_sampler())
    throw MissingExactSampler("limit IR kernel needs an exact sampler for the target level");
  double u = uniform01(rng);
  if (u < config.theta()) return rwm_step(target, ladder, level, x, config, rng);
  check_state(target, x);
  StepOutcome out;
  out.branch = Branch::resample;
  out.accepted = true;
  out.next = target.sample_tempered(ladder.temperature(level), rng);
  return out;
}

double theta_lower_bound(double lambda, double kappa, double t_level, double t_prev) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidArgument("lambda must lie in (0, 1)");
  if (!(t_level > 0.0 && t_prev > 0.0)) throw InvalidArgument("temperatures must be positive");
  const double gap = 1.0 / t_level - 1.0 / t_prev;
  if (!(kappa > 0.0 && kappa < gap))
    throw KappaTooLarge("kappa must satisfy 0 < kappa < 1/t_l - 1/t_{l-1} = " + std::to_string(gap));
  return 1.0 / (1.0 + (1.0 - lambda) * (gap / kappa - 1.0));
}

Eigen::MatrixXd finite_kernel_matrix(MatrixKind kind, const EnergyTarget& target,
                                     const TemperatureLadder& ladder, std::size_t level,
                                     const Eigen::MatrixXd& base_matrix, double theta) {
  if (kind == MatrixKind::ee_frozen || kind == MatrixKind::ir_frozen)
    throw InvalidArgument("frozen kernels need a frozen measure");
  return finite_kernel_matrix(kind, target, ladder, level, base_matrix, theta, Eigen::VectorXd());
}

Eigen::MatrixXd finite_kernel_matrix(MatrixKind kind, const EnergyTarget& target,
                                     const TemperatureLadder& ladder, std::size_t level,
                                     const Eigen::MatrixXd& base_matrix, double theta,
                                     const Eigen::VectorXd& measure) {
  if (!target.is_finite()) throw InvalidArgument("finite_kernel_matrix requires a finite target");
  if (!(theta >= 0.0 && theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  check_level(ladder, level, kind != MatrixKind::base && kind != MatrixKind::ir_limit);
  check_base_matrix(base_matrix, target.state_count());
  const auto n = static_cast<Eigen::Index>(target.state_count());
  if (kind == MatrixKind::base || theta == 1.0) return base_matrix;

  if ((kind == MatrixKind::ee_frozen || kind == MatrixKind::ir_frozen) &&
      (measure.size() != n || measure.minCoeff() < 0.0 || std::abs(measure.sum() - 1.0) > 1e-12))
    throw InvalidArgument("frozen measure must be a probability vector over the states");

  Eigen::MatrixXd other;
  switch (kind) {
    case MatrixKind::ee_limit:
      other = exchange_kernel(target.tempered_distribution(ladder.temperature(level - 1)),
                              exchange_acceptance(target, ladder, level));
      break;
    case MatrixKind::ee_frozen:
      other = exchange_kernel(measure, exchange_acceptance(target, ladder, level));
      break;
    case MatrixKind::ir_limit:
      other = Eigen::VectorXd::Ones(n) *
              target.tempered_distribution(ladder.temperature(level)).transpose();
      break;
    case MatrixKind::ir_frozen: {
      Eigen::VectorXd lw(n);
      for (Eigen::Index i = 0; i < n; ++i)
        lw[i] = importance_log_weight(target, ladder, level, finite_state(static_cast<std::size_t>(i)));
      Eigen::VectorXd q = measure.array() * (lw.array() - lw.maxCoeff()).exp();
      q /= q.sum();
      Eigen::RowVectorXd row = q.transpose() * base_matrix;
      other = Eigen::VectorXd::Ones(n) * row;
      break;
    }
    case MatrixKind::base:
      break;
  }
  return theta * base_matrix + (1.0 - theta) * other;
}

Eigen::MatrixXd ring_proposal(std::size_t state_count, double move_prob) {
  if (state_count == 0) throw InvalidArgument("ring proposal needs at least one state");
  if (!(move_prob > 0.0 && move_prob <= 1.0)) throw InvalidArgument("move_prob must lie in (0, 1]");
  const auto n = static_cast<Eigen::Index>(state_count);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    q(i, i) += 1.0 - move_prob;
    q(i, (i + 1) % n) += move_prob / 2.0;
    q(i, (i + n - 1) % n) += move_prob / 2.0;
  }
  return q;
}

Eigen::MatrixXd metropolis_matrix(const EnergyTarget& target, double temperature,
                                  const Eigen::MatrixXd& proposal) {
  if (!target.is_finite()) throw InvalidArgument("metropolis_matrix requires a finite target");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  check_base_matrix(proposal, target.state_count());
  if ((proposal - proposal.transpose()).cwiseAbs().maxCoeff() > 1e-15)
    throw InvalidArgument("metropolis_matrix requires a symmetric proposal");
  const Eigen::Index n = proposal.rows();
  auto e = target.energies();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index x = 0; x < n; ++x) {
    double moved = 0.0;
    for (Eigen::Index y = 0; y < n; ++y) {
      if (y == x) continue;
      double a = std::exp(std::min(0.0, (e[static_cast<std::size_t>(x)] - e[static_cast<std::size_t>(y)]) /
                                             temperature));
      p(x, y) = proposal(x, y) * a;
      moved += p(x, y);
    }
    p(x, x) = 1.0 - moved;
  }
  return p;
}

}  // namespace eemc
