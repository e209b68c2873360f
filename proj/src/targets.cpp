#include "eemc/targets.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "eemc/errors.hpp"

namespace eemc {

EnergyTarget EnergyTarget::gaussian(const Eigen::MatrixXd& covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0)
    throw InvalidArgument("gaussian covariance must be a non-empty square matrix");
  if (covariance.rows() > kMaxDimension)
    throw InvalidArgument("gaussian dimension exceeds the supported maximum of " +
                          std::to_string(kMaxDimension));
  if (!covariance.allFinite() || (covariance - covariance.transpose()).cwiseAbs().maxCoeff() >
                                     1e-12 * (1.0 + covariance.cwiseAbs().maxCoeff()))
    throw InvalidArgument("gaussian covariance must be finite and symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0)
    throw InvalidArgument("gaussian covariance is not positive definite");

  EnergyTarget t;
  t.kind_ = TargetKind::continuous;
  t.dimension_ = static_cast<int>(covariance.rows());
  t.has_exact_sampler_ = true;
  t.covariance_ = covariance;
  t.cholesky_ = llt.matrixL();
  t.precision_ = llt.solve(Eigen::MatrixXd::Identity(covariance.rows(), covariance.cols()));
  return t;
}

EnergyTarget EnergyTarget::finite(std::vector<double> energies) {
  if (energies.empty()) throw InvalidArgument("finite target needs at least one state");
  for (double e : energies)
    if (!std::isfinite(e)) throw InvalidArgument("finite target energies must be finite");
  EnergyTarget t;
  t.kind_ = TargetKind::finite;
  t.dimension_ = 1;
  t.has_exact_sampler_ = true;
  t.energies_ = std::move(energies);
  return t;
}

EnergyTarget EnergyTarget::custom(int dimension, EnergyFn energy) {
  if (dimension < 1 || dimension > kMaxDimension)
    throw InvalidArgument("custom target dimension out of range");
  if (!energy) throw InvalidArgument("custom target needs an energy function");
  EnergyTarget t;
  t.kind_ = TargetKind::continuous;
  t.dimension_ = dimension;
  t.custom_energy_ = std::move(energy);
  return t;
}

EnergyTarget EnergyTarget::without_exact_sampler() const {
  EnergyTarget t = *this;
  t.has_exact_sampler_ = false;
  return t;
}

bool EnergyTarget::valid_state(const State& x) const {
  if (x.size() != dimension_) return false;
  if (is_finite()) {
    double i = x[0];
    return i >= 0.0 && i < static_cast<double>(energies_.size()) && i == std::floor(i);
  }
  return x.allFinite();
}

double EnergyTarget::energy(const State& x) const {
  if (!valid_state(x)) throw InvalidArgument("state is not valid for this target");
  double e;
  if (is_finite()) {
    e = energies_[state_index(x)];
  } else if (custom_energy_) {
    e = custom_energy_(x);
  } else {
    e = 0.0;
    for (int i = 0; i < dimension_; ++i) {
      double row = 0.0;
      for (int j = 0; j < dimension_; ++j) row += precision_(i, j) * x[j];
      e += x[i] * row;
    }
    e *= 0.5;
  }
  if (!std::isfinite(e)) throw InvalidArgument("energy is not finite at the given state");
  return e;
}

State EnergyTarget::sample_tempered(double temperature, Rng& rng) const {
  if (!has_exact_sampler_) throw MissingExactSampler("target has no exact tempered sampler");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  if (is_finite()) {
    // Inverse CDF over the tempered law.
    Eigen::VectorXd p = tempered_distribution(temperature);
    double u = uniform01(rng);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
      acc += p[i];
      if (u < acc) return finite_state(static_cast<std::size_t>(i));
    }
    return finite_state(static_cast<std::size_t>(p.size() - 1));
  }
  State z(dimension_);
  for (int i = 0; i < dimension_; ++i) z[i] = standard_normal(rng);
  const double scale = std::sqrt(temperature);
  State x = State::Zero(dimension_);
  for (int i = 0; i < dimension_; ++i) {
    for (int j = 0; j <= i; ++j) x[i] += cholesky_(i, j) * z[j];
    x[i] *= scale;
  }
  return x;
}

Eigen::VectorXd EnergyTarget::tempered_distribution(double temperature) const {
  if (!is_finite()) throw InvalidArgument("tempered_distribution requires a finite target");
  if (!(temperature > 0.0)) throw InvalidArgument("temperature must be positive");
  Eigen::VectorXd logp(energies_.size());
  for (std::size_t i = 0; i < energies_.size(); ++i) logp[i] = -energies_[i] / temperature;
  Eigen::VectorXd p = (logp.array() - logp.maxCoeff()).exp();
  return p / p.sum();
}

TemperatureLadder::TemperatureLadder(std::vector<double> temperatures, std::vector<double> thetas)
    : temperatures_(std::move(temperatures)), thetas_(std::move(thetas)) {
  if (temperatures_.empty()) throw InvalidArgument("temperature ladder is empty");
  for (std::size_t i = 0; i < temperatures_.size(); ++i) {
    if (!(temperatures_[i] > 0.0) || !std::isfinite(temperatures_[i]))
      throw InvalidArgument("temperature t_" + std::to_string(i) + " must be positive and finite");
    if (i > 0 && !(temperatures_[i - 1] > temperatures_[i])) {
      std::ostringstream msg;
      msg << "temperatures must be strictly decreasing: t_" << i - 1 << " = " << temperatures_[i - 1]
          << " is not greater than t_" << i << " = " << temperatures_[i];
      throw InvalidArgument(msg.str());
    }
  }
  if (temperatures_.back() != 1.0) throw InvalidArgument("the last temperature must be exactly 1");
  if (thetas_.size() != temperatures_.size() - 1)
    throw InvalidArgument("expected " + std::to_string(temperatures_.size() - 1) +
                          " theta values (one per adaptive level), got " +
                          std::to_string(thetas_.size()));
  for (std::size_t i = 0; i < thetas_.size(); ++i)
    if (!(thetas_[i] > 0.0 && thetas_[i] <= 1.0))
      throw InvalidArgument("theta_" + std::to_string(i + 1) + " = " + std::to_string(thetas_[i]) +
                            " is outside (0, 1]");
}

double TemperatureLadder::temperature(std::size_t level) const {
  if (level >= temperatures_.size()) throw InvalidArgument("level out of range");
  return temperatures_[level];
}

double TemperatureLadder::theta(std::size_t level) const {
  if (level == 0 || level >= temperatures_.size())
    throw InvalidArgument("theta is defined only for levels 1..K");
  return thetas_[level - 1];
}

double tempered_log_density(const EnergyTarget& target, const TemperatureLadder& ladder,
                            std::size_t level, const State& x) {
  return -target.energy(x) / ladder.temperature(level);
}

double importance_log_weight(const EnergyTarget& target, const TemperatureLadder& ladder,
                             std::size_t level, const State& x) {
  if (level == 0 || level > ladder.top_level())
    throw InvalidArgument("importance weight requires 1 <= level <= K");
  double e = target.energy(x);
  return e / ladder.temperature(level - 1) - e / ladder.temperature(level);
}

}  // namespace eemc
