#include "eemc/analysis.hpp"

#include <cmath>
#include <string>

#include "eemc/errors.hpp"
#include "eemc/kernels.hpp"

namespace eemc {

namespace {

constexpr double kRowSumTolerance = 1e-12;
constexpr double kResidualTolerance = 1e-10;

void check_stochastic(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument("matrix must be square and non-empty");
  if (!m.allFinite() || m.minCoeff() < 0.0)
    throw InvalidArgument("matrix entries must be finite and non-negative");
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    if (std::abs(m.row(i).sum() - 1.0) > kRowSumTolerance)
      throw InvalidArgument("row " + std::to_string(i) + " does not sum to 1");
}

// Model with a caller-supplied stationary law, checked against the matrix.
FiniteChainModel checked_model(const Eigen::MatrixXd& matrix, const Eigen::VectorXd& pi) {
  check_stochastic(matrix);
  if (pi.size() != matrix.rows()) throw InvalidArgument("stationary vector has the wrong length");
  double residual = (pi.transpose() * matrix - pi.transpose()).cwiseAbs().maxCoeff();
  if (residual > kResidualTolerance)
    throw InvalidArgument("matrix does not leave the tempered law invariant (residual " +
                          std::to_string(residual) + ")");
  return FiniteChainModel{matrix, pi};
}

}  // namespace

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& matrix) {
  check_stochastic(matrix);
  const Eigen::Index n = matrix.rows();
  // pi' (M - I) = 0 with the last equation replaced by sum(pi) = 1.
  Eigen::MatrixXd a = matrix.transpose() - Eigen::MatrixXd::Identity(n, n);
  a.row(n - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  b[n - 1] = 1.0;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible())
    throw SingularSystem("stationary system is singular: the chain is reducible");
  Eigen::VectorXd pi = lu.solve(b);
  double residual = (pi.transpose() * matrix - pi.transpose()).cwiseAbs().maxCoeff();
  if (residual > kResidualTolerance || pi.minCoeff() < -kResidualTolerance)
    throw SingularSystem("stationary solve is ill-conditioned (residual " + std::to_string(residual) +
                         ")");
  return pi;
}

FiniteChainModel FiniteChainModel::from_matrix(const Eigen::MatrixXd& matrix) {
  return FiniteChainModel{matrix, stationary_distribution(matrix)};
}

Eigen::VectorXd poisson_solve(const FiniteChainModel& model, const Eigen::VectorXd& f) {
  const Eigen::Index n = model.matrix.rows();
  if (f.size() != n) throw InvalidArgument("function length does not match the state count");
  if (!f.allFinite()) throw InvalidArgument("function values must be finite");
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(n, n) - model.matrix +
                      Eigen::VectorXd::Ones(n) * model.stationary.transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw SingularSystem("Poisson system is singular: the chain is reducible");
  return lu.solve(f);
}

double asymptotic_variance(const FiniteChainModel& model, const Eigen::VectorXd& f) {
  Eigen::VectorXd fc = f.array() - model.stationary.dot(f);
  Eigen::VectorXd u = poisson_solve(model, fc);
  return model.stationary.dot((fc.array() * (2.0 * u.array() - fc.array())).matrix());
}

double gamma_covariance(const FiniteChainModel& model, const Eigen::VectorXd& f,
                        const Eigen::VectorXd& g) {
  Eigen::VectorXd uf = poisson_solve(model, f);
  Eigen::VectorXd ug = poisson_solve(model, g);
  Eigen::VectorXd pf = model.matrix * uf;
  Eigen::VectorXd pg = model.matrix * ug;
  return model.stationary.dot((uf.array() * ug.array() - pf.array() * pg.array()).matrix());
}

FiniteChainModel TwoLevelInstance::model0() const {
  if (ladder.level_count() != 2) throw InvalidArgument("two-level instance needs exactly two levels");
  return checked_model(base0, target.tempered_distribution(ladder.temperature(0)));
}

FiniteChainModel TwoLevelInstance::limit_model() const {
  if (ladder.level_count() != 2) throw InvalidArgument("two-level instance needs exactly two levels");
  Eigen::MatrixXd k = finite_kernel_matrix(MatrixKind::ee_limit, target, ladder, 1, base1, theta);
  return checked_model(k, target.tempered_distribution(ladder.temperature(1)));
}

bool TwoLevelInstance::levels_coincide() const {
  if (base0.rows() != base1.rows() || base0.cols() != base1.cols()) return false;
  Eigen::VectorXd p0 = target.tempered_distribution(ladder.temperature(0));
  Eigen::VectorXd p1 = target.tempered_distribution(ladder.temperature(1));
  return (base0 - base1).cwiseAbs().maxCoeff() <= 1e-14 && (p0 - p1).cwiseAbs().maxCoeff() <= 1e-12;
}

Eigen::MatrixXd ee_h_function(const TwoLevelInstance& instance, const FiniteChainModel& model0,
                              const FiniteChainModel& limit_model, const Eigen::VectorXd& f) {
  const auto n = static_cast<Eigen::Index>(instance.target.state_count());
  if (model0.matrix.rows() != n || limit_model.matrix.rows() != n || f.size() != n)
    throw InvalidArgument("dimension mismatch between instance, models and function");
  Eigen::VectorXd fc = f.array() - limit_model.stationary.dot(f);
  Eigen::VectorXd u = poisson_solve(limit_model, fc);

  Eigen::VectorXd lw(n);
  for (Eigen::Index i = 0; i < n; ++i)
    lw[i] = importance_log_weight(instance.target, instance.ladder, 1,
                                  finite_state(static_cast<std::size_t>(i)));

  // t(x, y) = T(y, x, U): accept y with min(1, r(y)/r(x)), else stay at x.
  Eigen::MatrixXd t(n, n);
  for (Eigen::Index x = 0; x < n; ++x)
    for (Eigen::Index y = 0; y < n; ++y) {
      double a = std::exp(std::min(0.0, lw[y] - lw[x]));
      t(x, y) = a * u[y] + (1.0 - a) * u[x];
    }
  Eigen::VectorXd r = t * model0.stationary;  // R(x, U)
  return t.colwise() - r;
}

VarianceReport ee_limit_clt_variance(const TwoLevelInstance& instance, const Eigen::VectorXd& f) {
  if (!(instance.theta >= 0.0 && instance.theta <= 1.0)) throw InvalidArgument("theta must lie in [0, 1]");
  FiniteChainModel m0 = instance.model0();
  FiniteChainModel lim = instance.limit_model();
  VarianceReport rep;
  rep.sigma_star_sq = asymptotic_variance(lim, f);
  Eigen::MatrixXd h = ee_h_function(instance, m0, lim, f);
  rep.gbar = h.transpose() * lim.stationary;
  rep.gamma_gbar = gamma_covariance(m0, rep.gbar, rep.gbar);
  const double w = (1.0 - instance.theta) * (1.0 - instance.theta);
  rep.clt_variance = rep.sigma_star_sq + 4.0 * w * rep.gamma_gbar;
  if (instance.levels_coincide()) rep.second_moment_limit = rep.sigma_star_sq + 2.0 * w * rep.gamma_gbar;
  return rep;
}

BatchMeansResult batch_means_variance(std::span<const double> values, std::size_t batch_count) {
  if (batch_count < 2) throw InvalidArgument("batch means needs at least two batches");
  const std::size_t batch_size = values.size() / batch_count;
  if (batch_size < 100)
    throw InvalidArgument("too few points: " + std::to_string(values.size()) + " values cannot fill " +
                          std::to_string(batch_count) + " batches of at least 100");
  std::vector<double> means(batch_count);
  for (std::size_t b = 0; b < batch_count; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < batch_size; ++i) s += values[b * batch_size + i];
    means[b] = s / static_cast<double>(batch_size);
  }
  double grand = 0.0;
  for (double m : means) grand += m;
  grand /= static_cast<double>(batch_count);
  double ss = 0.0;
  for (double m : means) ss += (m - grand) * (m - grand);
  const double dof = static_cast<double>(batch_count - 1);
  BatchMeansResult r;
  r.estimate = static_cast<double>(batch_size) * ss / dof;
  r.standard_error = r.estimate * std::sqrt(2.0 / dof);
  return r;
}

}  // namespace eemc
