#include <doctest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "eemc/csv.hpp"
#include "eemc/errors.hpp"
#include "eemc/harness.hpp"
#include "oracles.hpp"

using namespace eemc;

namespace {

Eigen::MatrixXd table_cov() {
  Eigen::MatrixXd s(2, 2);
  s << 0.96, 2.44, 2.44, 7.04;
  return s;
}

LadderConfig table_config(double theta = 0.5) {
  return make_ladder_config(EnergyTarget::gaussian(table_cov()),
                            TemperatureLadder({10.0, 5.0, 2.0, 1.0}, {theta, theta, theta}));
}

HarnessOptions opts(std::size_t r, std::size_t n, std::uint64_t seed, std::size_t jobs = 1) {
  HarnessOptions o;
  o.replications = r;
  o.iterations = n;
  o.seed = seed;
  o.jobs = jobs;
  return o;
}

}  // namespace

TEST_CASE("estimand truths come from the covariance and the exact law") {
  auto g = gaussian_moment_estimands(EnergyTarget::gaussian(table_cov()));
  REQUIRE(g.size() == 4);
  std::vector<double> truths;
  for (const auto& e : g) truths.push_back(e.truth);
  CHECK(truths == std::vector<double>{0.0, 0.0, 0.96, 7.04});
  State x(2);
  x << 1.5, -2.0;
  CHECK(g[1].f(x) == -2.0);
  CHECK(g[2].f(x) == 2.25);

  EnergyTarget t = EnergyTarget::finite({0.0, 1.0, 2.0});
  auto f = finite_moment_estimands(t);
  REQUIRE(f.size() == 2);
  Eigen::VectorXd pi = oracle::boltzmann({0.0, 1.0, 2.0}, 1.0);
  CHECK(f[0].truth == doctest::Approx(pi[1] + 2 * pi[2]).epsilon(1e-14));
  CHECK(f[1].truth == doctest::Approx(pi[1] + 4 * pi[2]).epsilon(1e-14));
}

TEST_CASE("sampler kind names") {
  for (SamplerKind k : {SamplerKind::rwm, SamplerKind::ir, SamplerKind::ir_limit, SamplerKind::ee,
                        SamplerKind::ee_limit})
    CHECK(parse_sampler_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_sampler_kind("gibbs"), InvalidArgument);
}

TEST_CASE("baseline ratios are one and ratios divide by the baseline") {
  LadderConfig c = table_config();
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::rwm, SamplerKind::ee, SamplerKind::ir_limit};
  MseTable t = mse_harness(c, kinds, est, opts(8, 500, 3));
  REQUIRE(t.rows.size() == 3);
  CHECK(t.estimands.size() == 4);
  for (double r : t.row(SamplerKind::rwm).ratio) CHECK(r == 1.0);
  for (const MseRow& row : t.rows)
    for (std::size_t j = 0; j < est.size(); ++j) {
      CHECK(row.mse[j] > 0.0);
      CHECK(row.ratio[j] == doctest::Approx(t.rows[0].mse[j] / row.mse[j]).epsilon(1e-14));
    }
  CHECK(t.ratios_reliable());
}

TEST_CASE("MSE equals the mean of per-replication squared errors") {
  LadderConfig c = table_config();
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::ee};
  HarnessOptions o = opts(5, 300, 11);
  o.burn_in = 50;
  MseTable t = mse_harness(c, kinds, est, o);
  std::vector<double> sq(est.size(), 0.0);
  for (std::size_t r = 0; r < 5; ++r) {
    auto avg = run_averages(c, SamplerKind::ee, est, 300, 50, derive_seed(11, r));
    for (std::size_t j = 0; j < est.size(); ++j) sq[j] += std::pow(avg[j] - est[j].truth, 2);
  }
  for (std::size_t j = 0; j < est.size(); ++j)
    CHECK(t.rows[0].mse[j] == doctest::Approx(sq[j] / 5).epsilon(1e-12));
}

TEST_CASE("limit IR with theta = 0 is i.i.d. sampling") {
  LadderConfig c = table_config();
  c.kernels[3] = c.kernels[3].with_theta(0.0);
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::ir_limit};
  MseTable t = mse_harness(c, kinds, est, opts(400, 10000, 17));
  const MseRow& row = t.rows[0];
  CHECK(std::abs(row.mse[0] - 0.96 / 10000) < 3 * row.mse_se[0]);
  CHECK(std::abs(row.mse[1] - 7.04 / 10000) < 3 * row.mse_se[1]);
  // Var(X^2) = 2 sigma^4 for a centered normal
  CHECK(std::abs(row.mse[2] - 2 * 0.96 * 0.96 / 10000) < 3 * row.mse_se[2]);
}

TEST_CASE("a single replication is flagged") {
  LadderConfig c = table_config();
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::rwm, SamplerKind::ee};
  MseTable t = mse_harness(c, kinds, est, opts(1, 400, 5));
  CHECK_FALSE(t.ratios_reliable());
  auto avg = run_averages(c, SamplerKind::rwm, est, 400, 0, derive_seed(5, 0));
  for (std::size_t j = 0; j < est.size(); ++j)
    CHECK(t.rows[0].mse[j] == doctest::Approx(std::pow(avg[j] - est[j].truth, 2)).epsilon(1e-14));
  CHECK(format_mse_table(t).find("unreliable") != std::string::npos);
}

TEST_CASE("results do not depend on the worker count") {
  LadderConfig c = table_config();
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::rwm, SamplerKind::ir, SamplerKind::ee_limit};
  MseTable a = mse_harness(c, kinds, est, opts(6, 300, 9, 1));
  MseTable b = mse_harness(c, kinds, est, opts(6, 300, 9, 4));
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CHECK(a.rows[i].mse == b.rows[i].mse);
    CHECK(a.rows[i].mse_se == b.rows[i].mse_se);
  }

  LadderConfig f = make_ladder_config(EnergyTarget::finite({0, 0, 0, 0, 0}),
                                      TemperatureLadder({2.0, 1.0}, {0.5}), 1.0, 0.2);
  auto ind = [](const State& x) { return state_index(x) == 0 ? 0.8 : -0.2; };
  ScaledSumStats s1 = simulate_scaled_sum(f, Scheme::ee, 1, ind, 200, 20, 4, 1);
  ScaledSumStats s3 = simulate_scaled_sum(f, Scheme::ee, 1, ind, 200, 20, 4, 3);
  CHECK(s1.variance == s3.variance);
  CHECK(s1.mean == s3.mean);
  CHECK(s1.standard_error == doctest::Approx(s1.variance * std::sqrt(2.0 / 19)).epsilon(1e-14));
}

TEST_CASE("theta = 1 makes EE and RWM indistinguishable") {
  LadderConfig c = table_config(1.0);
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::rwm, SamplerKind::ee};
  MseTable t = mse_harness(c, kinds, est, opts(200, 2000, 23));
  for (std::size_t j = 0; j < est.size(); ++j) {
    double diff = t.rows[0].mse[j] - t.rows[1].mse[j];
    double se = std::hypot(t.rows[0].mse_se[j], t.rows[1].mse_se[j]);
    CHECK(std::abs(diff) < 4 * se);
  }
}

TEST_CASE("MSE csv round-trips exactly") {
  LadderConfig c = table_config();
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::rwm, SamplerKind::ir, SamplerKind::ee};
  MseTable t = mse_harness(c, kinds, est, opts(3, 200, 2));
  std::stringstream ss;
  write_mse_csv(t, ss);
  CsvTable csv = read_csv(ss);
  REQUIRE(csv.rows.size() == 6);
  CHECK(csv.header.size() == 2 + est.size());
  for (std::size_t i = 0; i < kinds.size(); ++i) {
    CHECK(csv.rows[2 * i][0] == to_string(kinds[i]));
    CHECK(csv.rows[2 * i][1] == "MSE");
    CHECK(csv.rows[2 * i + 1][1] == "Ratios");
    for (std::size_t j = 0; j < est.size(); ++j) {
      CHECK(parse_real(csv.rows[2 * i][2 + j]) == t.rows[i].mse[j]);
      CHECK(parse_real(csv.rows[2 * i + 1][2 + j]) == t.rows[i].ratio[j]);
    }
  }
  std::string text = format_mse_table(t);
  CHECK(text.find("RWM") != std::string::npos);
  CHECK(text.find("Based on 3 replications of 200 iterations") != std::string::npos);
}

TEST_CASE("harness argument errors") {
  LadderConfig c = table_config();
  auto est = gaussian_moment_estimands(c.target);
  std::vector<SamplerKind> kinds{SamplerKind::rwm};
  std::vector<SamplerKind> none;
  CHECK_THROWS_AS(mse_harness(c, kinds, est, opts(0, 100, 1)), InvalidArgument);
  CHECK_THROWS_AS(mse_harness(c, kinds, est, opts(2, 0, 1)), InvalidArgument);
  CHECK_THROWS_AS(mse_harness(c, none, est, opts(2, 100, 1)), InvalidArgument);
  HarnessOptions o = opts(2, 100, 1);
  o.burn_in = 100;
  CHECK_THROWS_AS(mse_harness(c, kinds, est, o), InvalidArgument);

  LadderConfig hidden = make_ladder_config(EnergyTarget::gaussian(table_cov()).without_exact_sampler(),
                                           TemperatureLadder({2.0, 1.0}, {0.5}));
  std::vector<SamplerKind> lim{SamplerKind::ee_limit};
  CHECK_THROWS_AS(mse_harness(hidden, lim, est, opts(2, 100, 1)), MissingExactSampler);
}
