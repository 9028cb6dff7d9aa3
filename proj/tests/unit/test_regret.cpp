#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <boost/math/distributions/normal.hpp>

#include "expbandit/exp_policies.hpp"
#include "expbandit/regret.hpp"

using namespace expbandit;

namespace {

RunStep make_step(std::vector<double> rewards, std::size_t arm, std::optional<AdviceMatrix> advice = std::nullopt,
                  std::int64_t context = 0) {
  RunStep s;
  s.context = context;
  s.advice = std::move(advice);
  s.arm = arm;
  s.player_reward = rewards[arm];
  s.rewards = RewardVector(std::move(rewards), true);
  return s;
}

// Brute-force contextual regret, written independently of the library loop.
double brute_contextual(const std::vector<std::vector<std::vector<double>>>& advice,
                        const std::vector<std::vector<double>>& rewards, const std::vector<std::size_t>& arms) {
  const std::size_t n = advice[0].size();
  long double best = -1e300L;
  for (std::size_t i = 0; i < n; ++i) {
    long double g = 0.0L;
    for (std::size_t t = 0; t < rewards.size(); ++t)
      for (std::size_t j = 0; j < rewards[t].size(); ++j) g += advice[t][i][j] * rewards[t][j];
    best = std::max(best, g);
  }
  long double y = 0.0L;
  for (std::size_t t = 0; t < rewards.size(); ++t) y += rewards[t][arms[t]];
  return static_cast<double>(best - y);
}

// Oracle for the box condition using Boost's normal CDF and plain bisection.
double delta_oracle(double eta, std::size_t k) {
  const boost::math::normal n01;
  double lo = 0.0, hi = 20.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double one = boost::math::cdf(n01, mid) - boost::math::cdf(n01, -mid);
    (std::pow(one, static_cast<double>(k)) < 1.0 - eta ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

ProbabilityVector random_row(std::size_t k, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(k);
  double s = 0.0;
  for (double& x : v) s += (x = u(gen));
  for (double& x : v) x /= s;
  double head = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) head += v[j];
  v.back() = std::max(0.0, 1.0 - head);
  return ProbabilityVector(v);
}

}  // namespace

TEST(RealizedContextual, HandExample) {
  RunLog log(1);
  log.push(make_step({1.0, 0.0}, 1, AdviceMatrix({ProbabilityVector::uniform(2), ProbabilityVector::one_hot(2, 0)})));
  auto s = realized_regret_contextual(log);
  EXPECT_DOUBLE_EQ(s.realized, 1.0);
  EXPECT_EQ(s.best_index, 1u);
  EXPECT_DOUBLE_EQ(s.best_cumulative, 1.0);
}

TEST(RealizedContextual, PlayerMatchingOneHotBestIsZero) {
  RunLog log(5);
  for (int t = 0; t < 5; ++t) {
    log.push(make_step({0.2, 0.9}, 1,
                       AdviceMatrix({ProbabilityVector::one_hot(2, 1), ProbabilityVector::one_hot(2, 0)})));
  }
  EXPECT_NEAR(realized_regret_contextual(log).realized, 0.0, 1e-15);
}

TEST(RealizedContextual, MissingAdviceRejected) {
  RunLog log(1);
  log.push(make_step({1.0, 0.0}, 1));
  EXPECT_THROW(realized_regret_contextual(log), InvalidInput);
}

TEST(RealizedContextual, BruteForceOracleAndAccountingIdentity) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + trial % 4, n = 1 + trial % 3, horizon = 30;
    std::vector<std::vector<std::vector<double>>> adv(horizon);
    std::vector<std::vector<double>> rew(horizon);
    std::vector<std::size_t> arms(horizon);
    RunLog log(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      std::vector<ProbabilityVector> rows;
      for (std::size_t i = 0; i < n; ++i) {
        rows.push_back(random_row(k, gen));
        adv[t].emplace_back(rows.back().entries().begin(), rows.back().entries().end());
      }
      rew[t].resize(k);
      for (double& x : rew[t]) x = u(gen);
      arms[t] = static_cast<std::size_t>(u(gen) * k) % k;
      log.push(make_step(rew[t], arms[t], AdviceMatrix(rows)));
    }
    auto s = realized_regret_contextual(log);
    EXPECT_NEAR(s.realized, brute_contextual(adv, rew, arms), 1e-12);
    EXPECT_EQ(s.realized + s.player_cumulative, s.best_cumulative);
  }
}

TEST(RealizedAdversarial, HandExamples) {
  RunLog log(2);
  log.push(make_step({1.0, 0.0}, 1));
  log.push(make_step({1.0, 0.0}, 1));
  EXPECT_DOUBLE_EQ(realized_regret_adversarial(log).realized, 2.0);
  RunLog best(2);
  best.push(make_step({1.0, 0.0}, 0));
  best.push(make_step({1.0, 0.0}, 0));
  EXPECT_DOUBLE_EQ(realized_regret_adversarial(best).realized, 0.0);
  EXPECT_THROW(realized_regret_adversarial(RunLog(3)), InvalidInput);
}

TEST(RealizedAdversarial, BruteForceOracle) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t k = 2 + trial % 5, horizon = 40;
    std::vector<long double> col(k, 0.0L);
    long double y = 0.0L;
    RunLog log(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      std::vector<double> r(k);
      for (std::size_t j = 0; j < k; ++j) col[j] += (r[j] = u(gen));
      const std::size_t a = static_cast<std::size_t>(u(gen) * k) % k;
      y += r[a];
      log.push(make_step(r, a));
    }
    const double expected = static_cast<double>(*std::max_element(col.begin(), col.end()) - y);
    EXPECT_NEAR(realized_regret_adversarial(log).realized, expected, 1e-12);
  }
}

TEST(PseudoRegret, ArmCountExample) {
  RunLog log(10);
  for (int t = 0; t < 10; ++t) log.push(make_step({0.0, 1.0}, t < 3 ? 0 : 1));
  EXPECT_DOUBLE_EQ(pseudo_regret(log, {{0, {0.0, 1.0}}}), 3.0);
}

TEST(PseudoRegret, BestArmIsZero) {
  RunLog log(4);
  for (int t = 0; t < 4; ++t) log.push(make_step({0.0, 1.0}, 1));
  EXPECT_DOUBLE_EQ(pseudo_regret(log, {{0, {0.2, 0.7}}}), 0.0);
}

TEST(PseudoRegret, ContextualCyclicBruteForce) {
  const MeansByContext means = {{0, {0.1, 0.8, 0.4}}, {1, {0.9, 0.2, 0.5}}};
  std::mt19937_64 gen(9);
  const std::size_t horizon = 20;
  RunLog log(horizon);
  long double expected = 0.0L;
  for (std::size_t t = 0; t < horizon; ++t) {
    const std::int64_t ctx = static_cast<std::int64_t>(t % 2);
    const auto r0 = random_row(3, gen), r1 = random_row(3, gen);
    const auto& mu = means.at(ctx);
    long double b0 = 0.0L, b1 = 0.0L;
    for (std::size_t j = 0; j < 3; ++j) {
      b0 += r0[j] * mu[j];
      b1 += r1[j] * mu[j];
    }
    const std::size_t a = t % 3;
    expected += std::max(b0, b1) - mu[a];
    log.push(make_step({0.0, 0.5, 1.0}, a, AdviceMatrix({r0, r1}), ctx));
  }
  EXPECT_NEAR(pseudo_regret(log, means), static_cast<double>(expected), 1e-12);
}

TEST(ComputeDelta, ReferenceValues) {
  EXPECT_NEAR(compute_delta(0.05, context_free_gaussian({0.0}, {1.0})), 1.959964, 1e-4);
  EXPECT_NEAR(compute_delta(0.05, context_free_gaussian({0.0, 0.0}, {1.0, 1.0})), 2.2365, 1e-3);
}

TEST(ComputeDelta, MatchesBoostOracle) {
  for (std::size_t k : {1u, 2u, 5u}) {
    std::vector<double> mu(k, 0.0), sd(k, 1.0);
    for (double eta : {0.01, 0.05, 0.3, 0.9}) {
      EXPECT_NEAR(compute_delta(eta, context_free_gaussian(mu, sd)), delta_oracle(eta, k), 1e-8);
    }
  }
}

TEST(ComputeDelta, MonotoneAndLimits) {
  const auto env = context_free_gaussian({0.5, -0.3}, {1.0, 2.0});
  double prev = std::numeric_limits<double>::infinity();
  for (double eta : {1e-6, 1e-3, 0.05, 0.2, 0.5, 0.9, 0.999}) {
    const double d = compute_delta(eta, env);
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(compute_delta(1.0 - 1e-9, context_free_gaussian({0.0}, {1.0})), 1e-6);
  EXPECT_THROW(compute_delta(0.0, env), InvalidInput);
  EXPECT_THROW(compute_delta(1.0, env), InvalidInput);
}

TEST(ComputeDelta, ShiftedMeanMatchesBoost) {
  const auto env = context_free_gaussian({1.0}, {0.5});
  const double d = compute_delta(0.1, env);
  const boost::math::normal n(1.0, 0.5);
  EXPECT_NEAR(boost::math::cdf(n, d) - boost::math::cdf(n, -d), 0.9, 1e-8);
}

TEST(MonteCarlo, SameSeedIdenticalRecords) {
  const auto env = context_free_gaussian({0.0, 0.5}, {1.0, 1.0});
  PolicySpec pol;
  pol.algorithm = Algorithm::exp3p;
  auto a = monte_carlo_regret(pol, env, {}, 200, 1, 11, {1, true});
  auto b = monte_carlo_regret(pol, env, {}, 200, 1, 11, {1, true});
  ASSERT_TRUE(a.records[0].log && b.records[0].log);
  for (std::size_t t = 0; t < 200; ++t) {
    EXPECT_EQ((*a.records[0].log)[t].arm, (*b.records[0].log)[t].arm);
    EXPECT_EQ((*a.records[0].log)[t].player_reward, (*b.records[0].log)[t].player_reward);
  }
  EXPECT_EQ(a.mean_regret, b.mean_regret);
}

TEST(MonteCarlo, WorkerCountDoesNotChangeResults) {
  BernoulliEnv env;
  env.means = {{0, {0.2, 0.6, 0.4}}, {1, {0.7, 0.1, 0.3}}};
  const std::vector<ExpertSpec> experts = {UniformExpert{}, FixedArmExpert{0}, OracleExpert{env.means}};
  PolicySpec pol;
  auto a = monte_carlo_regret(pol, env, experts, 300, 24, 5, {1, false});
  auto b = monte_carlo_regret(pol, env, experts, 300, 24, 5, {4, false});
  for (std::size_t r = 0; r < 24; ++r) EXPECT_EQ(a.records[r].summary.realized, b.records[r].summary.realized);
  EXPECT_EQ(a.mean_regret, b.mean_regret);
  EXPECT_EQ(a.mean_pseudo, b.mean_pseudo);
}

TEST(MonteCarlo, StderrScalesWithReps) {
  BernoulliEnv env;
  env.means = {{0, {0.3, 0.6}}};
  PolicySpec pol;
  pol.algorithm = Algorithm::exp3p;
  auto small = monte_carlo_regret(pol, env, {}, 100, 100, 1, {4, false});
  auto large = monte_carlo_regret(pol, env, {}, 100, 400, 2, {4, false});
  EXPECT_NEAR(small.stderr_regret / large.stderr_regret, 2.0, 0.4);
}

TEST(MonteCarlo, DegenerateOracleInstanceRegretBelowGamma) {
  // Without the confidence bonus the only residual loss is the gamma floor.
  const auto env = context_free_gaussian({1.0, 0.0, 0.0}, {1e-9, 1e-9, 1e-9});
  const std::vector<ExpertSpec> experts = {OracleExpert{env.means}, FixedArmExpert{1}, UniformExpert{}};
  PolicySpec pol;
  pol.alpha = 0.0;
  const std::size_t horizon = 20000;
  auto res = monte_carlo_regret(pol, env, experts, horizon, 4, 3, {4, false});
  const double gamma = exp4p_params(3, 3, horizon, 0.05).gamma;
  EXPECT_LE(res.mean_pseudo / horizon, gamma);
}

TEST(MonteCarlo, DegenerateInstanceAverageRegretShrinksWithHorizon) {
  const auto env = context_free_gaussian({1.0, 0.0, 0.0}, {1e-9, 1e-9, 1e-9});
  const std::vector<ExpertSpec> experts = {OracleExpert{env.means}, FixedArmExpert{1}, UniformExpert{}};
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t horizon : {1000u, 8000u, 64000u}) {
    auto res = monte_carlo_regret(PolicySpec{}, env, experts, horizon, 4, 3, {4, false});
    const double per_step = res.mean_pseudo / static_cast<double>(horizon);
    EXPECT_LT(per_step, previous) << horizon;
    previous = per_step;
  }
}

TEST(MonteCarlo, PseudoBelowRealizedOnAverage) {
  BernoulliEnv env;
  env.means = {{0, {0.4, 0.6, 0.5}}};
  const std::vector<ExpertSpec> experts = {UniformExpert{}, FixedArmExpert{0}, FixedArmExpert{1}};
  PolicySpec pol;
  auto res = monte_carlo_regret(pol, env, experts, 500, 200, 8, {4, false});
  EXPECT_GE(res.mean_regret, res.mean_pseudo - 3.0 * res.stderr_regret);
}

TEST(MonteCarlo, RejectsZeroReps) {
  BernoulliEnv env;
  env.means = {{0, {0.4, 0.6}}};
  EXPECT_THROW(monte_carlo_regret(PolicySpec{}, env, {}, 10, 0, 1), InvalidInput);
}

TEST(Aggregate, OrderInsensitive) {
  std::mt19937_64 gen(2);
  std::normal_distribution<double> n(100.0, 30.0);
  std::vector<double> v(1001);
  for (double& x : v) x = n(gen);
  auto a = aggregate(v);
  std::shuffle(v.begin(), v.end(), gen);
  auto b = aggregate(v);
  EXPECT_NEAR(a.mean, b.mean, 1e-12 * std::abs(a.mean));
  EXPECT_NEAR(a.stderr_mean, b.stderr_mean, 1e-12 * a.stderr_mean);
}

TEST(PlayGame, TruncationViolationsCounted) {
  const auto env = context_free_gaussian({0.0, 0.0}, {1.0, 1.0});
  PolicySpec pol;
  pol.algorithm = Algorithm::exp3p;
  pol.truncation = 0.5;
  SeededRng rng(1);
  auto g = play_game(pol, env, {}, 1000, rng);
  // P(|Z| > 0.5) = 0.617 per arm-step.
  EXPECT_NEAR(g.violations / 2000.0, 0.617, 0.04);
  EXPECT_LE(g.violations, 2000u);
}

TEST(Trace, FinalRowMatchesSummary) {
  BernoulliEnv env;
  env.means = {{0, {0.4, 0.6}}};
  const std::vector<ExpertSpec> experts = {UniformExpert{}, FixedArmExpert{1}};
  SeededRng rng(3);
  auto g = play_game(PolicySpec{}, env, experts, 100, rng);
  auto rows = trace(g.log);
  ASSERT_EQ(rows.size(), 100u);
  EXPECT_NEAR(rows.back().regret, summarize(g, env).realized, 1e-12);
}
