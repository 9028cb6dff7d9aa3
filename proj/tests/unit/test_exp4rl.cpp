#include <gtest/gtest.h>

#include <cmath>

#include "expbandit/exp4rl.hpp"

using namespace expbandit;
using namespace expbandit::rl;

namespace {

// Probability that a fair walk on 0..L-1, reflecting at 0 and absorbed at L-1,
// reaches L-1 within `steps` moves, by forward propagation of the state law.
double absorption_oracle(std::size_t length, std::size_t steps) {
  std::vector<double> law(length, 0.0);
  law[0] = 1.0;
  for (std::size_t t = 0; t < steps; ++t) {
    std::vector<double> next(length, 0.0);
    next[length - 1] = law[length - 1];
    for (std::size_t s = 0; s + 1 < length; ++s) {
      next[s == 0 ? 0 : s - 1] += 0.5 * law[s];
      next[s + 1] += 0.5 * law[s];
    }
    law = next;
  }
  return law[length - 1];
}

RlConfig small_config() {
  RlConfig c;
  c.chain_length = 6;
  c.episodes = 20;
  c.steps_per_episode = 20;
  return c;
}

}  // namespace

TEST(NetworkDistribution, Examples) {
  auto t = make_trust(3, 0.05, 0.1);
  const auto uniform = network_distribution(t);
  for (double v : uniform.entries()) EXPECT_NEAR(v, 1.0 / 3.0, 1e-15);
  TrustVector w{{0.0, std::log(3.0)}, 0.05, 0.1};
  auto rho = network_distribution(w);
  EXPECT_NEAR(rho[0], 0.2625, 1e-12);
  EXPECT_NEAR(rho[1], 0.7375, 1e-12);
  TrustVector all{{0.0, 30.0}, 1.0, 0.1};
  EXPECT_DOUBLE_EQ(network_distribution(all)[0], 0.5);
}

TEST(EpsilonGreedy, Examples) {
  const std::vector<double> q = {0.1, 0.2, 0.9, 0.3};
  auto p = epsilon_greedy(q, 0.3);
  EXPECT_NEAR(p[0], 0.1, 1e-15);
  EXPECT_NEAR(p[1], 0.1, 1e-15);
  EXPECT_NEAR(p[2], 0.7, 1e-15);
  EXPECT_NEAR(p[3], 0.1, 1e-15);
  auto greedy = epsilon_greedy(q, 0.0);
  EXPECT_EQ(greedy[2], 1.0);
  const std::vector<double> flat = {0.5, 0.5, 0.5};
  EXPECT_NEAR(epsilon_greedy(flat, 0.4)[0], 0.6, 1e-15);
  const std::vector<double> one = {1.0};
  EXPECT_THROW(epsilon_greedy(one, 0.1), InvalidInput);
  EXPECT_THROW(epsilon_greedy(q, 1.5), InvalidInput);
}

TEST(TrustUpdate, FullRewardScalesEveryWeight) {
  TrustVector t{{0.0, 1.0}, 0.05, 0.1};
  const std::vector<ProbabilityVector> pol = {ProbabilityVector({0.9, 0.1}), ProbabilityVector({0.2, 0.8})};
  auto before = network_distribution(t);
  auto u = trust_update(t, pol, 1, 2.0, 2.0, 0.01);
  EXPECT_NEAR(u.log_weights[0], 10.0, 1e-12);
  EXPECT_NEAR(u.log_weights[1], 11.0, 1e-12);
  auto after = network_distribution(u);
  EXPECT_NEAR(after[0], before[0], 1e-14);
}

TEST(TrustUpdate, HandComputedSingleExpert) {
  TrustVector t{{0.0}, 0.05, 0.1};
  const std::vector<ProbabilityVector> pol = {ProbabilityVector({0.7, 0.3})};
  auto u = trust_update(t, pol, 0, 0.0, 1.0, 0.01);
  const double x0 = 1.0 - 1.0 / 0.71;
  EXPECT_NEAR(x0, -0.40845, 1e-5);
  const double y = 0.5 * (x0 + 1.0);
  EXPECT_NEAR(y, 0.29577, 1e-5);
  EXPECT_NEAR(u.log_weights[0], y / 0.1, 1e-12);
}

TEST(TrustUpdate, IdenticalPoliciesStayEqualAndRejectsBadMax) {
  TrustVector t = make_trust(2, 0.05, 0.1);
  SeededRng rng(1);
  for (int i = 0; i < 500; ++i) {
    const double a = rng.uniform();
    const ProbabilityVector p({a, 1.0 - a});
    const std::vector<ProbabilityVector> pol = {p, p};
    t = trust_update(t, pol, rng.uniform_index(2), rng.uniform(), 1.0, 0.01);
    ASSERT_EQ(t.log_weights[0], t.log_weights[1]);
  }
  const std::vector<ProbabilityVector> pol = {ProbabilityVector({0.5, 0.5}), ProbabilityVector({0.5, 0.5})};
  EXPECT_THROW(trust_update(t, pol, 0, 0.0, 0.0, 0.01), InvalidInput);
  EXPECT_THROW(trust_update(t, pol, 0, 0.0, 1.0, 0.0), InvalidInput);
}

TEST(TrustUpdate, StepBoundedByEstimatorRange) {
  SeededRng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const double delta = 0.01 + rng.uniform();
    const double z = 0.05 + rng.uniform();
    TrustVector t{{rng.normal(), rng.normal(), rng.normal()}, 0.1, z};
    std::vector<ProbabilityVector> pol;
    for (int k = 0; k < 3; ++k) {
      const double a = rng.uniform();
      pol.push_back(ProbabilityVector({a, 1.0 - a}));
    }
    const double n_r = 0.5 + rng.uniform();
    auto u = trust_update(t, pol, rng.uniform_index(2), rng.uniform() * n_r, n_r, delta);
    for (std::size_t k = 0; k < 3; ++k) {
      ASSERT_LE(std::abs(u.log_weights[k] - t.log_weights[k]), (1.0 + 1.0 / delta) / z + 1e-12);
      ASSERT_TRUE(std::isfinite(u.log_weights[k]));
    }
  }
}

TEST(QUpdate, Examples) {
  QTable q(3, 2, 1.0, 0.0);
  auto u = q_update(q, {0, 1, 0.7, 2, 0.0}, 0.0);
  EXPECT_DOUBLE_EQ(u.at(0, 1), 0.7);
  EXPECT_DOUBLE_EQ(q.at(0, 1), 0.0);
  QTable b(2, 2, 0.5, 0.5);
  b.set(1, 0, 2.0);
  auto v = q_update(b, {0, 0, 1.0, 1, 0.0}, 0.5);
  EXPECT_DOUBLE_EQ(v.at(0, 0), 0.5 * (1.0 + 0.5 + 0.5 * 2.0));
  EXPECT_THROW(QTable(2, 2, 0.0, 0.5), InvalidInput);
  EXPECT_THROW(QTable(2, 2, 0.5, 1.0), InvalidInput);
}

TEST(QUpdate, BellmanConsistentTableIsFixed) {
  // Chain 0 -> 1 -> 2 with reward 1 on entering 2; state 2 has value 0.
  QTable q(3, 1, 0.3, 0.9);
  q.set(1, 0, 1.0);
  q.set(0, 0, 0.9);
  auto a = q_update(q, {0, 0, 0.0, 1, 0.0}, 0.0);
  auto b = q_update(a, {1, 0, 1.0, 2, 0.0}, 0.0);
  EXPECT_DOUBLE_EQ(b.at(0, 0), 0.9);
  EXPECT_DOUBLE_EQ(b.at(1, 0), 1.0);
}

TEST(QUpdate, ConvergesToValueIteration) {
  // Three-state cycle: action 0 advances (reward 1 when leaving state 2), action 1 stays (reward 0.1).
  const double gamma = 0.9;
  auto next = [](std::size_t s, std::size_t a) { return a == 0 ? (s + 1) % 3 : s; };
  auto reward = [](std::size_t s, std::size_t a) { return a == 0 ? (s == 2 ? 1.0 : 0.0) : 0.1; };
  std::vector<double> oracle(6, 0.0);
  for (int it = 0; it < 2000; ++it) {
    std::vector<double> n(6);
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 2; ++a) {
        const std::size_t sp = next(s, a);
        n[s * 2 + a] = reward(s, a) + gamma * std::max(oracle[sp * 2], oracle[sp * 2 + 1]);
      }
    oracle = n;
  }
  QTable q(3, 2, 0.5, gamma);
  for (int sweep = 0; sweep < 10000; ++sweep)
    for (std::size_t s = 0; s < 3; ++s)
      for (std::size_t a = 0; a < 2; ++a) q_update_in_place(q, {s, a, reward(s, a), next(s, a), 0.0}, 0.0);
  for (std::size_t s = 0; s < 3; ++s)
    for (std::size_t a = 0; a < 2; ++a) EXPECT_NEAR(q.at(s, a), oracle[s * 2 + a], 1e-6);
}

TEST(RndLite, ZeroWhenPredictorEqualsTarget) {
  const std::vector<double> m = {0.1, -0.2, 0.3, 0.4, 0.5, -0.6};
  RndLite r(3, 2, 0.1, m, m);
  for (std::size_t s = 0; s < 3; ++s) EXPECT_EQ(intrinsic_reward(r, s), 0.0);
}

TEST(RndLite, TrainingConvergesOnVisitedStateOnly) {
  SeededRng rng(3);
  RndLite r(5, 16, 0.05, rng);
  const double untouched = r.intrinsic(4);
  double prev = r.intrinsic(1);
  EXPECT_NEAR(prev, 1.0, 1e-12);
  const std::vector<std::size_t> batch = {1};
  for (int i = 0; i < 1000; ++i) {
    r = rnd_train(r, batch);
    const double now = r.intrinsic(1);
    ASSERT_LE(now, prev);
    prev = now;
  }
  EXPECT_LT(r.intrinsic(1), 1e-4);
  EXPECT_NEAR(r.intrinsic(4), untouched, 0.01 * untouched);
}

TEST(RndLite, ScalingIsQuadratic) {
  const std::vector<double> t = {0.3, -0.5, 0.25, 0.9};
  const std::vector<double> p = {0.1, 0.2, -0.4, 0.0};
  const double c = 3.0;
  std::vector<double> tc(t), pc(p);
  for (double& v : tc) v *= c;
  for (double& v : pc) v *= c;
  RndLite a(2, 2, 0.1, t, p), b(2, 2, 0.1, tc, pc);
  for (std::size_t s = 0; s < 2; ++s) EXPECT_NEAR(b.intrinsic(s), c * c * a.intrinsic(s), 1e-12);
}

TEST(RndLite, TargetIsImmutableUnderTraining) {
  SeededRng rng(4);
  RndLite r(4, 8, 0.1, rng);
  const auto target = r.target();
  const std::vector<std::size_t> batch = {0, 1, 2, 3, 3};
  r.train(batch);
  EXPECT_EQ(r.target(), target);
}

TEST(ReplayBuffer, FifoEviction) {
  ReplayBuffer b(4);
  for (std::size_t i = 0; i < 7; ++i) b.push({i, 0, 0.0, i + 1, 0.0});
  ASSERT_EQ(b.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(b[i].state, i + 3);
  EXPECT_THROW(ReplayBuffer(0), InvalidInput);
}

TEST(ChainEnv, Transitions) {
  ChainEnv env{5};
  EXPECT_EQ(env.step(0, 0).next_state, 0u);
  EXPECT_EQ(env.step(2, 0).next_state, 1u);
  auto last = env.step(3, 1);
  EXPECT_EQ(last.next_state, 4u);
  EXPECT_EQ(last.reward, 1.0);
  EXPECT_TRUE(last.done);
  EXPECT_FALSE(env.step(2, 1).done);
  EXPECT_THROW(env.step(0, 2), InvalidInput);
}

TEST(Agent, UniformRandomWalkMatchesAbsorptionOracle) {
  // With K = 2, eps = 1/2 puts mass 1/2 on each action.
  const std::size_t seeds = 20000;
  std::size_t hits = 0;
  for (std::size_t seed = 0; seed < seeds; ++seed) {
    RlConfig c;
    c.experts = {ExpertKind::plain};
    c.epsilon = 0.5;
    c.episodes = 1;
    c.seed = seed;
    Exp4RlAgent agent(c);
    hits += agent.run_episode(ChainEnv{15}, 1).goal_hits;
  }
  const double p = absorption_oracle(15, 60);
  const double rate = static_cast<double>(hits) / seeds;
  EXPECT_NEAR(rate, p, 4.0 * std::sqrt(p * (1.0 - p) / seeds));
}

TEST(Agent, PresolvedGreedyReachesGoalInLengthMinusOneSteps) {
  RlConfig c;
  c.epsilon = 0.0;
  c.experts = {ExpertKind::plain, ExpertKind::rnd};
  Exp4RlAgent agent(c);
  for (QTable& q : agent.q_tables())
    for (std::size_t s = 0; s < 15; ++s) q.set(s, 1, 1.0);
  auto rec = agent.run_episode(ChainEnv{15}, 1);
  EXPECT_EQ(rec.goal_hits, 1u);
  EXPECT_EQ(rec.steps, 14u);
  EXPECT_EQ(rec.ext_return, 1.0);
}

TEST(Agent, DeterministicTraining) {
  const auto c = small_config();
  auto a = run_training(c);
  auto b = run_training(c);
  ASSERT_EQ(a.episodes.size(), b.episodes.size());
  for (std::size_t i = 0; i < a.episodes.size(); ++i) {
    EXPECT_EQ(a.episodes[i].trust, b.episodes[i].trust);
    EXPECT_EQ(a.episodes[i].intrinsic_mean, b.episodes[i].intrinsic_mean);
    EXPECT_EQ(a.episodes[i].goal_hits, b.episodes[i].goal_hits);
  }
}

TEST(Agent, SymmetricExpertsKeepEqualTrust) {
  auto c = small_config();
  c.experts = {ExpertKind::plain, ExpertKind::plain};
  auto curve = run_training(c);
  EXPECT_LE(curve.max_trust_spread, 1e-12);
  c.experts = {ExpertKind::rnd, ExpertKind::rnd};
  EXPECT_LE(run_training(c).max_trust_spread, 1e-12);
}

TEST(Agent, RhoFloorAndRewardMaxMonotone) {
  auto c = small_config();
  c.experts = {ExpertKind::rnd, ExpertKind::plain, ExpertKind::plain};
  c.trust_delta = 0.01;
  Exp4RlAgent agent(c);
  double prev_max = agent.max_reward();
  EXPECT_EQ(prev_max, kRewardFloor);
  for (std::size_t ep = 1; ep <= c.episodes; ++ep) {
    auto rec = agent.run_episode(ChainEnv{c.chain_length}, ep);
    EXPECT_GE(rec.min_rho, c.eta / 3.0 - 1e-15);
    EXPECT_GE(agent.max_reward(), prev_max);
    prev_max = agent.max_reward();
    // Weights live in log space; normalized values may underflow but never go negative.
    for (double lw : agent.trust().log_weights) EXPECT_TRUE(std::isfinite(lw));
    double s = 0.0;
    for (double w : rec.trust) {
      EXPECT_GE(w, 0.0);
      s += w;
    }
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Agent, ConfigValidation) {
  RlConfig c;
  c.epsilon = 1.5;
  EXPECT_THROW(c.validate(), InvalidInput);
  c = RlConfig{};
  c.experts.clear();
  EXPECT_THROW(Exp4RlAgent{c}, InvalidInput);
  RlConfig d;
  Exp4RlAgent agent(d);
  EXPECT_THROW(agent.run_episode(ChainEnv{5}, 1), InvalidInput);
}
