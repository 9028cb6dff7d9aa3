#include "expbandit/exp4rl.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <string>

namespace expbandit::rl {

std::vector<double> TrustVector::normalized() const { return softmax(log_weights); }

TrustVector make_trust(std::size_t experts, double eta, double temperature) {
  if (experts == 0) throw InvalidInput("at least one expert is required");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("eta must lie in (0,1]");
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw InvalidInput("temperature must be positive");
  TrustVector t;
  t.log_weights.assign(experts, 0.0);
  t.eta = eta;
  t.temperature = temperature;
  return t;
}

ProbabilityVector network_distribution(const TrustVector& trust) {
  const std::size_t e = trust.size();
  if (e == 0) throw InvalidInput("empty trust vector");
  const std::vector<double> w = trust.normalized();
  std::vector<double> rho(e);
  const double floor = trust.eta / static_cast<double>(e);
  for (std::size_t k = 0; k < e; ++k) rho[k] = (1.0 - trust.eta) * w[k] + floor;
  return ProbabilityVector(std::move(rho));
}

std::size_t greedy_action(std::span<const double> q_row) {
  if (q_row.empty()) throw InvalidInput("empty Q row");
  std::size_t best = 0;
  for (std::size_t j = 1; j < q_row.size(); ++j) {
    if (q_row[j] > q_row[best]) best = j;
  }
  return best;
}

ProbabilityVector epsilon_greedy(std::span<const double> q_row, double epsilon) {
  const std::size_t k = q_row.size();
  if (k < 2) throw InvalidInput("epsilon-greedy needs at least two actions");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("epsilon must lie in [0,1]");
  const std::size_t star = greedy_action(q_row);
  std::vector<double> pi(k, epsilon / static_cast<double>(k - 1));
  pi[star] = 1.0 - epsilon;
  return ProbabilityVector(std::move(pi));
}

TrustVector trust_update(TrustVector trust, std::span<const ProbabilityVector> policies, std::size_t action,
                         double reward, double max_reward, double floor_delta) {
  if (!(max_reward > 0.0)) throw InvalidInput("running reward maximum must be positive");
  if (!(floor_delta > 0.0)) throw InvalidInput("trust Delta must be positive");
  if (policies.size() != trust.size()) throw InvalidInput("one policy per expert is required");
  const double loss = 1.0 - reward / max_reward;
  std::vector<double> y(trust.size());
  for (std::size_t k = 0; k < trust.size(); ++k) {
    const ProbabilityVector& p = policies[k];
    if (action >= p.size()) throw InvalidInput("action out of range");
    std::vector<double> x(p.size(), 1.0);
    x[action] = 1.0 - loss / (p[action] + floor_delta);
    y[k] = pairwise_sum(x) / static_cast<double>(p.size());
  }
  for (std::size_t k = 0; k < trust.size(); ++k) trust.log_weights[k] += y[k] / trust.temperature;
  return trust;
}

QTable::QTable(std::size_t states, std::size_t actions, double learning_rate, double discount)
    : states_(states), actions_(actions), learning_rate_(learning_rate), discount_(discount),
      values_(states * actions, 0.0) {
  if (states == 0 || actions == 0) throw InvalidInput("Q table needs states and actions");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InvalidInput("learning rate must lie in (0,1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw InvalidInput("discount must lie in [0,1)");
}

void QTable::set(std::size_t s, std::size_t a, double v) {
  if (s >= states_ || a >= actions_) throw InvalidInput("Q index out of range");
  if (!std::isfinite(v)) throw InvalidInput("Q values must be finite");
  values_[s * actions_ + a] = v;
}

std::span<const double> QTable::row(std::size_t s) const {
  if (s >= states_) throw InvalidInput("state out of range");
  return std::span<const double>(values_).subspan(s * actions_, actions_);
}

void q_update_in_place(QTable& table, const Transition& tr, double bonus) {
  if (tr.state >= table.states() || tr.next_state >= table.states() || tr.action >= table.actions()) {
    throw InvalidInput("transition out of range");
  }
  const auto next = table.row(tr.next_state);
  const double best_next = *std::max_element(next.begin(), next.end());
  const double lr = table.learning_rate();
  const double target = tr.reward + bonus + table.discount() * best_next;
  table.set(tr.state, tr.action, (1.0 - lr) * table.at(tr.state, tr.action) + lr * target);
}

QTable q_update(QTable table, const Transition& tr, double bonus) {
  q_update_in_place(table, tr, bonus);
  return table;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw InvalidInput("buffer capacity must be positive");
}

void ReplayBuffer::push(const Transition& tr) {
  if (items_.size() == capacity_) items_.pop_front();
  items_.push_back(tr);
}

RndLite::RndLite(std::size_t states, std::size_t width, double learning_rate, SeededRng& rng)
    : states_(states), width_(width), learning_rate_(learning_rate) {
  if (states == 0 || width == 0) throw InvalidInput("RND needs states and width");
  if (!(learning_rate > 0.0 && learning_rate < 0.5)) throw InvalidInput("RND learning rate must lie in (0,0.5)");
  const double scale = 1.0 / std::sqrt(static_cast<double>(width));
  target_.resize(width * states);
  for (double& v : target_) v = (rng.next_u64() >> 63) != 0 ? scale : -scale;
  predictor_.assign(width * states, 0.0);
}

RndLite::RndLite(std::size_t states, std::size_t width, double learning_rate, std::vector<double> target,
                 std::vector<double> predictor)
    : states_(states), width_(width), learning_rate_(learning_rate), target_(std::move(target)),
      predictor_(std::move(predictor)) {
  if (states == 0 || width == 0) throw InvalidInput("RND needs states and width");
  if (!(learning_rate > 0.0 && learning_rate < 0.5)) throw InvalidInput("RND learning rate must lie in (0,0.5)");
  if (target_.size() != states * width || predictor_.size() != states * width) {
    throw InvalidInput("RND matrices must be width x states");
  }
}

double RndLite::intrinsic(std::size_t state) const {
  if (state >= states_) throw InvalidInput("state out of range");
  double sum = 0.0;
  for (std::size_t r = 0; r < width_; ++r) {
    const double d = predictor_[r * states_ + state] - target_[r * states_ + state];
    sum += d * d;
  }
  return sum;
}

void RndLite::train(std::span<const std::size_t> states) {
  // With one-hot inputs the gradient of |P e_s - T e_s|^2 touches column s only.
  for (std::size_t s : states) {
    if (s >= states_) throw InvalidInput("state out of range");
    for (std::size_t r = 0; r < width_; ++r) {
      double& p = predictor_[r * states_ + s];
      p -= learning_rate_ * 2.0 * (p - target_[r * states_ + s]);
    }
  }
}

double intrinsic_reward(const RndLite& rnd, std::size_t state) { return rnd.intrinsic(state); }

RndLite rnd_train(RndLite rnd, std::span<const std::size_t> states) {
  rnd.train(states);
  return rnd;
}

ChainEnv::Step ChainEnv::step(std::size_t state, std::size_t action) const {
  if (length < 3) throw InvalidInput("chain length must be at least 3");
  if (state >= length) throw InvalidInput("state out of range");
  if (action > 1) throw InvalidInput("chain actions are 0 (left) and 1 (right)");
  std::size_t next = state;
  if (action == 0) {
    next = state == 0 ? 0 : state - 1;
  } else {
    next = std::min(state + 1, goal());
  }
  const bool done = next == goal();
  return {next, done ? 1.0 : 0.0, done};
}

void RlConfig::validate() const {
  if (chain_length < 3) throw InvalidInput("rl.length must be at least 3");
  if (episodes == 0) throw InvalidInput("rl.episodes must be positive");
  if (steps_per_episode == 0) throw InvalidInput("rl.steps must be positive");
  if (experts.empty()) throw InvalidInput("rl.experts must list at least one expert");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InvalidInput("rl.epsilon must lie in [0,1]");
  if (!(eta > 0.0 && eta <= 1.0)) throw InvalidInput("rl.eta must lie in (0,1]");
  if (!(temperature > 0.0)) throw InvalidInput("rl.temperature must be positive");
  if (!(trust_delta > 0.0)) throw InvalidInput("rl.delta must be positive");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) throw InvalidInput("rl.learning_rate must lie in (0,1]");
  if (!(discount >= 0.0 && discount < 1.0)) throw InvalidInput("rl.discount must lie in [0,1)");
  if (buffer_capacity == 0) throw InvalidInput("rl.buffer must be positive");
  if (batch_size == 0) throw InvalidInput("rl.batch must be positive");
  if (rnd_width == 0) throw InvalidInput("rl.rnd_width must be positive");
  if (!(rnd_learning_rate > 0.0 && rnd_learning_rate < 0.5)) throw InvalidInput("rl.rnd_lr must lie in (0,0.5)");
  if (!(intrinsic_scale >= 0.0)) throw InvalidInput("rl.intrinsic_scale must be nonnegative");
}

namespace {

// Stream 0 drives acting and replay sampling, stream 1 initializes the RND target.
RndLite make_rnd(const RlConfig& c) {
  SeededRng init(c.seed, 1);
  return RndLite(c.chain_length, c.rnd_width, c.rnd_learning_rate, init);
}

}  // namespace

Exp4RlAgent::Exp4RlAgent(const RlConfig& config)
    : config_((config.validate(), config)),
      rng_(config.seed, 0),
      trust_(make_trust(config.experts.size(), config.eta, config.temperature)),
      rnd_(make_rnd(config)),
      buffer_(config.buffer_capacity),
      max_reward_(kRewardFloor) {
  q_tables_.reserve(config.experts.size());
  for (std::size_t k = 0; k < config.experts.size(); ++k) {
    q_tables_.emplace_back(config.chain_length, 2, config.learning_rate, config.discount);
  }
}

EpisodeRecord Exp4RlAgent::run_episode(const ChainEnv& env, std::size_t episode_index) {
  if (env.length != config_.chain_length) throw InvalidInput("environment length does not match the agent");
  EpisodeRecord rec;
  rec.episode = episode_index;
  const std::size_t e = q_tables_.size();
  std::vector<ProbabilityVector> policies;
  policies.reserve(e);
  double intrinsic_total = 0.0;
  std::size_t s = env.start();
  for (std::size_t i = 0; i < config_.steps_per_episode; ++i) {
    const ProbabilityVector rho = network_distribution(trust_);
    rec.min_rho = std::min(rec.min_rho, rho.min());
    const std::size_t chosen = sample_index(rho, rng_);
    policies.clear();
    for (const QTable& q : q_tables_) policies.push_back(epsilon_greedy(q.row(s), config_.epsilon));
    const std::size_t a = sample_index(policies[chosen], rng_);
    const ChainEnv::Step step = env.step(s, a);
    max_reward_ = std::max(max_reward_, step.reward);
    const std::size_t indicator =
        config_.indicator == TrustIndicator::executed ? a : greedy_action(q_tables_[chosen].row(s));
    trust_ = trust_update(std::move(trust_), policies, indicator, step.reward, max_reward_, config_.trust_delta);
    const std::vector<double> w = trust_.normalized();
    for (std::size_t k = 1; k < e; ++k) rec.max_trust_spread = std::max(rec.max_trust_spread, std::abs(w[0] - w[k]));
    const double c = config_.intrinsic_scale * rnd_.intrinsic(step.next_state);
    intrinsic_total += c;
    buffer_.push({s, a, step.reward, step.next_state, c});
    rec.ext_return += step.reward;
    ++rec.steps;
    s = step.next_state;
    if (step.done) {
      ++rec.goal_hits;
      break;
    }
  }
  rec.intrinsic_mean = rec.steps == 0 ? 0.0 : intrinsic_total / static_cast<double>(rec.steps);
  rec.learned = learn();
  rec.trust = trust_.normalized();
  return rec;
}

bool Exp4RlAgent::learn() {
  if (buffer_.empty()) {
    std::cerr << "warning: replay buffer is empty, skipping update\n";
    return false;
  }
  const std::size_t n = buffer_.size();
  const std::size_t batch = config_.batch_size;
  const std::size_t batches = (n + batch - 1) / batch;
  std::vector<std::size_t> idx(batch);
  std::vector<std::size_t> visited(batch);
  for (std::size_t b = 0; b < batches; ++b) {
    for (std::size_t i = 0; i < batch; ++i) {
      idx[i] = rng_.uniform_index(n);
      visited[i] = buffer_[idx[i]].next_state;
    }
    for (std::size_t k = 0; k < q_tables_.size(); ++k) {
      const bool with_bonus = config_.experts[k] == ExpertKind::rnd;
      for (std::size_t i : idx) {
        const Transition& tr = buffer_[i];
        q_update_in_place(q_tables_[k], tr, with_bonus ? tr.intrinsic : 0.0);
      }
    }
    rnd_.train(visited);
  }
  return true;
}

TrainingCurve run_training(const RlConfig& config) {
  Exp4RlAgent agent(config);
  ChainEnv env{config.chain_length};
  TrainingCurve curve;
  curve.episodes.reserve(config.episodes);
  for (std::size_t ep = 1; ep <= config.episodes; ++ep) {
    EpisodeRecord rec = agent.run_episode(env, ep);
    curve.total_goal_hits += rec.goal_hits;
    curve.min_rho = std::min(curve.min_rho, rec.min_rho);
    curve.max_trust_spread = std::max(curve.max_trust_spread, rec.max_trust_spread);
    curve.episodes.push_back(std::move(rec));
  }
  return curve;
}

}  // namespace expbandit::rl
