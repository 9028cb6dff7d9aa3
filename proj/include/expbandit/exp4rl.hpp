#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <vector>

#include "expbandit/core.hpp"

namespace expbandit::rl {

// Trust coefficients over E Q-experts, stored as logarithms.
struct TrustVector {
  std::vector<double> log_weights;
  double eta = 0.05;
  double temperature = 0.1;  // z

  std::size_t size() const { return log_weights.size(); }
  // w_k / sum_j w_j
  std::vector<double> normalized() const;
};

TrustVector make_trust(std::size_t experts, double eta, double temperature);

// rho_k = (1 - eta) w_k / sum_j w_j + eta / E
ProbabilityVector network_distribution(const TrustVector& trust);

// Lowest index wins ties.
std::size_t greedy_action(std::span<const double> q_row);

// (1 - eps) on the greedy action, eps / (K - 1) on each other action.
ProbabilityVector epsilon_greedy(std::span<const double> q_row, double epsilon);

// x_kj = 1 - [j == action] / (P_kj + floor_delta) * (1 - reward / max_reward),
// y_k = mean_j x_kj, w_k <- w_k * exp(y_k / z) for every expert simultaneously.
TrustVector trust_update(TrustVector trust, std::span<const ProbabilityVector> policies, std::size_t action,
                         double reward, double max_reward, double floor_delta);

struct Transition {
  std::size_t state = 0;
  std::size_t action = 0;
  double reward = 0.0;
  std::size_t next_state = 0;
  // RND error of next_state at the time the transition was stored.
  double intrinsic = 0.0;
};

class QTable {
 public:
  QTable(std::size_t states, std::size_t actions, double learning_rate, double discount);

  std::size_t states() const { return states_; }
  std::size_t actions() const { return actions_; }
  double learning_rate() const { return learning_rate_; }
  double discount() const { return discount_; }

  double at(std::size_t s, std::size_t a) const { return values_[s * actions_ + a]; }
  void set(std::size_t s, std::size_t a, double v);
  std::span<const double> row(std::size_t s) const;

 private:
  std::size_t states_;
  std::size_t actions_;
  double learning_rate_;
  double discount_;
  std::vector<double> values_;
};

// Q(s,a) <- (1 - lr) Q(s,a) + lr (r + bonus + discount * max_a' Q(s', a'))
QTable q_update(QTable table, const Transition& tr, double bonus);
void q_update_in_place(QTable& table, const Transition& tr, double bonus);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& tr);
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  const Transition& operator[](std::size_t i) const { return items_[i]; }

 private:
  std::size_t capacity_;
  std::deque<Transition> items_;
};

// Linear random network distillation on one-hot state features: the target
// is a fixed random +-1/sqrt(d) matrix, the predictor a learned matrix of the
// same shape.
class RndLite {
 public:
  RndLite(std::size_t states, std::size_t width, double learning_rate, SeededRng& rng);
  // Explicit d x S matrices, row-major.
  RndLite(std::size_t states, std::size_t width, double learning_rate, std::vector<double> target,
          std::vector<double> predictor);

  std::size_t states() const { return states_; }
  std::size_t width() const { return width_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<double>& target() const { return target_; }
  const std::vector<double>& predictor() const { return predictor_; }

  double intrinsic(std::size_t state) const;
  // One squared-error gradient step per listed state.
  void train(std::span<const std::size_t> states);

 private:
  std::size_t states_;
  std::size_t width_;
  double learning_rate_;
  std::vector<double> target_;
  std::vector<double> predictor_;
};

double intrinsic_reward(const RndLite& rnd, std::size_t state);
RndLite rnd_train(RndLite rnd, std::span<const std::size_t> states);

// States 0..L-1, start at 0, action 0 = left (reflecting at 0), 1 = right.
// Reaching L-1 pays 1 and ends the episode.
struct ChainEnv {
  std::size_t length = 15;

  struct Step {
    std::size_t next_state;
    double reward;
    bool done;
  };

  std::size_t start() const { return 0; }
  std::size_t goal() const { return length - 1; }
  Step step(std::size_t state, std::size_t action) const;
};

enum class ExpertKind { rnd, plain };
enum class TrustIndicator { executed, greedy };

struct RlConfig {
  std::size_t chain_length = 15;
  std::size_t episodes = 200;
  std::size_t steps_per_episode = 60;
  std::vector<ExpertKind> experts = {ExpertKind::rnd, ExpertKind::plain};
  double epsilon = 0.2;
  double eta = 0.05;
  double temperature = 0.1;
  // Small values make the trust vector lock onto whichever expert is sampled
  // at the first disagreement; 100 keeps the mixture open long enough to explore.
  double trust_delta = 100.0;
  double learning_rate = 0.5;
  double discount = 0.95;
  std::size_t buffer_capacity = 1000;
  std::size_t batch_size = 32;
  std::size_t rnd_width = 16;
  double rnd_learning_rate = 0.05;
  double intrinsic_scale = 1.0;
  TrustIndicator indicator = TrustIndicator::executed;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpisodeRecord {
  std::size_t episode = 0;
  double ext_return = 0.0;
  double intrinsic_mean = 0.0;
  std::size_t goal_hits = 0;
  std::size_t steps = 0;
  std::vector<double> trust;
  // Smallest network-selection probability seen during the episode.
  double min_rho = 1.0;
  // Largest |w_1 - w_k| between normalized trusts seen during the episode.
  double max_trust_spread = 0.0;
  bool learned = true;
};

class Exp4RlAgent {
 public:
  explicit Exp4RlAgent(const RlConfig& config);

  const RlConfig& config() const { return config_; }
  const TrustVector& trust() const { return trust_; }
  const std::vector<QTable>& q_tables() const { return q_tables_; }
  std::vector<QTable>& q_tables() { return q_tables_; }
  const RndLite& rnd() const { return rnd_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  double max_reward() const { return max_reward_; }

  // Acts for one episode (trust updated every step), then trains from the buffer.
  EpisodeRecord run_episode(const ChainEnv& env, std::size_t episode_index);
  // Minibatch Q updates for every expert plus RND training; false when the buffer is empty.
  bool learn();

 private:
  RlConfig config_;
  SeededRng rng_;
  TrustVector trust_;
  std::vector<QTable> q_tables_;
  RndLite rnd_;
  ReplayBuffer buffer_;
  double max_reward_;
};

struct TrainingCurve {
  std::vector<EpisodeRecord> episodes;
  std::size_t total_goal_hits = 0;
  double min_rho = 1.0;
  double max_trust_spread = 0.0;
};

TrainingCurve run_training(const RlConfig& config);

// Floor for the running reward maximum n_r.
inline constexpr double kRewardFloor = 1e-6;

}  // namespace expbandit::rl
