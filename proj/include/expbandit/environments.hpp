#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <variant>
#include <vector>

#include "expbandit/core.hpp"

namespace expbandit {

using MeansByContext = std::map<std::int64_t, std::vector<double>>;

// A fixed T x K table of rewards in [0,1]; row t is revealed at step t.
class AdversarialSequence {
 public:
  AdversarialSequence(std::size_t horizon, std::size_t arms, std::vector<double> row_major);

  std::size_t horizon() const { return horizon_; }
  std::size_t num_arms() const { return arms_; }
  double at(std::size_t step, std::size_t arm) const { return rewards_[step * arms_ + arm]; }
  // Zero-based step index.
  RewardVector row(std::size_t step) const;

 private:
  std::size_t horizon_;
  std::size_t arms_;
  std::vector<double> rewards_;
};

// CSV with header `t,r_1,...,r_K` and one row per step (t = 1..T in order).
AdversarialSequence parse_adversarial_csv(std::istream& in);
AdversarialSequence load_adversarial_csv(const std::filesystem::path& path);

enum class ContextProcess { cyclic, iid_uniform };

// Independent Gaussian arms with context-indexed means and shared stds.
struct SubGaussianEnv {
  MeansByContext means;
  std::vector<double> stds;
  ContextProcess process = ContextProcess::cyclic;
  // When false and the env has a single context, every context id maps to it.
  bool strict = false;

  std::size_t num_arms() const { return stds.size(); }
  const std::vector<double>& means_for(std::int64_t context) const;
  void validate() const;
};

SubGaussianEnv context_free_gaussian(std::vector<double> means, std::vector<double> stds);

// Bernoulli arms: bounded counterpart used for the bounded contextual studies.
struct BernoulliEnv {
  MeansByContext means;
  ContextProcess process = ContextProcess::cyclic;
  bool strict = false;

  std::size_t num_arms() const { return means.begin()->second.size(); }
  const std::vector<double>& means_for(std::int64_t context) const;
  void validate() const;
};

RewardVector draw_rewards(const SubGaussianEnv& env, std::int64_t context, SeededRng& rng);
RewardVector draw_rewards(const BernoulliEnv& env, std::int64_t context, SeededRng& rng);
RewardVector draw_rewards(const AdversarialSequence& env, std::size_t step);

// Context for zero-based step `step`.
std::int64_t next_context(const MeansByContext& means, ContextProcess process, std::size_t step, SeededRng& rng);

enum class ArmSet { inferior, superior };

// Inferior arms are N(0,1), superior arms N(mu,1); the first pull lands in the
// inferior set with probability q.
struct TwoTypeInstance {
  double q = 0.5;
  double mu = 0.0;
  std::vector<ArmSet> partition;

  std::size_t num_arms() const { return partition.size(); }
  void validate() const;
  SubGaussianEnv as_env() const;
};

TwoTypeInstance two_arm_instance(double q, double mu);

struct FirstPull {
  ArmSet set;
  double reward;
};

FirstPull first_pull(const TwoTypeInstance& instance, SeededRng& rng);
double draw_set_reward(const TwoTypeInstance& instance, ArmSet set, SeededRng& rng);

// Fraction of simulated T-step games in which every reward of every arm stays in [-delta, delta].
double empirical_tail(const SubGaussianEnv& env, double delta_trunc, std::size_t horizon, std::size_t reps,
                      SeededRng& rng);

}  // namespace expbandit
