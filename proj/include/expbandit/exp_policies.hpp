#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "expbandit/core.hpp"
#include "expbandit/environments.hpp"

namespace expbandit {

// EXP4.P player state. Weights are kept as logarithms; the bonus term makes
// them grow without bound over long horizons.
struct Exp4State {
  std::vector<double> log_weights;
  double gamma = 0.0;
  double alpha = 0.0;
  std::size_t arms = 0;     // K
  std::size_t experts = 0;  // N
  std::size_t horizon = 0;  // T
  std::size_t t = 1;

  std::vector<double> weights() const;
  // q_i = w_i / sum_j w_j
  ProbabilityVector expert_distribution() const;
};

// EXP3.P player state over K arms.
struct Exp3State {
  std::vector<double> log_weights;
  double gamma = 0.0;
  double alpha = 0.0;
  std::size_t arms = 0;
  std::size_t horizon = 0;
  std::size_t t = 1;

  std::vector<double> weights() const;
};

struct ExpParams {
  double gamma;
  double alpha;
  // The high-probability guarantee assumes gamma <= 1/2.
  bool side_condition_ok;
};

struct BoundReport {
  double value = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  double delta = 0.0;
  std::optional<double> truncation;
  std::optional<double> joint_probability;
  // Set to false by callers whose expert family lacks a uniform expert.
  bool uniform_expert_present = true;
};

// x_hat_j = x_j / p_j for the chosen arm, 0 elsewhere.
std::vector<double> reward_estimate(const ProbabilityVector& p, std::size_t chosen, double reward);
// z_hat_i = xi_i . x_hat
std::vector<double> expert_gain_estimate(const AdviceMatrix& advice, std::span<const double> x_hat);

Exp4State exp4p_init(std::size_t arms, std::size_t experts, std::size_t horizon, double alpha, double gamma);
ProbabilityVector exp4p_distribution(const Exp4State& state, const AdviceMatrix& advice);
// `p` must be the distribution `chosen` was drawn from; reward must be in [0,1].
Exp4State exp4p_update(Exp4State state, const AdviceMatrix& advice, std::size_t chosen, double reward,
                       const ProbabilityVector& p);

ExpParams exp4p_params(std::size_t arms, std::size_t experts, std::size_t horizon, double delta);
BoundReport exp4p_bound(std::size_t arms, std::size_t experts, std::size_t horizon, double delta);
BoundReport exp4p_unbounded_bound(std::size_t arms, std::size_t experts, std::size_t horizon, double delta,
                                  double eta, double truncation);
BoundReport exp4p_unbounded_bound(std::size_t arms, std::size_t experts, std::size_t horizon, double delta,
                                  double eta, const SubGaussianEnv& env);

Exp3State exp3p_init(std::size_t arms, std::size_t horizon, double alpha, double gamma);
ProbabilityVector exp3p_distribution(const Exp3State& state);
Exp3State exp3p_update(Exp3State state, std::size_t chosen, double reward, const ProbabilityVector& p);

// alpha uses ln(KT/delta); the MAB setting has no expert count N.
ExpParams exp3p_params(std::size_t arms, std::size_t horizon, double delta);
// Bounded form (no truncation factor).
BoundReport exp3p_bound(std::size_t arms, std::size_t horizon, double delta);
BoundReport exp3p_bound(std::size_t arms, std::size_t horizon, double delta, double eta, double truncation);
BoundReport exp3p_bound(std::size_t arms, std::size_t horizon, double delta, double eta, const SubGaussianEnv& env);

struct RescaledReward {
  double value;
  bool violation;
};

// Maps [-delta_trunc, delta_trunc] affinely onto [0,1], clamping outside.
RescaledReward rescale_reward(double reward, double delta_trunc);

}  // namespace expbandit
