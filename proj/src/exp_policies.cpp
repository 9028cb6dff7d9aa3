#include "expbandit/exp_policies.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "expbandit/regret.hpp"

namespace expbandit {

namespace {

void check_gamma_alpha(double gamma, double alpha) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw InvalidInput(fmt::format("gamma {} outside [0,1]", gamma));
  }
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw InvalidInput(fmt::format("alpha {} must be finite and non-negative", alpha));
  }
}

void check_delta(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) {
    throw InvalidInput(fmt::format("confidence delta {} outside (0,1)", delta));
  }
}

void check_eta(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw InvalidInput(fmt::format("tail mass eta {} outside (0,1)", eta));
  }
}

void check_reward(double reward) {
  if (!(reward >= 0.0 && reward <= 1.0)) {
    throw InvalidInput(fmt::format("reward {} outside [0,1]; rescale unbounded rewards first", reward));
  }
}

double exp4p_inner(double k, double n, double t, double delta) {
  const double log_term = std::log(n * t / delta);
  return 2.0 * std::sqrt(3.0 * k * t * (2.0 * n / 3.0 + 1.0) * std::log(n)) +
         4.0 * k * std::sqrt(k * n * t * log_term) + 8.0 * n * k * log_term;
}

double exp3p_inner(double k, double t, double delta) {
  const double log_term = std::log(k * t / delta);
  return std::sqrt(k * t * log_term) + 4.0 * std::sqrt(5.0 / 3.0 * k * t * std::log(k)) + 8.0 * log_term;
}

std::vector<double> exp_all(const std::vector<double>& logs) {
  std::vector<double> w(logs.size());
  std::transform(logs.begin(), logs.end(), w.begin(), [](double v) { return std::exp(v); });
  return w;
}

}  // namespace

std::vector<double> Exp4State::weights() const { return exp_all(log_weights); }

ProbabilityVector Exp4State::expert_distribution() const { return ProbabilityVector(softmax(log_weights)); }

std::vector<double> Exp3State::weights() const { return exp_all(log_weights); }

std::vector<double> reward_estimate(const ProbabilityVector& p, std::size_t chosen, double reward) {
  if (chosen >= p.size() || !(p[chosen] > 0.0)) {
    throw InvalidInput(fmt::format("arm {} could not have been drawn from p", chosen));
  }
  std::vector<double> x_hat(p.size(), 0.0);
  x_hat[chosen] = reward / p[chosen];
  return x_hat;
}

std::vector<double> expert_gain_estimate(const AdviceMatrix& advice, std::span<const double> x_hat) {
  if (x_hat.size() != advice.num_arms()) {
    throw InvalidInput("reward estimate length does not match the advice");
  }
  std::vector<double> z_hat(advice.num_experts(), 0.0);
  for (std::size_t i = 0; i < advice.num_experts(); ++i) {
    for (std::size_t j = 0; j < x_hat.size(); ++j) z_hat[i] += advice.at(i, j) * x_hat[j];
  }
  return z_hat;
}

Exp4State exp4p_init(std::size_t arms, std::size_t experts, std::size_t horizon, double alpha, double gamma) {
  if (arms < 2 || experts < 1 || horizon < 1) {
    throw InvalidInput(fmt::format("EXP4.P needs K >= 2, N >= 1, T >= 1 (got K={}, N={}, T={})", arms, experts,
                                   horizon));
  }
  check_gamma_alpha(gamma, alpha);
  const double k = static_cast<double>(arms);
  const double log_w0 = alpha * gamma / (3.0 * k) * std::sqrt(static_cast<double>(experts * horizon));
  return Exp4State{std::vector<double>(experts, log_w0), gamma, alpha, arms, experts, horizon, 1};
}

ProbabilityVector exp4p_distribution(const Exp4State& state, const AdviceMatrix& advice) {
  if (advice.num_experts() != state.experts || advice.num_arms() != state.arms) {
    throw InvalidInput(fmt::format("advice is {}x{} but the player expects {}x{}", advice.num_experts(),
                                   advice.num_arms(), state.experts, state.arms));
  }
  return mix(advice, state.expert_distribution(), state.gamma);
}

Exp4State exp4p_update(Exp4State state, const AdviceMatrix& advice, std::size_t chosen, double reward,
                       const ProbabilityVector& p) {
  if (advice.num_experts() != state.experts || advice.num_arms() != state.arms || p.size() != state.arms) {
    throw InvalidInput("EXP4.P update: advice or distribution dimensions do not match the state");
  }
  if (chosen >= state.arms || !(p[chosen] > 0.0)) {
    throw InvalidInput(fmt::format("EXP4.P update: arm {} could not have been drawn from p", chosen));
  }
  check_reward(reward);
  if (state.t > state.horizon) {
    throw InvalidInput("EXP4.P update past the horizon");
  }
  const double k = static_cast<double>(state.arms);
  const double rate = state.gamma / (3.0 * k);
  const double floor = state.gamma / k;
  const double root_nt = std::sqrt(static_cast<double>(state.experts * state.horizon));
  const std::vector<double> z_hat = expert_gain_estimate(advice, reward_estimate(p, chosen, reward));
  const std::vector<double> q = softmax(state.log_weights);
  for (std::size_t i = 0; i < state.experts; ++i) {
    state.log_weights[i] += rate * (z_hat[i] + state.alpha / ((q[i] + floor) * root_nt));
  }
  ++state.t;
  return state;
}

ExpParams exp4p_params(std::size_t arms, std::size_t experts, std::size_t horizon, double delta) {
  check_delta(delta);
  if (arms < 2 || experts < 2 || horizon < 1) {
    throw InvalidInput("EXP4.P parameters need K >= 2, N >= 2, T >= 1");
  }
  const double k = static_cast<double>(arms);
  const double n = static_cast<double>(experts);
  const double t = static_cast<double>(horizon);
  const double gamma = std::sqrt(3.0 * k * std::log(n) / (t * (2.0 * n / 3.0 + 1.0)));
  const double alpha = 2.0 * std::sqrt(k * std::log(n * t / delta));
  return {gamma, alpha, gamma <= 0.5};
}

BoundReport exp4p_bound(std::size_t arms, std::size_t experts, std::size_t horizon, double delta) {
  const ExpParams params = exp4p_params(arms, experts, horizon, delta);
  BoundReport report;
  report.value = exp4p_inner(static_cast<double>(arms), static_cast<double>(experts), static_cast<double>(horizon),
                             delta);
  report.gamma = params.gamma;
  report.alpha = params.alpha;
  report.delta = delta;
  return report;
}

BoundReport exp4p_unbounded_bound(std::size_t arms, std::size_t experts, std::size_t horizon, double delta,
                                  double eta, double truncation) {
  check_eta(eta);
  if (!(truncation > 0.0)) {
    throw InvalidInput("truncation level must be positive");
  }
  BoundReport report = exp4p_bound(arms, experts, horizon, delta);
  report.value *= 4.0 * truncation;
  report.truncation = truncation;
  report.joint_probability = (1.0 - delta) * std::pow(1.0 - eta, static_cast<double>(horizon));
  return report;
}

BoundReport exp4p_unbounded_bound(std::size_t arms, std::size_t experts, std::size_t horizon, double delta,
                                  double eta, const SubGaussianEnv& env) {
  return exp4p_unbounded_bound(arms, experts, horizon, delta, eta, compute_delta(eta, env));
}

Exp3State exp3p_init(std::size_t arms, std::size_t horizon, double alpha, double gamma) {
  if (arms < 2 || horizon < 1) {
    throw InvalidInput(fmt::format("EXP3.P needs K >= 2 and T >= 1 (got K={}, T={})", arms, horizon));
  }
  check_gamma_alpha(gamma, alpha);
  const double log_w0 =
      alpha * gamma / 3.0 * std::sqrt(static_cast<double>(horizon) / static_cast<double>(arms));
  return Exp3State{std::vector<double>(arms, log_w0), gamma, alpha, arms, horizon, 1};
}

ProbabilityVector exp3p_distribution(const Exp3State& state) {
  const std::vector<double> w = softmax(state.log_weights);
  const double floor = state.gamma / static_cast<double>(state.arms);
  std::vector<double> p(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    p[i] = (1.0 - state.gamma) * w[i] + floor;
  }
  return ProbabilityVector(std::move(p));
}

Exp3State exp3p_update(Exp3State state, std::size_t chosen, double reward, const ProbabilityVector& p) {
  if (p.size() != state.arms) {
    throw InvalidInput("EXP3.P update: distribution size does not match K");
  }
  if (chosen >= state.arms || !(p[chosen] > 0.0)) {
    throw InvalidInput(fmt::format("EXP3.P update: arm {} could not have been drawn from p", chosen));
  }
  check_reward(reward);
  if (state.t > state.horizon) {
    throw InvalidInput("EXP3.P update past the horizon");
  }
  const double k = static_cast<double>(state.arms);
  const double rate = state.gamma / (3.0 * k);
  const double root_kt = std::sqrt(k * static_cast<double>(state.horizon));
  const std::vector<double> x_hat = reward_estimate(p, chosen, reward);
  for (std::size_t j = 0; j < state.arms; ++j) {
    state.log_weights[j] += rate * (x_hat[j] + state.alpha / (p[j] * root_kt));
  }
  ++state.t;
  return state;
}

ExpParams exp3p_params(std::size_t arms, std::size_t horizon, double delta) {
  check_delta(delta);
  if (arms < 2 || horizon < 1) {
    throw InvalidInput("EXP3.P parameters need K >= 2 and T >= 1");
  }
  const double k = static_cast<double>(arms);
  const double t = static_cast<double>(horizon);
  const double gamma = 2.0 * std::sqrt(3.0 * k * std::log(k) / (5.0 * t));
  const double alpha = 2.0 * std::sqrt(std::log(k * t / delta));
  return {gamma, alpha, gamma <= 0.5};
}

BoundReport exp3p_bound(std::size_t arms, std::size_t horizon, double delta) {
  const ExpParams params = exp3p_params(arms, horizon, delta);
  BoundReport report;
  report.value = exp3p_inner(static_cast<double>(arms), static_cast<double>(horizon), delta);
  report.gamma = params.gamma;
  report.alpha = params.alpha;
  report.delta = delta;
  return report;
}

BoundReport exp3p_bound(std::size_t arms, std::size_t horizon, double delta, double eta, double truncation) {
  check_eta(eta);
  if (!(truncation > 0.0)) {
    throw InvalidInput("truncation level must be positive");
  }
  BoundReport report = exp3p_bound(arms, horizon, delta);
  report.value *= 4.0 * truncation;
  report.truncation = truncation;
  report.joint_probability = (1.0 - delta) * std::pow(1.0 - eta, static_cast<double>(horizon));
  return report;
}

BoundReport exp3p_bound(std::size_t arms, std::size_t horizon, double delta, double eta, const SubGaussianEnv& env) {
  return exp3p_bound(arms, horizon, delta, eta, compute_delta(eta, env));
}

RescaledReward rescale_reward(double reward, double delta_trunc) {
  if (!(delta_trunc > 0.0)) {
    throw InvalidInput("truncation level must be positive");
  }
  const double scaled = (reward + delta_trunc) / (2.0 * delta_trunc);
  return {std::clamp(scaled, 0.0, 1.0), std::abs(reward) > delta_trunc};
}

}  // namespace expbandit
