#include "expbandit/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "expbandit/exp_policies.hpp"

namespace expbandit {

namespace {

bool has_full_advice(const RunLog& log) {
  return log.size() > 0 &&
         std::all_of(log.steps().begin(), log.steps().end(), [](const RunStep& s) { return s.advice.has_value(); });
}

std::size_t argmax_first(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

double dot(const ProbabilityVector& p, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    s += p[j] * x[j];
  }
  return s;
}

const std::vector<double>& means_at(const MeansByContext& means, std::int64_t context) {
  if (auto it = means.find(context); it != means.end()) {
    return it->second;
  }
  if (means.size() == 1) {
    return means.begin()->second;
  }
  throw InvalidInput(fmt::format("no means for context {}", context));
}

double box_mass(double half_width, std::span<const double> mu, std::span<const double> sigma) {
  double mass = 1.0;
  for (std::size_t j = 0; j < mu.size(); ++j) {
    mass *= standard_normal_cdf((half_width - mu[j]) / sigma[j]) - standard_normal_cdf((-half_width - mu[j]) / sigma[j]);
  }
  return mass;
}

struct Player {
  Algorithm algorithm;
  std::optional<Exp3State> exp3;
  std::optional<Exp4State> exp4;
};

}  // namespace

RegretSummary realized_regret_contextual(const RunLog& log) {
  if (!has_full_advice(log)) {
    throw InvalidInput("contextual regret needs advice rows at every step");
  }
  const std::size_t n = log[0].advice->num_experts();
  std::vector<double> gains(n, 0.0);
  double player = 0.0;
  for (const auto& step : log.steps()) {
    if (step.advice->num_experts() != n) {
      throw InvalidInput("expert count changes within the log");
    }
    for (std::size_t i = 0; i < n; ++i) {
      gains[i] += dot(step.advice->row(i), step.rewards.values);
    }
    player += step.player_reward;
  }
  RegretSummary s;
  s.best_index = argmax_first(gains);
  s.best_cumulative = gains[s.best_index];
  s.player_cumulative = player;
  s.realized = s.best_cumulative - player;
  return s;
}

RegretSummary realized_regret_adversarial(const RunLog& log) {
  if (log.size() == 0) {
    throw InvalidInput("empty run log");
  }
  const std::size_t k = log[0].rewards.size();
  std::vector<double> totals(k, 0.0);
  double player = 0.0;
  for (const auto& step : log.steps()) {
    if (step.rewards.size() != k) {
      throw InvalidInput("arm count changes within the log");
    }
    for (std::size_t j = 0; j < k; ++j) {
      totals[j] += step.rewards[j];
    }
    player += step.player_reward;
  }
  RegretSummary s;
  s.best_index = argmax_first(totals);
  s.best_cumulative = totals[s.best_index];
  s.player_cumulative = player;
  s.realized = s.best_cumulative - player;
  return s;
}

double pseudo_regret(const RunLog& log, const MeansByContext& means) {
  const bool contextual = has_full_advice(log);
  double comparator = 0.0;
  double earned = 0.0;
  for (const auto& step : log.steps()) {
    const auto& mu = means_at(means, step.context);
    if (mu.size() != step.rewards.size()) {
      throw InvalidInput("means and rewards disagree on K");
    }
    if (contextual) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < step.advice->num_experts(); ++i) {
        best = std::max(best, dot(step.advice->row(i), mu));
      }
      comparator += best;
    } else {
      comparator += *std::max_element(mu.begin(), mu.end());
    }
    earned += mu[step.arm];
  }
  return comparator - earned;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double compute_delta(double eta, const SubGaussianEnv& env) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw InvalidInput(fmt::format("tail mass eta {} outside (0,1)", eta));
  }
  env.validate();
  const double k = static_cast<double>(env.num_arms());
  const double sigma_max = *std::max_element(env.stds.begin(), env.stds.end());
  const double target = 1.0 - eta;
  double solution = 0.0;
  for (const auto& [ctx, mu] : env.means) {
    double mu_max = 0.0;
    for (double m : mu) {
      mu_max = std::max(mu_max, std::abs(m));
    }
    // Union bound: at this width each arm leaves the box w.p. <= eta/K.
    double lo = 0.0;
    double hi = mu_max + sigma_max * std::sqrt(2.0 * std::log(2.0 * k / eta)) + 1.0;
    while (hi - lo > 1e-10) {
      const double mid = 0.5 * (lo + hi);
      (box_mass(mid, mu, env.stds) < target ? lo : hi) = mid;
    }
    solution = std::max(solution, 0.5 * (lo + hi));
  }
  return solution;
}

std::size_t env_arms(const EnvSpec& env) {
  return std::visit([](const auto& e) { return e.num_arms(); }, env);
}

std::optional<MeansByContext> env_means(const EnvSpec& env) {
  if (const auto* g = std::get_if<SubGaussianEnv>(&env)) {
    return g->means;
  }
  if (const auto* b = std::get_if<BernoulliEnv>(&env)) {
    return b->means;
  }
  return std::nullopt;
}

GameResult play_game(const PolicySpec& policy, const EnvSpec& env, std::span<const ExpertSpec> experts,
                     std::size_t horizon, SeededRng& rng, const DistributionObserver& observer) {
  const std::size_t k = env_arms(env);
  if (const auto* adv = std::get_if<AdversarialSequence>(&env); adv && adv->horizon() < horizon) {
    throw InvalidInput(fmt::format("adversarial sequence has {} rows but T={}", adv->horizon(), horizon));
  }
  if (policy.algorithm == Algorithm::exp4p && experts.empty()) {
    throw InvalidInput("EXP4.P needs at least one expert");
  }
  GameResult result{RunLog(horizon), 0, 0.0, 0.0, std::nullopt};
  result.log.reserve(horizon);

  const auto* gaussian = std::get_if<SubGaussianEnv>(&env);
  if (gaussian) {
    result.truncation = policy.truncation ? *policy.truncation : compute_delta(policy.eta, *gaussian);
  }

  Player player{policy.algorithm, std::nullopt, std::nullopt};
  if (policy.algorithm == Algorithm::exp3p) {
    const ExpParams defaults = exp3p_params(k, horizon, policy.delta);
    result.gamma = policy.gamma.value_or(defaults.gamma);
    result.alpha = policy.alpha.value_or(defaults.alpha);
    player.exp3 = exp3p_init(k, horizon, result.alpha, result.gamma);
  } else if (policy.algorithm == Algorithm::exp4p) {
    const std::size_t n = experts.size();
    if (n < 2 && !(policy.gamma && policy.alpha)) {
      throw InvalidInput("EXP4.P with a single expert needs explicit gamma and alpha");
    }
    const ExpParams defaults = n >= 2 ? exp4p_params(k, n, horizon, policy.delta) : ExpParams{0.0, 0.0, true};
    result.gamma = policy.gamma.value_or(defaults.gamma);
    result.alpha = policy.alpha.value_or(defaults.alpha);
    player.exp4 = exp4p_init(k, n, horizon, result.alpha, result.gamma);
  }

  const MeansByContext* context_source = nullptr;
  ContextProcess process = ContextProcess::cyclic;
  if (gaussian) {
    context_source = &gaussian->means;
    process = gaussian->process;
  } else if (const auto* b = std::get_if<BernoulliEnv>(&env)) {
    context_source = &b->means;
    process = b->process;
  }

  for (std::size_t step = 0; step < horizon; ++step) {
    const std::int64_t context = context_source ? next_context(*context_source, process, step, rng) : 0;
    std::optional<AdviceMatrix> advice;
    if (!experts.empty()) {
      advice = assemble_advice(experts, context, step + 1, k);
    }

    std::optional<ProbabilityVector> p;
    if (player.exp3) {
      p = exp3p_distribution(*player.exp3);
    } else if (player.exp4) {
      p = exp4p_distribution(*player.exp4, *advice);
    } else {
      p = ProbabilityVector::uniform(k);
    }
    if (observer) {
      observer(step, *p);
    }
    const std::size_t arm = sample_index(*p, rng);

    RewardVector rewards = std::visit(
        [&](const auto& e) -> RewardVector {
          using E = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<E, AdversarialSequence>) {
            return draw_rewards(e, step);
          } else {
            return draw_rewards(e, context, rng);
          }
        },
        env);

    double observed = rewards[arm];
    if (result.truncation) {
      for (double r : rewards.values) {
        result.violations += std::abs(r) > *result.truncation ? 1 : 0;
      }
      observed = rescale_reward(observed, *result.truncation).value;
    }
    if (player.exp3) {
      player.exp3 = exp3p_update(std::move(*player.exp3), arm, observed, *p);
    } else if (player.exp4) {
      player.exp4 = exp4p_update(std::move(*player.exp4), *advice, arm, observed, *p);
    }

    const double y = rewards[arm];
    result.log.push(RunStep{context, std::move(advice), arm, std::move(rewards), y});
  }
  return result;
}

RegretSummary summarize(const GameResult& game, const EnvSpec& env) {
  RegretSummary s =
      has_full_advice(game.log) ? realized_regret_contextual(game.log) : realized_regret_adversarial(game.log);
  if (auto means = env_means(env)) {
    s.pseudo = pseudo_regret(game.log, *means);
  }
  s.violations = game.violations;
  return s;
}

MeanAndStderr aggregate(std::span<const double> samples) {
  if (samples.empty()) {
    throw InvalidInput("cannot aggregate zero samples");
  }
  const double n = static_cast<double>(samples.size());
  const double mean = pairwise_sum(samples) / n;
  if (samples.size() == 1) {
    return {mean, 0.0};
  }
  std::vector<double> sq(samples.size());
  std::transform(samples.begin(), samples.end(), sq.begin(), [mean](double v) { return (v - mean) * (v - mean); });
  const double variance = pairwise_sum(sq) / (n - 1.0);
  return {mean, std::sqrt(variance / n)};
}

MonteCarloResult monte_carlo_regret(const PolicySpec& policy, const EnvSpec& env, std::span<const ExpertSpec> experts,
                                    std::size_t horizon, std::size_t reps, std::uint64_t seed,
                                    const MonteCarloOptions& options) {
  if (reps == 0) {
    throw InvalidInput("monte_carlo_regret needs reps >= 1");
  }
  MonteCarloResult out;
  out.records.resize(reps);
  parallel_for(reps, options.workers, [&](std::size_t rep) {
    SeededRng rng(seed, rep);
    GameResult game = play_game(policy, env, experts, horizon, rng);
    ReplicationRecord& rec = out.records[rep];
    rec.rep = rep;
    rec.summary = summarize(game, env);
    if (options.keep_logs) {
      rec.log = std::move(game.log);
    }
  });

  std::vector<double> realized(reps);
  std::vector<double> pseudo;
  for (const auto& rec : out.records) {
    realized[rec.rep] = rec.summary.realized;
    if (rec.summary.pseudo) {
      pseudo.push_back(*rec.summary.pseudo);
    }
  }
  const MeanAndStderr agg = aggregate(realized);
  out.mean_regret = agg.mean;
  out.stderr_regret = agg.stderr_mean;
  out.mean_pseudo = pseudo.size() == reps ? aggregate(pseudo).mean : std::numeric_limits<double>::quiet_NaN();
  return out;
}

std::vector<TraceRow> trace(const RunLog& log) {
  std::vector<TraceRow> rows;
  if (log.size() == 0) {
    return rows;
  }
  const bool contextual = has_full_advice(log);
  const std::size_t width = contextual ? log[0].advice->num_experts() : log[0].rewards.size();
  std::vector<double> totals(width, 0.0);
  double cum = 0.0;
  rows.reserve(log.size());
  for (std::size_t t = 0; t < log.size(); ++t) {
    const RunStep& step = log[t];
    for (std::size_t i = 0; i < width; ++i) {
      totals[i] += contextual ? dot(step.advice->row(i), step.rewards.values) : step.rewards[i];
    }
    cum += step.player_reward;
    const double best = *std::max_element(totals.begin(), totals.end());
    rows.push_back({t + 1, step.context, step.arm, step.player_reward, cum, best, best - cum});
  }
  return rows;
}

}  // namespace expbandit
