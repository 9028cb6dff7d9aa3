#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "expbandit/core.hpp"
#include "expbandit/environments.hpp"
#include "expbandit/experts.hpp"

namespace expbandit {

struct RegretSummary {
  double realized = 0.0;
  std::optional<double> pseudo;
  // Best expert (contextual) or best arm (adversarial); lowest index wins ties.
  std::size_t best_index = 0;
  double best_cumulative = 0.0;
  double player_cumulative = 0.0;
  std::size_t violations = 0;
};

// R_T = max_i G_i - sum_t y_t with G_i = sum_t xi_i(t)^T x(t).
RegretSummary realized_regret_contextual(const RunLog& log);
// R_T = max_j sum_t r_j(t) - sum_t y_t.
RegretSummary realized_regret_adversarial(const RunLog& log);

// Uses the contextual comparator when every step carries advice, the best-arm
// comparator otherwise. E[y_t] is taken as the mean of the realized arm.
double pseudo_regret(const RunLog& log, const MeansByContext& means);

double standard_normal_cdf(double x);

// Smallest box half-width with P(all K arms in [-D, D]) = 1 - eta. For a
// context-indexed env the largest per-context solution is returned.
double compute_delta(double eta, const SubGaussianEnv& env);

enum class Algorithm { exp3p, exp4p, uniform_baseline };

struct PolicySpec {
  Algorithm algorithm = Algorithm::exp4p;
  double delta = 0.05;
  double eta = 0.05;
  // Default horizon-tuned schedules are used when these are unset.
  std::optional<double> gamma;
  std::optional<double> alpha;
  // Overrides compute_delta(eta, env) for Gaussian environments.
  std::optional<double> truncation;
};

using EnvSpec = std::variant<AdversarialSequence, SubGaussianEnv, BernoulliEnv>;

std::size_t env_arms(const EnvSpec& env);
std::optional<MeansByContext> env_means(const EnvSpec& env);

struct GameResult {
  RunLog log;
  std::size_t violations = 0;
  double gamma = 0.0;
  double alpha = 0.0;
  std::optional<double> truncation;
};

using DistributionObserver = std::function<void(std::size_t step, const ProbabilityVector& p)>;

// One full game. The player only ever sees the chosen arm's (rescaled) reward.
GameResult play_game(const PolicySpec& policy, const EnvSpec& env, std::span<const ExpertSpec> experts,
                     std::size_t horizon, SeededRng& rng, const DistributionObserver& observer = {});

RegretSummary summarize(const GameResult& game, const EnvSpec& env);

struct ReplicationRecord {
  std::size_t rep = 0;
  RegretSummary summary;
  std::optional<RunLog> log;
};

struct MonteCarloResult {
  double mean_regret = 0.0;
  double stderr_regret = 0.0;
  // NaN when the environment has no known means.
  double mean_pseudo = 0.0;
  std::vector<ReplicationRecord> records;
};

struct MonteCarloOptions {
  std::size_t workers = 1;
  bool keep_logs = false;
};

// Replication r uses SeededRng(seed, r); results are independent of worker count.
MonteCarloResult monte_carlo_regret(const PolicySpec& policy, const EnvSpec& env, std::span<const ExpertSpec> experts,
                                    std::size_t horizon, std::size_t reps, std::uint64_t seed,
                                    const MonteCarloOptions& options = {});

struct MeanAndStderr {
  double mean;
  double stderr_mean;
};

MeanAndStderr aggregate(std::span<const double> samples);

struct TraceRow {
  std::size_t t;
  std::int64_t context;
  std::size_t arm;
  double reward;
  double cum_reward;
  double best_cum;
  double regret;
};

// Running totals per step; comparator as in summarize().
std::vector<TraceRow> trace(const RunLog& log);

}  // namespace expbandit
