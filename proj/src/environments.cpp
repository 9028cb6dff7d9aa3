#include "expbandit/environments.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/core.h>

namespace expbandit {

namespace {

const std::vector<double>& lookup(const MeansByContext& means, std::int64_t context, bool strict) {
  if (auto it = means.find(context); it != means.end()) {
    return it->second;
  }
  if (!strict && means.size() == 1) {
    return means.begin()->second;
  }
  throw InvalidInput(fmt::format("unknown context {}", context));
}

void check_means(const MeansByContext& means, std::size_t k) {
  if (means.empty()) {
    throw InvalidInput("environment needs at least one context");
  }
  for (const auto& [ctx, row] : means) {
    if (row.size() != k) {
      throw InvalidInput(fmt::format("context {} has {} means, expected {}", ctx, row.size(), k));
    }
    for (double m : row) {
      if (!std::isfinite(m)) {
        throw InvalidInput(fmt::format("context {} has a non-finite mean", ctx));
      }
    }
  }
}

}  // namespace

AdversarialSequence::AdversarialSequence(std::size_t horizon, std::size_t arms, std::vector<double> row_major)
    : horizon_(horizon), arms_(arms), rewards_(std::move(row_major)) {
  if (arms_ < 2 || horizon_ == 0) {
    throw InvalidInput("adversarial sequence needs T >= 1 and K >= 2");
  }
  if (rewards_.size() != horizon_ * arms_) {
    throw InvalidInput(fmt::format("adversarial sequence has {} entries, expected {}", rewards_.size(),
                                   horizon_ * arms_));
  }
  for (double r : rewards_) {
    if (!(r >= 0.0 && r <= 1.0)) {
      throw InvalidInput(fmt::format("adversarial reward {} outside [0,1]", r));
    }
  }
}

RewardVector AdversarialSequence::row(std::size_t step) const {
  if (step >= horizon_) {
    throw InvalidInput(fmt::format("step {} beyond adversarial horizon {}", step, horizon_));
  }
  auto first = rewards_.begin() + static_cast<std::ptrdiff_t>(step * arms_);
  return RewardVector(std::vector<double>(first, first + static_cast<std::ptrdiff_t>(arms_)), true);
}

AdversarialSequence parse_adversarial_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t arms = 0;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') {
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cells.push_back(cell);
    }
    if (arms == 0) {
      if (cells.size() < 3 || cells[0] != "t") {
        throw InvalidInput(fmt::format("line {}: expected header `t,r_1,...,r_K`", line_no));
      }
      for (std::size_t j = 1; j < cells.size(); ++j) {
        if (cells[j] != fmt::format("r_{}", j)) {
          throw InvalidInput(fmt::format("line {}: header column {} should be r_{}", line_no, j + 1, j));
        }
      }
      arms = cells.size() - 1;
      continue;
    }
    if (cells.size() != arms + 1) {
      throw InvalidInput(fmt::format("line {}: expected {} columns, got {}", line_no, arms + 1, cells.size()));
    }
    try {
      if (std::stoul(cells[0]) != rows + 1) {
        throw InvalidInput(fmt::format("line {}: steps must be numbered 1..T in order", line_no));
      }
      for (std::size_t j = 1; j < cells.size(); ++j) {
        values.push_back(std::stod(cells[j]));
      }
    } catch (const std::logic_error& e) {
      if (dynamic_cast<const InvalidInput*>(&e)) {
        throw;
      }
      throw InvalidInput(fmt::format("line {}: malformed number", line_no));
    }
    ++rows;
  }
  if (arms == 0) {
    throw InvalidInput("adversarial CSV is missing its header");
  }
  return AdversarialSequence(rows, arms, std::move(values));
}

AdversarialSequence load_adversarial_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput(fmt::format("cannot open adversarial sequence {}", path.string()));
  }
  return parse_adversarial_csv(in);
}

const std::vector<double>& SubGaussianEnv::means_for(std::int64_t context) const {
  return lookup(means, context, strict);
}

void SubGaussianEnv::validate() const {
  if (stds.empty()) {
    throw InvalidInput("Gaussian environment needs at least one arm");
  }
  for (double s : stds) {
    if (!(s > 0.0) || !std::isfinite(s)) {
      throw InvalidInput(fmt::format("standard deviation {} must be positive", s));
    }
  }
  check_means(means, stds.size());
}

SubGaussianEnv context_free_gaussian(std::vector<double> means, std::vector<double> stds) {
  SubGaussianEnv env;
  env.means[0] = std::move(means);
  env.stds = std::move(stds);
  env.validate();
  return env;
}

const std::vector<double>& BernoulliEnv::means_for(std::int64_t context) const {
  return lookup(means, context, strict);
}

void BernoulliEnv::validate() const {
  if (means.empty()) {
    throw InvalidInput("Bernoulli environment needs at least one context");
  }
  const std::size_t k = means.begin()->second.size();
  if (k < 2) {
    throw InvalidInput("Bernoulli environment needs at least two arms");
  }
  check_means(means, k);
  for (const auto& [ctx, row] : means) {
    for (double m : row) {
      if (m < 0.0 || m > 1.0) {
        throw InvalidInput(fmt::format("context {} has Bernoulli mean {} outside [0,1]", ctx, m));
      }
    }
  }
}

RewardVector draw_rewards(const SubGaussianEnv& env, std::int64_t context, SeededRng& rng) {
  const auto& mu = env.means_for(context);
  std::vector<double> r(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    r[j] = mu[j] + env.stds[j] * rng.normal();
  }
  return RewardVector(std::move(r), false);
}

RewardVector draw_rewards(const BernoulliEnv& env, std::int64_t context, SeededRng& rng) {
  const auto& mu = env.means_for(context);
  std::vector<double> r(mu.size());
  for (std::size_t j = 0; j < mu.size(); ++j) {
    r[j] = rng.uniform() < mu[j] ? 1.0 : 0.0;
  }
  return RewardVector(std::move(r), true);
}

RewardVector draw_rewards(const AdversarialSequence& env, std::size_t step) { return env.row(step); }

std::int64_t next_context(const MeansByContext& means, ContextProcess process, std::size_t step, SeededRng& rng) {
  if (means.size() == 1) {
    return means.begin()->first;
  }
  const std::size_t index = process == ContextProcess::cyclic ? step % means.size() : rng.uniform_index(means.size());
  return std::next(means.begin(), static_cast<std::ptrdiff_t>(index))->first;
}

void TwoTypeInstance::validate() const {
  if (!(q >= 0.0 && q <= 1.0)) {
    throw InvalidInput(fmt::format("inferior-set probability q={} outside [0,1]", q));
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    throw InvalidInput(fmt::format("superior mean mu={} must be finite and non-negative", mu));
  }
  bool has_inferior = false;
  bool has_superior = false;
  for (ArmSet s : partition) {
    (s == ArmSet::inferior ? has_inferior : has_superior) = true;
  }
  if (!has_inferior || !has_superior) {
    throw InvalidInput("two-type instance needs both inferior and superior arms");
  }
}

SubGaussianEnv TwoTypeInstance::as_env() const {
  validate();
  std::vector<double> means;
  for (ArmSet s : partition) {
    means.push_back(s == ArmSet::superior ? mu : 0.0);
  }
  return context_free_gaussian(std::move(means), std::vector<double>(partition.size(), 1.0));
}

TwoTypeInstance two_arm_instance(double q, double mu) {
  TwoTypeInstance inst{q, mu, {ArmSet::inferior, ArmSet::superior}};
  inst.validate();
  return inst;
}

double draw_set_reward(const TwoTypeInstance& instance, ArmSet set, SeededRng& rng) {
  return (set == ArmSet::superior ? instance.mu : 0.0) + rng.normal();
}

FirstPull first_pull(const TwoTypeInstance& instance, SeededRng& rng) {
  // u < q covers q = 0 (never inferior) and q = 1 (always inferior) exactly.
  const ArmSet set = rng.uniform() < instance.q ? ArmSet::inferior : ArmSet::superior;
  return {set, draw_set_reward(instance, set, rng)};
}

double empirical_tail(const SubGaussianEnv& env, double delta_trunc, std::size_t horizon, std::size_t reps,
                      SeededRng& rng) {
  env.validate();
  if (delta_trunc < 0.0 || reps == 0) {
    throw InvalidInput("empirical_tail needs a non-negative truncation and at least one replication");
  }
  std::size_t inside = 0;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    bool ok = true;
    for (std::size_t t = 0; t < horizon && ok; ++t) {
      const auto ctx = next_context(env.means, env.process, t, rng);
      const RewardVector r = draw_rewards(env, ctx, rng);
      for (double v : r.values) {
        if (std::abs(v) > delta_trunc) {
          ok = false;
          break;
        }
      }
    }
    inside += ok ? 1 : 0;
  }
  return static_cast<double>(inside) / static_cast<double>(reps);
}

}  // namespace expbandit
