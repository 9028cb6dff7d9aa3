#include "expbandit/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <fmt/core.h>

namespace expbandit {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

void check_simplex(std::span<const double> p) {
  if (p.empty()) {
    throw InvalidInput("probability vector must be non-empty");
  }
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < 0.0) {
      throw InvalidInput(fmt::format("probability entry {} is not a finite non-negative value", v));
    }
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw InvalidInput(fmt::format("probability entries sum to {:.17g}, not 1", sum));
  }
}

}  // namespace

ProbabilityVector::ProbabilityVector(std::vector<double> entries) : p_(std::move(entries)) {
  check_simplex(p_);
}

ProbabilityVector ProbabilityVector::uniform(std::size_t size) {
  if (size == 0) {
    throw InvalidInput("uniform distribution needs at least one entry");
  }
  return ProbabilityVector(std::vector<double>(size, 1.0 / static_cast<double>(size)));
}

ProbabilityVector ProbabilityVector::one_hot(std::size_t size, std::size_t index) {
  if (index >= size) {
    throw InvalidInput(fmt::format("one-hot index {} out of range for size {}", index, size));
  }
  std::vector<double> p(size, 0.0);
  p[index] = 1.0;
  return ProbabilityVector(std::move(p));
}

double ProbabilityVector::min() const { return *std::min_element(p_.begin(), p_.end()); }

AdviceMatrix::AdviceMatrix(std::vector<ProbabilityVector> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) {
    throw InvalidInput("advice matrix needs at least one expert row");
  }
  const std::size_t k = rows_.front().size();
  if (k < 2) {
    throw InvalidInput("advice rows must cover at least two arms");
  }
  for (const auto& row : rows_) {
    if (row.size() != k) {
      throw InvalidInput("advice rows have inconsistent arm counts");
    }
  }
}

RewardVector::RewardVector(std::vector<double> v, bool is_bounded) : values(std::move(v)), bounded(is_bounded) {
  for (double r : values) {
    if (!std::isfinite(r)) {
      throw InvalidInput("reward entries must be finite");
    }
    if (bounded && (r < 0.0 || r > 1.0)) {
      throw InvalidInput(fmt::format("bounded reward {} outside [0,1]", r));
    }
  }
}

void RunLog::push(RunStep step) {
  if (steps_.size() >= horizon_) {
    throw InvalidInput("run log is already at its horizon");
  }
  if (step.arm >= step.rewards.size()) {
    throw InvalidInput("chosen arm outside reward vector");
  }
  if (step.player_reward != step.rewards[step.arm]) {
    throw InvalidInput("player reward must equal the chosen arm's reward");
  }
  if (step.advice && step.advice->num_arms() != step.rewards.size()) {
    throw InvalidInput("advice and reward vector disagree on K");
  }
  steps_.push_back(std::move(step));
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream), key_(mix64(mix64(seed + kGolden) ^ mix64(~stream * kGolden + 1))) {}

std::uint64_t SeededRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double SeededRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double SeededRng::normal() {
  if (spare_normal_) {
    const double z = *spare_normal_;
    spare_normal_.reset();
    return z;
  }
  // Box-Muller; 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * M_PI * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

std::size_t SeededRng::uniform_index(std::size_t n) {
  if (n == 0) {
    throw InvalidInput("uniform_index over an empty range");
  }
  // Lemire's multiply-shift with rejection for exact uniformity.
  const std::uint64_t bound = n;
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

std::size_t sample_index(const ProbabilityVector& p, SeededRng& rng) {
  const double u = rng.uniform();
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] <= 0.0) {
      continue;
    }
    last_positive = j;
    cumulative += p[j];
    if (u < cumulative) {
      return j;
    }
  }
  // Rounding can leave the cumulative sum a hair below 1.
  return last_positive;
}

ProbabilityVector mix(const AdviceMatrix& advice, const ProbabilityVector& q, double gamma) {
  if (q.size() != advice.num_experts()) {
    throw InvalidInput(fmt::format("expert distribution has {} entries but advice has {} rows", q.size(),
                                   advice.num_experts()));
  }
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw InvalidInput(fmt::format("gamma {} outside [0,1]", gamma));
  }
  const std::size_t k = advice.num_arms();
  const double floor = gamma / static_cast<double>(k);
  std::vector<double> p(k, 0.0);
  for (std::size_t i = 0; i < advice.num_experts(); ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      p[j] += q[i] * advice.at(i, j);
    }
  }
  for (double& v : p) {
    v = (1.0 - gamma) * v + floor;
  }
  return ProbabilityVector(std::move(p));
}

std::vector<double> softmax(std::span<const double> log_weights) {
  const double shift = *std::max_element(log_weights.begin(), log_weights.end());
  std::vector<double> out(log_weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = std::exp(log_weights[i] - shift);
    total += out[i];
  }
  for (double& v : out) {
    v /= total;
  }
  return out;
}

double pairwise_sum(std::span<const double> values) {
  if (values.size() <= 8) {
    double s = 0.0;
    for (double v : values) {
      s += v;
    }
    return s;
  }
  const std::size_t half = values.size() / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body) {
  if (workers == 0) {
    workers = std::max(1u, std::thread::hardware_concurrency());
  }
  workers = std::min(workers, n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      body(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

}  // namespace expbandit
