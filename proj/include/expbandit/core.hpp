#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace expbandit {

inline constexpr const char* kVersion = "0.1.0";

// Raised for any argument that violates a documented precondition.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Simplex inputs farther than this from sum 1 are rejected, never renormalized.
inline constexpr double kSimplexTolerance = 1e-9;

class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> entries);

  static ProbabilityVector uniform(std::size_t size);
  static ProbabilityVector one_hot(std::size_t size, std::size_t index);

  std::size_t size() const { return p_.size(); }
  double operator[](std::size_t i) const { return p_[i]; }
  std::span<const double> entries() const { return p_; }
  double min() const;

 private:
  std::vector<double> p_;
};

// N expert rows over K arms.
class AdviceMatrix {
 public:
  explicit AdviceMatrix(std::vector<ProbabilityVector> rows);

  std::size_t num_experts() const { return rows_.size(); }
  std::size_t num_arms() const { return rows_.front().size(); }
  const ProbabilityVector& row(std::size_t i) const { return rows_[i]; }
  double at(std::size_t expert, std::size_t arm) const { return rows_[expert][arm]; }

 private:
  std::vector<ProbabilityVector> rows_;
};

struct RewardVector {
  RewardVector() = default;
  RewardVector(std::vector<double> values, bool bounded);

  std::vector<double> values;
  // Entries are guaranteed to lie in [0,1].
  bool bounded = false;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

struct RunStep {
  std::int64_t context = 0;
  std::optional<AdviceMatrix> advice;
  std::size_t arm = 0;
  RewardVector rewards;
  double player_reward = 0.0;
};

class RunLog {
 public:
  explicit RunLog(std::size_t horizon) : horizon_(horizon) {}

  // Rejects steps whose player reward is not rewards[arm] or that exceed the horizon.
  void push(RunStep step);

  std::size_t horizon() const { return horizon_; }
  std::size_t size() const { return steps_.size(); }
  const RunStep& operator[](std::size_t i) const { return steps_[i]; }
  const std::vector<RunStep>& steps() const { return steps_; }
  void reserve(std::size_t n) { steps_.reserve(n); }

 private:
  std::size_t horizon_;
  std::vector<RunStep> steps_;
};

// Counter-based 64-bit generator. The key is derived from (seed, stream) and
// draw n is a bijective mix of key + n * golden, so any replication can be
// reconstructed without replaying the others.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t draws() const { return counter_; }

  std::uint64_t next_u64();
  // Uniform on [0,1) with 53 random bits.
  double uniform();
  double normal();
  std::size_t uniform_index(std::size_t n);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::optional<double> spare_normal_;
};

std::uint64_t mix64(std::uint64_t x);

std::size_t sample_index(const ProbabilityVector& p, SeededRng& rng);

// p_j = (1 - gamma) * sum_i q_i * advice(i, j) + gamma / K
ProbabilityVector mix(const AdviceMatrix& advice, const ProbabilityVector& q, double gamma);

// Normalized exp(log_weights) computed with the max-shift trick.
std::vector<double> softmax(std::span<const double> log_weights);

// Sum with pairwise (cascade) reduction; result does not depend on how the
// input was partitioned across workers.
double pairwise_sum(std::span<const double> values);

// Runs body(i) for i in [0, n) over `workers` threads (0 = hardware concurrency).
// Exceptions from any worker are rethrown on the calling thread.
void parallel_for(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& body);

}  // namespace expbandit
