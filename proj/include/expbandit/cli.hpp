#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "expbandit/core.hpp"
#include "expbandit/environments.hpp"
#include "expbandit/exp4rl.hpp"
#include "expbandit/exp_policies.hpp"
#include "expbandit/experts.hpp"
#include "expbandit/regret.hpp"

namespace expbandit::cli {

enum class ExperimentKind { bandit_adversarial, bandit_contextual, lower_bound, rl };
enum class EnvKind { adversarial_csv, gaussian, bernoulli };

struct ConfigError {
  std::size_t line = 0;  // 0 when the problem is not tied to one line
  std::string key;
  std::string message;
};

std::string to_string(const ConfigError& e);

// Thrown by parse_config with every problem found in the file.
class ConfigErrors : public InvalidInput {
 public:
  explicit ConfigErrors(std::vector<ConfigError> errors);
  const std::vector<ConfigError>& errors() const { return errors_; }

 private:
  std::vector<ConfigError> errors_;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::bandit_adversarial;
  Algorithm algorithm = Algorithm::exp4p;
  std::size_t arms = 0;     // K
  std::size_t experts = 0;  // N
  std::size_t horizon = 0;  // T
  std::size_t reps = 50;
  std::uint64_t seed = 0;
  double delta = 0.05;
  double eta = 0.05;
  std::optional<double> gamma;
  std::optional<double> alpha;
  std::optional<double> truncation;
  std::size_t workers = 1;
  bool write_trace = true;

  EnvKind env = EnvKind::adversarial_csv;
  std::filesystem::path rewards_path;
  std::optional<AdversarialSequence> sequence;
  MeansByContext means;
  std::vector<double> stds;
  ContextProcess process = ContextProcess::cyclic;
  std::vector<ExpertSpec> expert_specs;

  // lower-bound experiments
  double q = 0.5;
  double mu = 0.1;
  std::filesystem::path policy_path;

  rl::RlConfig rl;

  std::filesystem::path output = "expbandit-out";
  // Effective settings in file order, echoed to the manifest.
  std::vector<std::pair<std::string, std::string>> echo;
  std::uint64_t config_hash = 0;

  EnvSpec make_env() const;
};

// `key = value` lines, `#` comments, repeated `expert =` and `means =` lines
// accumulate. Relative file references resolve against `base_dir`. When
// `seed_override` is set it replaces the configured seed.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".",
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig parse_config(const std::filesystem::path& path,
                              std::optional<std::uint64_t> seed_override = std::nullopt);

// Reads EXPBANDIT_SEED; throws InvalidInput if it is set but not an unsigned integer.
std::optional<std::uint64_t> seed_from_environment();

std::uint64_t fnv1a(std::string_view bytes);
// 17 significant digits, round-trip exact.
std::string format_real(double v);
std::string manifest_line(std::uint64_t seed, std::uint64_t config_hash);

// Writes per_rep.csv, summary.csv and manifest.txt (or the kind's equivalents)
// into config.output. Returns the process exit code; partial outputs are removed
// on failure.
int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

struct BoundRequest {
  Algorithm algorithm = Algorithm::exp4p;
  std::size_t arms = 0;
  std::size_t experts = 0;
  std::size_t horizon = 0;
  double delta = 0.05;
  // Truncated bound for K iid standard normal arms when set.
  std::optional<double> eta;
};

BoundReport compute_bound(const BoundRequest& request);
void print_bound(const BoundRequest& request, const BoundReport& report, std::ostream& out);

void write_table1_csv(std::ostream& out);
void print_table1(std::ostream& out);
void print_threshold(double q, double mu, double epsilon, std::ostream& out);
// Returns the exit code; prints the statistic next to its bound.
int simulate_lower_bound(const std::filesystem::path& policy_file, double q, double mu, std::size_t reps,
                         std::uint64_t seed, std::size_t workers, std::ostream& out);

void write_training_csv(const rl::TrainingCurve& curve, std::size_t experts, std::uint64_t seed,
                        std::uint64_t config_hash, std::ostream& out);
int train_rl(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace expbandit::cli
