#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "expbandit/core.hpp"
#include "expbandit/environments.hpp"

namespace expbandit {

struct UniformExpert {};

struct FixedArmExpert {
  std::size_t arm = 0;
};

// Stored rows per context; unknown contexts fall back to uniform.
struct ContextTableExpert {
  std::map<std::int64_t, ProbabilityVector> rows;
};

// Plays the argmax of the environment means for the current context.
struct OracleExpert {
  MeansByContext means;
};

using ExpertSpec = std::variant<UniformExpert, FixedArmExpert, ContextTableExpert, OracleExpert>;

ProbabilityVector advise(const ExpertSpec& expert, std::int64_t context, std::size_t t, std::size_t arms);
AdviceMatrix assemble_advice(std::span<const ExpertSpec> experts, std::int64_t context, std::size_t t,
                             std::size_t arms);

bool is_uniform(const ExpertSpec& expert);
std::string describe(const ExpertSpec& expert);

// Lines of `context_id p_1 ... p_K`; blank lines and `#` comments are skipped.
ContextTableExpert parse_context_table(std::istream& in, std::size_t arms);
ContextTableExpert load_context_table(const std::filesystem::path& path, std::size_t arms);

}  // namespace expbandit
