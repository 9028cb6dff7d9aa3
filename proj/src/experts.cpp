#include "expbandit/experts.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

namespace expbandit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

ProbabilityVector advise(const ExpertSpec& expert, std::int64_t context, std::size_t /*t*/, std::size_t arms) {
  if (arms < 2) {
    throw InvalidInput("experts advise over at least two arms");
  }
  return std::visit(
      overloaded{
          [&](const UniformExpert&) { return ProbabilityVector::uniform(arms); },
          [&](const FixedArmExpert& e) {
            if (e.arm >= arms) {
              throw InvalidInput(fmt::format("fixed-arm expert points at arm {} but K={}", e.arm, arms));
            }
            return ProbabilityVector::one_hot(arms, e.arm);
          },
          [&](const ContextTableExpert& e) {
            auto it = e.rows.find(context);
            if (it == e.rows.end()) {
              return ProbabilityVector::uniform(arms);
            }
            if (it->second.size() != arms) {
              throw InvalidInput(fmt::format("context-table row for {} has {} entries, expected {}", context,
                                             it->second.size(), arms));
            }
            return it->second;
          },
          [&](const OracleExpert& e) {
            const std::vector<double>* mu = nullptr;
            if (auto it = e.means.find(context); it != e.means.end()) {
              mu = &it->second;
            } else if (e.means.size() == 1) {
              mu = &e.means.begin()->second;
            } else {
              return ProbabilityVector::uniform(arms);
            }
            if (mu->size() != arms) {
              throw InvalidInput("oracle expert means do not match K");
            }
            // max_element returns the first maximum: lowest index wins ties.
            const auto best = static_cast<std::size_t>(std::max_element(mu->begin(), mu->end()) - mu->begin());
            return ProbabilityVector::one_hot(arms, best);
          },
      },
      expert);
}

AdviceMatrix assemble_advice(std::span<const ExpertSpec> experts, std::int64_t context, std::size_t t,
                             std::size_t arms) {
  if (experts.empty()) {
    throw InvalidInput("at least one expert is required");
  }
  std::vector<ProbabilityVector> rows;
  rows.reserve(experts.size());
  for (const auto& e : experts) {
    rows.push_back(advise(e, context, t, arms));
  }
  return AdviceMatrix(std::move(rows));
}

bool is_uniform(const ExpertSpec& expert) { return std::holds_alternative<UniformExpert>(expert); }

std::string describe(const ExpertSpec& expert) {
  return std::visit(overloaded{
                        [](const UniformExpert&) { return std::string("uniform"); },
                        [](const FixedArmExpert& e) { return fmt::format("fixed {}", e.arm); },
                        [](const ContextTableExpert& e) { return fmt::format("table[{} contexts]", e.rows.size()); },
                        [](const OracleExpert&) { return std::string("oracle"); },
                    },
                    expert);
}

ContextTableExpert parse_context_table(std::istream& in, std::size_t arms) {
  ContextTableExpert table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ss(line);
    std::int64_t context = 0;
    if (!(ss >> context)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) {
        continue;
      }
      throw InvalidInput(fmt::format("context table line {}: expected a context id", line_no));
    }
    std::vector<double> p;
    double v = 0.0;
    while (ss >> v) {
      p.push_back(v);
    }
    if (!ss.eof()) {
      throw InvalidInput(fmt::format("context table line {}: malformed probability", line_no));
    }
    if (p.size() != arms) {
      throw InvalidInput(fmt::format("context table line {}: {} probabilities, expected {}", line_no, p.size(), arms));
    }
    try {
      table.rows.insert_or_assign(context, ProbabilityVector(std::move(p)));
    } catch (const InvalidInput& e) {
      throw InvalidInput(fmt::format("context table line {}: {}", line_no, e.what()));
    }
  }
  return table;
}

ContextTableExpert load_context_table(const std::filesystem::path& path, std::size_t arms) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput(fmt::format("cannot open context table {}", path.string()));
  }
  return parse_context_table(in, arms);
}

}  // namespace expbandit
