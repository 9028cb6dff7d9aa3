#include "expbandit/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <set>
#include <sstream>

#include <fmt/core.h>

#include "expbandit/exp_policies.hpp"
#include "expbandit/lowerbound.hpp"

namespace expbandit::cli {

std::string to_string(const ConfigError& e) {
  if (e.line == 0) return fmt::format("{}: {}", e.key, e.message);
  return fmt::format("line {}: {}: {}", e.line, e.key, e.message);
}

namespace {

std::string join_errors(const std::vector<ConfigError>& errors) {
  std::string msg = fmt::format("{} configuration error(s)", errors.size());
  for (const auto& e : errors) msg += "\n  " + to_string(e);
  return msg;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  return {std::istream_iterator<std::string>(in), std::istream_iterator<std::string>()};
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    // Accept integral scientific notation such as 1e5.
    const auto d = to_double(s);
    if (d && *d >= 0.0 && *d < 1.8e19 && std::floor(*d) == *d) return static_cast<std::uint64_t>(*d);
    return std::nullopt;
  }
  return v;
}

std::optional<std::int64_t> to_i64(const std::string& s) {
  std::int64_t v = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

std::optional<std::vector<double>> to_doubles(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_ws(s)) {
    auto v = to_double(tok);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

const char* kind_name(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::bandit_adversarial: return "bandit-adversarial";
    case ExperimentKind::bandit_contextual: return "bandit-contextual";
    case ExperimentKind::lower_bound: return "lower-bound";
    case ExperimentKind::rl: return "rl";
  }
  return "?";
}

struct PendingExpert {
  std::size_t line;
  std::string text;
};

class Parser {
 public:
  Parser(const std::filesystem::path& base_dir, std::optional<std::uint64_t> seed_override)
      : base_dir_(base_dir), seed_override_(seed_override) {}

  ExperimentConfig parse(std::istream& in) {
    std::ostringstream raw;
    raw << in.rdbuf();
    const std::string text = raw.str();
    cfg_.config_hash = fnv1a(text);
    std::istringstream lines(text);
    std::string line;
    std::size_t no = 0;
    while (std::getline(lines, line)) {
      ++no;
      const auto hash = line.find('#');
      const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
      if (body.empty()) continue;
      const auto eq = body.find('=');
      if (eq == std::string::npos) {
        error(no, body, "expected `key = value`");
        continue;
      }
      const std::string key = trim(body.substr(0, eq));
      const std::string value = trim(body.substr(eq + 1));
      if (key.empty()) {
        error(no, "(empty)", "missing key");
        continue;
      }
      if (value.empty()) {
        error(no, key, "missing value");
        continue;
      }
      if (key != "expert" && key != "means" && seen_.count(key) != 0) {
        error(no, key, fmt::format("duplicate key (first set on line {})", seen_[key]));
        continue;
      }
      seen_[key] = no;
      handle(no, key, value);
      cfg_.echo.emplace_back(key, value);
    }
    finish();
    if (!errors_.empty()) throw ConfigErrors(errors_);
    return std::move(cfg_);
  }

 private:
  void error(std::size_t line, const std::string& key, std::string message) {
    errors_.push_back({line, key, std::move(message)});
  }

  bool has(const std::string& key) const { return seen_.count(key) != 0; }

  template <class T>
  void set_real(std::size_t no, const std::string& key, const std::string& v, T& target,
                const std::function<bool(double)>& ok, const char* range) {
    auto d = to_double(v);
    if (!d) return error(no, key, fmt::format("`{}` is not a real number", v));
    if (!ok(*d)) return error(no, key, fmt::format("{} out of range, expected {}", v, range));
    target = *d;
  }

  void set_size(std::size_t no, const std::string& key, const std::string& v, std::size_t& target,
                std::size_t min_value) {
    auto u = to_u64(v);
    if (!u) return error(no, key, fmt::format("`{}` is not a nonnegative integer", v));
    if (*u < min_value) return error(no, key, fmt::format("{} out of range, expected >= {}", v, min_value));
    target = static_cast<std::size_t>(*u);
  }

  std::filesystem::path resolve(const std::string& v) const {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : base_dir_ / p;
  }

  void handle(std::size_t no, const std::string& key, const std::string& v) {
    const auto positive = [](double d) { return d > 0.0; };
    const auto open_unit = [](double d) { return d > 0.0 && d < 1.0; };
    if (key == "kind") {
      static const std::map<std::string, ExperimentKind> kinds = {
          {"bandit-adversarial", ExperimentKind::bandit_adversarial},
          {"bandit-contextual", ExperimentKind::bandit_contextual},
          {"lower-bound", ExperimentKind::lower_bound},
          {"rl", ExperimentKind::rl}};
      auto it = kinds.find(v);
      if (it == kinds.end()) return error(no, key, fmt::format("unknown kind `{}`", v));
      cfg_.kind = it->second;
    } else if (key == "algorithm") {
      if (v == "exp3p") cfg_.algorithm = Algorithm::exp3p;
      else if (v == "exp4p") cfg_.algorithm = Algorithm::exp4p;
      else if (v == "uniform-baseline") cfg_.algorithm = Algorithm::uniform_baseline;
      else error(no, key, fmt::format("unknown algorithm `{}`", v));
    } else if (key == "K") {
      set_size(no, key, v, cfg_.arms, 2);
    } else if (key == "N") {
      set_size(no, key, v, cfg_.experts, 1);
    } else if (key == "T") {
      set_size(no, key, v, cfg_.horizon, 1);
    } else if (key == "reps") {
      set_size(no, key, v, cfg_.reps, 1);
    } else if (key == "workers") {
      set_size(no, key, v, cfg_.workers, 0);
    } else if (key == "seed") {
      auto u = to_u64(v);
      if (!u) return error(no, key, fmt::format("`{}` is not an unsigned integer", v));
      cfg_.seed = *u;
    } else if (key == "delta") {
      set_real(no, key, v, cfg_.delta, open_unit, "(0,1)");
    } else if (key == "eta") {
      set_real(no, key, v, cfg_.eta, open_unit, "(0,1)");
    } else if (key == "gamma") {
      double g = 0.0;
      set_real(no, key, v, g, [](double d) { return d >= 0.0 && d <= 1.0; }, "[0,1]");
      if (to_double(v) && g == *to_double(v)) cfg_.gamma = g;
    } else if (key == "alpha") {
      double a = 0.0;
      set_real(no, key, v, a, [](double d) { return d >= 0.0; }, ">= 0");
      if (to_double(v) && a == *to_double(v)) cfg_.alpha = a;
    } else if (key == "truncation") {
      double t = 0.0;
      set_real(no, key, v, t, positive, "> 0");
      if (to_double(v) && t == *to_double(v)) cfg_.truncation = t;
    } else if (key == "trace") {
      if (v == "true" || v == "yes" || v == "1") cfg_.write_trace = true;
      else if (v == "false" || v == "no" || v == "0") cfg_.write_trace = false;
      else error(no, key, fmt::format("`{}` is not a boolean", v));
    } else if (key == "env") {
      if (v == "adversarial-csv") cfg_.env = EnvKind::adversarial_csv;
      else if (v == "gaussian") cfg_.env = EnvKind::gaussian;
      else if (v == "bernoulli") cfg_.env = EnvKind::bernoulli;
      else error(no, key, fmt::format("unknown env `{}`", v));
    } else if (key == "rewards") {
      cfg_.rewards_path = resolve(v);
      rewards_line_ = no;
    } else if (key == "means") {
      std::int64_t ctx = 0;
      std::string rest = v;
      if (const auto colon = v.find(':'); colon != std::string::npos) {
        auto c = to_i64(trim(v.substr(0, colon)));
        if (!c) return error(no, key, "context id before `:` must be an integer");
        ctx = *c;
        rest = trim(v.substr(colon + 1));
      }
      auto vals = to_doubles(rest);
      if (!vals) return error(no, key, "expected a list of real means");
      if (!cfg_.means.emplace(ctx, *vals).second) return error(no, key, fmt::format("context {} given twice", ctx));
    } else if (key == "stds") {
      auto vals = to_doubles(v);
      if (!vals) return error(no, key, "expected a list of positive reals");
      for (double s : *vals) {
        if (!(s > 0.0)) return error(no, key, "standard deviations must be positive");
      }
      cfg_.stds = *vals;
    } else if (key == "contexts") {
      if (v == "cyclic") cfg_.process = ContextProcess::cyclic;
      else if (v == "iid") cfg_.process = ContextProcess::iid_uniform;
      else error(no, key, fmt::format("unknown context process `{}` (cyclic or iid)", v));
    } else if (key == "expert") {
      pending_experts_.push_back({no, v});
    } else if (key == "q") {
      set_real(no, key, v, cfg_.q, open_unit, "(0,1)");
    } else if (key == "mu") {
      set_real(no, key, v, cfg_.mu, positive, "> 0");
    } else if (key == "policy") {
      cfg_.policy_path = resolve(v);
      if (!std::filesystem::exists(cfg_.policy_path)) {
        error(no, key, fmt::format("file `{}` does not exist", cfg_.policy_path.string()));
      }
    } else if (key == "output") {
      cfg_.output = v;
    } else if (key.rfind("rl.", 0) == 0) {
      handle_rl(no, key, v);
    } else {
      error(no, key, "unknown key");
    }
  }

  void handle_rl(std::size_t no, const std::string& key, const std::string& v) {
    rl::RlConfig& r = cfg_.rl;
    const auto positive = [](double d) { return d > 0.0; };
    const std::string k = key.substr(3);
    if (k == "length") {
      set_size(no, key, v, r.chain_length, 3);
    } else if (k == "episodes") {
      set_size(no, key, v, r.episodes, 1);
    } else if (k == "steps") {
      set_size(no, key, v, r.steps_per_episode, 1);
    } else if (k == "experts") {
      std::vector<rl::ExpertKind> kinds;
      std::string item;
      std::istringstream in(v);
      while (std::getline(in, item, ',')) {
        item = trim(item);
        if (item == "rnd") kinds.push_back(rl::ExpertKind::rnd);
        else if (item == "plain") kinds.push_back(rl::ExpertKind::plain);
        else return error(no, key, fmt::format("unknown expert `{}` (rnd or plain)", item));
      }
      if (kinds.empty()) return error(no, key, "at least one expert is required");
      r.experts = kinds;
    } else if (k == "epsilon") {
      set_real(no, key, v, r.epsilon, [](double d) { return d >= 0.0 && d <= 1.0; }, "[0,1]");
    } else if (k == "eta") {
      set_real(no, key, v, r.eta, [](double d) { return d > 0.0 && d <= 1.0; }, "(0,1]");
    } else if (k == "temperature") {
      set_real(no, key, v, r.temperature, positive, "> 0");
    } else if (k == "delta") {
      set_real(no, key, v, r.trust_delta, positive, "> 0");
    } else if (k == "learning_rate") {
      set_real(no, key, v, r.learning_rate, [](double d) { return d > 0.0 && d <= 1.0; }, "(0,1]");
    } else if (k == "discount") {
      set_real(no, key, v, r.discount, [](double d) { return d >= 0.0 && d < 1.0; }, "[0,1)");
    } else if (k == "buffer") {
      set_size(no, key, v, r.buffer_capacity, 1);
    } else if (k == "batch") {
      set_size(no, key, v, r.batch_size, 1);
    } else if (k == "rnd_width") {
      set_size(no, key, v, r.rnd_width, 1);
    } else if (k == "rnd_lr") {
      set_real(no, key, v, r.rnd_learning_rate, [](double d) { return d > 0.0 && d < 0.5; }, "(0,0.5)");
    } else if (k == "intrinsic_scale") {
      set_real(no, key, v, r.intrinsic_scale, [](double d) { return d >= 0.0; }, ">= 0");
    } else if (k == "indicator") {
      if (v == "executed") r.indicator = rl::TrustIndicator::executed;
      else if (v == "greedy") r.indicator = rl::TrustIndicator::greedy;
      else error(no, key, fmt::format("unknown indicator `{}` (executed or greedy)", v));
    } else {
      error(no, key, "unknown key");
    }
  }

  void require(const std::string& key) {
    if (!has(key)) error(0, key, "missing mandatory key");
  }

  void finish() {
    require("kind");
    if (seed_override_) {
      cfg_.seed = *seed_override_;
    } else {
      require("seed");
    }
    if (!has("kind")) return;
    switch (cfg_.kind) {
      case ExperimentKind::bandit_adversarial:
      case ExperimentKind::bandit_contextual:
        finish_bandit();
        break;
      case ExperimentKind::lower_bound:
        require("policy");
        require("q");
        require("mu");
        break;
      case ExperimentKind::rl:
        cfg_.rl.seed = cfg_.seed;
        try {
          cfg_.rl.validate();
        } catch (const InvalidInput& e) {
          error(0, "rl", e.what());
        }
        break;
    }
  }

  void finish_bandit() {
    require("algorithm");
    require("K");
    require("T");
    if (!has("K") || !has("T")) return;
    const std::size_t k = cfg_.arms;
    const bool contextual = cfg_.kind == ExperimentKind::bandit_contextual;
    if (contextual && cfg_.env == EnvKind::adversarial_csv) {
      if (has("env")) {
        error(seen_["env"], "env", "contextual experiments need a gaussian or bernoulli env");
      } else {
        error(0, "env", "missing mandatory key");
      }
    }
    if (cfg_.env == EnvKind::adversarial_csv) {
      if (!has("rewards")) {
        require("rewards");
      } else if (!std::filesystem::exists(cfg_.rewards_path)) {
        error(rewards_line_, "rewards", fmt::format("file `{}` does not exist", cfg_.rewards_path.string()));
      } else {
        try {
          AdversarialSequence seq = load_adversarial_csv(cfg_.rewards_path);
          if (seq.num_arms() != k) {
            error(rewards_line_, "rewards", fmt::format("file has {} arms but K = {}", seq.num_arms(), k));
          } else if (seq.horizon() < cfg_.horizon) {
            error(rewards_line_, "rewards", fmt::format("file has {} rows but T = {}", seq.horizon(), cfg_.horizon));
          } else {
            cfg_.sequence = std::move(seq);
          }
        } catch (const std::exception& e) {
          error(rewards_line_, "rewards", e.what());
        }
      }
    } else {
      if (cfg_.means.empty()) require("means");
      for (const auto& [ctx, m] : cfg_.means) {
        if (m.size() != k) error(seen_["means"], "means", fmt::format("context {} has {} means but K = {}", ctx, m.size(), k));
        if (cfg_.env == EnvKind::bernoulli) {
          for (double x : m) {
            if (x < 0.0 || x > 1.0) error(seen_["means"], "means", "bernoulli means must lie in [0,1]");
          }
        }
      }
      if (cfg_.env == EnvKind::gaussian) {
        if (cfg_.stds.empty()) {
          if (has("stds")) return;
          cfg_.stds.assign(k, 1.0);
        } else if (cfg_.stds.size() != k) {
          error(seen_["stds"], "stds", fmt::format("{} stds but K = {}", cfg_.stds.size(), k));
        }
      }
    }
    for (const auto& p : pending_experts_) parse_expert(p);
    if (cfg_.algorithm == Algorithm::exp4p && cfg_.expert_specs.empty() && pending_experts_.empty()) {
      error(0, "expert", "exp4p needs at least one `expert =` line");
    }
    if (has("N") && !pending_experts_.empty() && cfg_.experts != pending_experts_.size()) {
      error(seen_["N"], "N", fmt::format("N = {} but {} experts are listed", cfg_.experts, pending_experts_.size()));
    }
    cfg_.experts = pending_experts_.size();
    if (cfg_.algorithm == Algorithm::exp4p && cfg_.experts == 1 && (!cfg_.gamma || !cfg_.alpha)) {
      error(0, "expert", "exp4p with a single expert needs explicit gamma and alpha");
    }
  }

  void parse_expert(const PendingExpert& p) {
    const auto toks = split_ws(p.text);
    const std::size_t k = cfg_.arms;
    if (toks.empty()) return error(p.line, "expert", "empty expert description");
    const std::string& kind = toks[0];
    if (kind == "uniform" && toks.size() == 1) {
      cfg_.expert_specs.emplace_back(UniformExpert{});
    } else if (kind == "arm" && toks.size() == 2) {
      auto a = to_u64(toks[1]);
      if (!a || *a >= k) return error(p.line, "expert", fmt::format("arm index must lie in 0..{}", k - 1));
      cfg_.expert_specs.emplace_back(FixedArmExpert{static_cast<std::size_t>(*a)});
    } else if (kind == "oracle" && toks.size() == 1) {
      if (cfg_.means.empty()) return error(p.line, "expert", "oracle expert needs env means");
      cfg_.expert_specs.emplace_back(OracleExpert{cfg_.means});
    } else if (kind == "table" && toks.size() == 2) {
      const auto path = resolve(toks[1]);
      if (!std::filesystem::exists(path)) {
        return error(p.line, "expert", fmt::format("file `{}` does not exist", path.string()));
      }
      try {
        cfg_.expert_specs.emplace_back(load_context_table(path, k));
      } catch (const std::exception& e) {
        error(p.line, "expert", e.what());
      }
    } else {
      error(p.line, "expert", fmt::format("malformed expert `{}` (uniform | arm <j> | oracle | table <file>)", p.text));
    }
  }

  std::filesystem::path base_dir_;
  std::optional<std::uint64_t> seed_override_;
  ExperimentConfig cfg_;
  std::vector<ConfigError> errors_;
  std::map<std::string, std::size_t> seen_;
  std::vector<PendingExpert> pending_experts_;
  std::size_t rewards_line_ = 0;
};

// Removes the listed files unless released.
class OutputGuard {
 public:
  explicit OutputGuard(std::vector<std::filesystem::path> files) : files_(std::move(files)) {}
  ~OutputGuard() {
    if (released_) return;
    for (const auto& f : files_) {
      std::error_code ec;
      std::filesystem::remove(f, ec);
    }
  }
  void release() { released_ = true; }

 private:
  std::vector<std::filesystem::path> files_;
  bool released_ = false;
};

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput(fmt::format("cannot write `{}`", path.string()));
  return out;
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::pair<std::string, std::string>>& results,
                    std::ostream& out) {
  out << manifest_line(cfg.seed, cfg.config_hash) << '\n';
  out << "version = " << kVersion << '\n';
  out << "kind = " << kind_name(cfg.kind) << '\n';
  out << "seed = " << cfg.seed << '\n';
  out << fmt::format("config_hash = {:016x}\n", cfg.config_hash);
  out << "# configuration\n";
  for (const auto& [k, v] : cfg.echo) {
    if (k == "seed") continue;
    out << k << " = " << v << '\n';
  }
  out << "# results\n";
  for (const auto& [k, v] : results) out << k << " = " << v << '\n';
}

int run_bandit(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const EnvSpec env = cfg.make_env();
  PolicySpec policy;
  policy.algorithm = cfg.algorithm;
  policy.delta = cfg.delta;
  policy.eta = cfg.eta;
  policy.gamma = cfg.gamma;
  policy.alpha = cfg.alpha;
  policy.truncation = cfg.truncation;

  std::filesystem::create_directories(cfg.output);
  const auto per_rep_path = cfg.output / "per_rep.csv";
  const auto summary_path = cfg.output / "summary.csv";
  const auto manifest_path = cfg.output / "manifest.txt";
  OutputGuard guard({per_rep_path, summary_path, manifest_path});

  const std::string header = manifest_line(cfg.seed, cfg.config_hash);
  std::ofstream per_rep;
  if (cfg.write_trace) {
    per_rep = open_output(per_rep_path);
    per_rep << header << '\n' << "rep,t,context,arm,reward,cum_reward,best_expert_cum,regret\n";
  }
  std::ofstream summary = open_output(summary_path);
  summary << header << '\n' << "rep,R_T,pseudo_R_T,violations\n";

  const std::size_t chunk = std::max<std::size_t>(1, cfg.workers) * 4;
  std::vector<double> realized;
  std::vector<double> pseudo;
  std::size_t total_violations = 0;
  std::vector<std::string> failures;
  double gamma = 0.0, alpha = 0.0;
  std::optional<double> truncation;
  for (std::size_t start = 0; start < cfg.reps; start += chunk) {
    const std::size_t count = std::min(chunk, cfg.reps - start);
    std::vector<std::optional<GameResult>> games(count);
    std::vector<RegretSummary> sums(count);
    parallel_for(count, cfg.workers, [&](std::size_t i) {
      SeededRng rng(cfg.seed, start + i);
      games[i] = play_game(policy, env, cfg.expert_specs, cfg.horizon, rng);
      sums[i] = summarize(*games[i], env);
    });
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t rep = start + i;
      const GameResult& g = *games[i];
      const RegretSummary& s = sums[i];
      gamma = g.gamma;
      alpha = g.alpha;
      truncation = g.truncation;
      if (g.log.size() != cfg.horizon) failures.push_back(fmt::format("rep {} stopped after {} steps", rep, g.log.size()));
      if (!std::isfinite(s.realized)) failures.push_back(fmt::format("rep {} has a non-finite regret", rep));
      if (cfg.write_trace) {
        for (const TraceRow& row : trace(g.log)) {
          per_rep << rep << ',' << row.t << ',' << row.context << ',' << row.arm << ',' << format_real(row.reward)
                  << ',' << format_real(row.cum_reward) << ',' << format_real(row.best_cum) << ','
                  << format_real(row.regret) << '\n';
        }
      }
      summary << rep << ',' << format_real(s.realized) << ','
              << (s.pseudo ? format_real(*s.pseudo) : std::string("nan")) << ',' << s.violations << '\n';
      realized.push_back(s.realized);
      if (s.pseudo) pseudo.push_back(*s.pseudo);
      total_violations += s.violations;
    }
  }
  if (cfg.write_trace && !per_rep) failures.push_back("write error on per_rep.csv");
  if (!summary) failures.push_back("write error on summary.csv");
  if (!failures.empty()) {
    for (const auto& f : failures) err << "error: " << f << '\n';
    return 2;
  }

  const MeanAndStderr agg = aggregate(realized);
  std::vector<std::pair<std::string, std::string>> results = {
      {"gamma", format_real(gamma)},
      {"alpha", format_real(alpha)},
      {"mean_R_T", format_real(agg.mean)},
      {"stderr_R_T", format_real(agg.stderr_mean)},
      {"violations", std::to_string(total_violations)}};
  if (truncation) results.insert(results.begin() + 2, {"truncation", format_real(*truncation)});
  if (pseudo.size() == realized.size()) results.emplace_back("mean_pseudo_R_T", format_real(aggregate(pseudo).mean));
  std::ofstream manifest = open_output(manifest_path);
  write_manifest(cfg, results, manifest);
  if (!manifest) {
    err << "error: write error on manifest.txt\n";
    return 2;
  }
  per_rep.close();
  summary.close();
  manifest.close();
  guard.release();
  out << fmt::format("reps={} T={} mean R_T={} stderr={}\n", cfg.reps, cfg.horizon, format_real(agg.mean),
                     format_real(agg.stderr_mean));
  out << "wrote " << cfg.output.string() << '\n';
  return 0;
}

int run_lower_bound(const ExperimentConfig& cfg, std::ostream& out, std::ostream& err) {
  const ScriptedPolicy policy = load_policy(cfg.policy_path);
  const std::size_t n = policy.horizon();
  const TwoTypeInstance instance = two_arm_instance(cfg.q, cfg.mu);
  SeededRng rng(cfg.seed);
  const BiasEstimate est = simulate_policy_bias(policy, instance, n, cfg.reps, rng, cfg.workers);
  const double bound = lemma5_bias_bound(cfg.q, cfg.mu, n);
  if (!std::isfinite(est.statistic)) {
    err << "error: non-finite bias statistic\n";
    return 2;
  }
  std::filesystem::create_directories(cfg.output);
  const auto summary_path = cfg.output / "summary.csv";
  const auto manifest_path = cfg.output / "manifest.txt";
  OutputGuard guard({summary_path, manifest_path});
  std::ofstream summary = open_output(summary_path);
  summary << manifest_line(cfg.seed, cfg.config_hash) << '\n'
          << "q,mu,n,reps,statistic,stderr,bound,mean_superior_pulls\n"
          << format_real(cfg.q) << ',' << format_real(cfg.mu) << ',' << n << ',' << cfg.reps << ','
          << format_real(est.statistic) << ',' << format_real(est.stderr_statistic) << ',' << format_real(bound)
          << ',' << format_real(est.mean_superior_pulls) << '\n';
  std::ofstream manifest = open_output(manifest_path);
  write_manifest(cfg, {{"statistic", format_real(est.statistic)}, {"bound", format_real(bound)}}, manifest);
  if (!summary || !manifest) {
    err << "error: write error in " << cfg.output.string() << '\n';
    return 2;
  }
  summary.close();
  manifest.close();
  guard.release();
  out << fmt::format("n={} statistic={} stderr={} bound={}\n", n, format_real(est.statistic),
                     format_real(est.stderr_statistic), format_real(bound));
  return 0;
}

}  // namespace

ConfigErrors::ConfigErrors(std::vector<ConfigError> errors)
    : InvalidInput(join_errors(errors)), errors_(std::move(errors)) {}

EnvSpec ExperimentConfig::make_env() const {
  switch (env) {
    case EnvKind::adversarial_csv:
      if (sequence) return *sequence;
      return load_adversarial_csv(rewards_path);
    case EnvKind::gaussian: {
      SubGaussianEnv e;
      e.means = means;
      e.stds = stds;
      e.process = process;
      e.validate();
      return e;
    }
    case EnvKind::bernoulli: {
      BernoulliEnv e;
      e.means = means;
      e.process = process;
      e.validate();
      return e;
    }
  }
  throw InvalidInput("unknown environment");
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override) {
  Parser parser(base_dir, seed_override);
  return parser.parse(in);
}

ExperimentConfig parse_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed_override) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput(fmt::format("cannot open config `{}`", path.string()));
  return parse_config(in, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path(),
                      seed_override);
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("EXPBANDIT_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  std::uint64_t v = 0;
  const std::string s = trim(raw);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidInput(fmt::format("EXPBANDIT_SEED=`{}` is not an unsigned integer", raw));
  }
  return v;
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

std::string manifest_line(std::uint64_t seed, std::uint64_t config_hash) {
  return fmt::format("# expbandit {} seed={} config_hash={:016x}", kVersion, seed, config_hash);
}

int run(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    switch (config.kind) {
      case ExperimentKind::bandit_adversarial:
      case ExperimentKind::bandit_contextual:
        return run_bandit(config, out, err);
      case ExperimentKind::lower_bound:
        return run_lower_bound(config, out, err);
      case ExperimentKind::rl:
        return train_rl(config, out, err);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}

BoundReport compute_bound(const BoundRequest& r) {
  if (r.algorithm == Algorithm::uniform_baseline) throw InvalidInput("bounds exist for exp3p and exp4p only");
  if (r.eta) {
    const SubGaussianEnv env =
        context_free_gaussian(std::vector<double>(r.arms, 0.0), std::vector<double>(r.arms, 1.0));
    if (r.algorithm == Algorithm::exp4p) return exp4p_unbounded_bound(r.arms, r.experts, r.horizon, r.delta, *r.eta, env);
    return exp3p_bound(r.arms, r.horizon, r.delta, *r.eta, env);
  }
  if (r.algorithm == Algorithm::exp4p) return exp4p_bound(r.arms, r.experts, r.horizon, r.delta);
  return exp3p_bound(r.arms, r.horizon, r.delta);
}

void print_bound(const BoundRequest& r, const BoundReport& b, std::ostream& out) {
  const bool exp4 = r.algorithm == Algorithm::exp4p;
  const ExpParams params =
      exp4 ? exp4p_params(r.arms, r.experts, r.horizon, r.delta) : exp3p_params(r.arms, r.horizon, r.delta);
  out << "algorithm = " << (exp4 ? "exp4p" : "exp3p") << '\n';
  out << "K = " << r.arms << '\n';
  if (exp4) out << "N = " << r.experts << '\n';
  out << "T = " << r.horizon << '\n';
  out << "delta = " << format_real(r.delta) << '\n';
  out << "gamma = " << format_real(b.gamma) << '\n';
  out << "alpha = " << format_real(b.alpha) << '\n';
  out << "gamma_le_half = " << (params.side_condition_ok ? "true" : "false") << '\n';
  if (r.eta) {
    out << "eta = " << format_real(*r.eta) << '\n';
    out << "truncation = " << format_real(b.truncation.value_or(0.0)) << '\n';
    out << "probability = " << format_real(b.joint_probability.value_or(0.0)) << '\n';
  }
  out << "bound = " << format_real(b.value) << '\n';
}

void write_table1_csv(std::ostream& out) {
  out << "mu,T_table,T_thm10,G_half,l1\n";
  for (const Table1Row& row : table1_thresholds()) {
    out << format_real(row.mu) << ',' << format_real(row.t_table) << ',' << format_real(row.t_thm10) << ','
        << format_real(row.g_half) << ',' << format_real(row.l1) << '\n';
  }
}

void print_table1(std::ostream& out) {
  out << fmt::format("{:>10} {:>12} {:>14} {:>12} {:>14}\n", "mu", "T(mu)", "two-arm T", "G(1/2,mu)", "l1(mu)");
  for (const Table1Row& row : table1_thresholds()) {
    out << fmt::format("{:>10.0e} {:>12.6g} {:>14.6g} {:>12.3g} {:>14.6g}\n", row.mu, row.t_table, row.t_thm10,
                       row.g_half, row.l1);
  }
}

void print_threshold(double q, double mu, double epsilon, std::ostream& out) {
  const ThresholdReport r = t_threshold_thm8(q, mu, epsilon);
  out << "q = " << format_real(r.q) << '\n';
  out << "mu = " << format_real(r.mu) << '\n';
  out << "epsilon = " << format_real(r.epsilon) << '\n';
  out << "G = " << format_real(r.g_value) << '\n';
  out << "l1 = " << format_real(r.l1) << '\n';
  out << "T_threshold = " << format_real(r.t_threshold) << '\n';
  out << "rate = " << format_real(r.rate) << '\n';
  out << "valid = " << (r.valid ? "true" : "false") << '\n';
}

int simulate_lower_bound(const std::filesystem::path& policy_file, double q, double mu, std::size_t reps,
                         std::uint64_t seed, std::size_t workers, std::ostream& out) {
  const ScriptedPolicy policy = load_policy(policy_file);
  const std::size_t n = policy.horizon();
  const TwoTypeInstance instance = two_arm_instance(q, mu);
  SeededRng rng(seed);
  const BiasEstimate est = simulate_policy_bias(policy, instance, n, reps, rng, workers);
  const double bound = lemma5_bias_bound(q, mu, n);
  out << "n = " << n << '\n';
  out << "reps = " << reps << '\n';
  out << "statistic = " << format_real(est.statistic) << '\n';
  out << "stderr = " << format_real(est.stderr_statistic) << '\n';
  out << "mean_superior_pulls = " << format_real(est.mean_superior_pulls) << '\n';
  out << "bound = " << format_real(bound) << '\n';
  out << "within_bound = " << (est.statistic <= bound + 3.0 * est.stderr_statistic ? "true" : "false") << '\n';
  return std::isfinite(est.statistic) ? 0 : 2;
}

void write_training_csv(const rl::TrainingCurve& curve, std::size_t experts, std::uint64_t seed,
                        std::uint64_t config_hash, std::ostream& out) {
  out << manifest_line(seed, config_hash) << '\n';
  out << "episode,ext_return,intrinsic_mean,goal_hits";
  for (std::size_t k = 1; k <= experts; ++k) out << ",trust_" << k;
  out << '\n';
  for (const auto& ep : curve.episodes) {
    out << ep.episode << ',' << format_real(ep.ext_return) << ',' << format_real(ep.intrinsic_mean) << ','
        << ep.goal_hits;
    for (double w : ep.trust) out << ',' << format_real(w);
    out << '\n';
  }
}

int train_rl(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  if (config.kind != ExperimentKind::rl) {
    err << "error: config kind must be rl\n";
    return 2;
  }
  rl::RlConfig rc = config.rl;
  rc.seed = config.seed;
  const rl::TrainingCurve curve = rl::run_training(rc);
  const double floor = rc.eta / static_cast<double>(rc.experts.size());
  if (curve.min_rho < floor * (1.0 - 1e-12)) {
    err << "error: network probability fell below eta/E\n";
    return 2;
  }
  std::filesystem::create_directories(config.output);
  const auto training_path = config.output / "training.csv";
  const auto manifest_path = config.output / "manifest.txt";
  OutputGuard guard({training_path, manifest_path});
  std::ofstream training = open_output(training_path);
  write_training_csv(curve, rc.experts.size(), config.seed, config.config_hash, training);
  std::ofstream manifest = open_output(manifest_path);
  write_manifest(config,
                 {{"episodes_with_goal", std::to_string(curve.total_goal_hits)}, {"min_rho", format_real(curve.min_rho)}},
                 manifest);
  if (!training || !manifest) {
    err << "error: write error in " << config.output.string() << '\n';
    return 2;
  }
  training.close();
  manifest.close();
  guard.release();
  out << fmt::format("episodes={} goal_hits={} min_rho={}\n", rc.episodes, curve.total_goal_hits,
                     format_real(curve.min_rho));
  return 0;
}

}  // namespace expbandit::cli
