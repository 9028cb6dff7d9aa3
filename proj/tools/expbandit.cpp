#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "expbandit/cli.hpp"
#include "expbandit/core.hpp"

namespace cli = expbandit::cli;

int main(int argc, char** argv) {
  CLI::App app{"Bandit experiments: EXP3.P, EXP4.P, EXP4-RL and lower-bound analytics"};
  app.set_version_flag("--version", expbandit::kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::size_t workers = 0;
  bool workers_set = false;
  auto* run = app.add_subcommand("run", "Run an experiment described by a key=value config file");
  run->add_option("config", config_path, "Config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", output_override, "Output directory (overrides `output`)");
  run->add_option("--workers", workers, "Worker threads for replications (0 = all cores)")
      ->each([&](const std::string&) { workers_set = true; });

  std::string alg = "exp4p";
  cli::BoundRequest bound_req;
  std::optional<double> bound_eta;
  auto* bound = app.add_subcommand("bound", "Print the high-probability regret bound and its parameters");
  bound->add_option("--alg", alg, "exp3p or exp4p")->check(CLI::IsMember({"exp3p", "exp4p"}));
  bound->add_option("--K", bound_req.arms, "Number of arms")->required()->check(CLI::Range(2ul, 1ul << 40));
  bound->add_option("--N", bound_req.experts, "Number of experts (exp4p)");
  bound->add_option("--T", bound_req.horizon, "Horizon")->required()->check(CLI::PositiveNumber);
  bound->add_option("--delta", bound_req.delta, "Failure probability")->check(CLI::Range(1e-300, 0.999999));
  bound->add_option("--eta", bound_eta, "Truncation probability for K iid standard normal arms")
      ->check(CLI::Range(1e-300, 0.999999));

  auto* lower = app.add_subcommand("lower-bound", "Lower-bound analytics");
  lower->require_subcommand(1);
  std::string table_csv;
  auto* table = lower->add_subcommand("table", "Print the small-gap threshold table");
  table->add_option("--csv", table_csv, "Also write the table as CSV");
  double th_q = 0.5, th_mu = 0.01, th_eps = 0.25;
  auto* threshold = lower->add_subcommand("threshold", "Horizon threshold for given q, mu, epsilon");
  threshold->add_option("--q", th_q)->required();
  threshold->add_option("--mu", th_mu)->required();
  threshold->add_option("--eps", th_eps)->required();
  std::string policy_file;
  double sim_q = 0.5, sim_mu = 0.1;
  std::size_t sim_reps = 10000;
  std::uint64_t sim_seed = 0;
  std::size_t sim_workers = 1;
  auto* simulate = lower->add_subcommand("simulate", "Estimate the policy bias statistic by simulation");
  simulate->add_option("policy", policy_file, "Policy file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--q", sim_q)->check(CLI::Range(0.0, 1.0));
  simulate->add_option("--mu", sim_mu)->check(CLI::PositiveNumber);
  simulate->add_option("--reps", sim_reps)->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed);
  simulate->add_option("--workers", sim_workers);

  auto* rl = app.add_subcommand("rl", "EXP4-RL on the chain environment");
  rl->require_subcommand(1);
  std::string rl_config;
  std::string rl_out;
  auto* train = rl->add_subcommand("train", "Train and write the per-episode curve");
  train->add_option("config", rl_config, "Config file with rl.* keys")->required()->check(CLI::ExistingFile);
  train->add_option("--out", rl_out, "Output directory (overrides `output`)");

  CLI11_PARSE(app, argc, argv);

  try {
    const auto env_seed = cli::seed_from_environment();
    if (*run) {
      cli::ExperimentConfig cfg = cli::parse_config(config_path, env_seed);
      if (!output_override.empty()) cfg.output = output_override;
      if (workers_set) cfg.workers = workers;
      return cli::run(cfg, std::cout, std::cerr);
    }
    if (*bound) {
      bound_req.algorithm = alg == "exp3p" ? expbandit::Algorithm::exp3p : expbandit::Algorithm::exp4p;
      bound_req.eta = bound_eta;
      cli::print_bound(bound_req, cli::compute_bound(bound_req), std::cout);
      return 0;
    }
    if (*table) {
      cli::print_table1(std::cout);
      if (!table_csv.empty()) {
        std::ofstream out(table_csv);
        if (!out) throw expbandit::InvalidInput("cannot write " + table_csv);
        cli::write_table1_csv(out);
      }
      return 0;
    }
    if (*threshold) {
      cli::print_threshold(th_q, th_mu, th_eps, std::cout);
      return 0;
    }
    if (*simulate) {
      const std::uint64_t seed = env_seed.value_or(sim_seed);
      return cli::simulate_lower_bound(policy_file, sim_q, sim_mu, sim_reps, seed, sim_workers, std::cout);
    }
    if (*train) {
      cli::ExperimentConfig cfg = cli::parse_config(rl_config, env_seed);
      if (!rl_out.empty()) cfg.output = rl_out;
      return cli::train_rl(cfg, std::cout, std::cerr);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
