#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "expbandit/cli.hpp"
#include "expbandit/exp4rl.hpp"
#include "expbandit/exp_policies.hpp"
#include "expbandit/lowerbound.hpp"
#include "expbandit/regret.hpp"

namespace py = pybind11;
using namespace expbandit;

namespace {

SubGaussianEnv gaussian_env(std::vector<double> means, std::vector<double> stds) {
  return context_free_gaussian(std::move(means), std::move(stds));
}

py::dict run_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  const auto config = cli::parse_config(path, seed);
  std::ostringstream out, err;
  const int code = cli::run(config, out, err);
  py::dict d;
  d["exit_code"] = code;
  d["stdout"] = out.str();
  d["stderr"] = err.str();
  return d;
}

py::dict monte_carlo_bernoulli(const MeansByContext& means, std::size_t horizon, std::size_t reps,
                               std::uint64_t seed, std::size_t workers) {
  BernoulliEnv env;
  env.means = means;
  const std::vector<ExpertSpec> experts = {UniformExpert{}, OracleExpert{means}};
  const auto res = monte_carlo_regret(PolicySpec{}, env, experts, horizon, reps, seed, {workers, false});
  py::dict d;
  d["mean_regret"] = res.mean_regret;
  d["stderr_regret"] = res.stderr_regret;
  d["mean_pseudo"] = res.mean_pseudo;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exponential-weights bandit algorithms, bounds and lower-bound analytics";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);

  py::class_<ExpParams>(m, "ExpParams")
      .def_readonly("gamma", &ExpParams::gamma)
      .def_readonly("alpha", &ExpParams::alpha)
      .def_readonly("side_condition_ok", &ExpParams::side_condition_ok);

  py::class_<BoundReport>(m, "BoundReport")
      .def_readonly("value", &BoundReport::value)
      .def_readonly("gamma", &BoundReport::gamma)
      .def_readonly("alpha", &BoundReport::alpha)
      .def_readonly("delta", &BoundReport::delta)
      .def_readonly("truncation", &BoundReport::truncation)
      .def_readonly("joint_probability", &BoundReport::joint_probability);

  py::class_<SubGaussianEnv>(m, "SubGaussianEnv")
      .def(py::init(&gaussian_env), py::arg("means"), py::arg("stds"))
      .def_readonly("stds", &SubGaussianEnv::stds);

  m.def("exp4p_params", &exp4p_params, py::arg("arms"), py::arg("experts"), py::arg("horizon"),
        py::arg("delta") = 0.05);
  m.def("exp3p_params", &exp3p_params, py::arg("arms"), py::arg("horizon"), py::arg("delta") = 0.05);
  m.def("exp4p_bound", &exp4p_bound, py::arg("arms"), py::arg("experts"), py::arg("horizon"), py::arg("delta"));
  m.def("exp4p_unbounded_bound",
        py::overload_cast<std::size_t, std::size_t, std::size_t, double, double, double>(&exp4p_unbounded_bound),
        py::arg("arms"), py::arg("experts"), py::arg("horizon"), py::arg("delta"), py::arg("eta"),
        py::arg("truncation"));
  m.def("exp3p_bound", py::overload_cast<std::size_t, std::size_t, double>(&exp3p_bound), py::arg("arms"),
        py::arg("horizon"), py::arg("delta"));
  m.def("compute_delta", &compute_delta, py::arg("eta"), py::arg("env"));
  m.def("standard_normal_cdf", &standard_normal_cdf, py::arg("x"));

  m.def("big_g", &big_g, py::arg("q"), py::arg("mu"));
  m.def("big_g_quadrature", &big_g_quadrature, py::arg("q"), py::arg("mu"));
  m.def("l1_distance", py::overload_cast<double>(&l1_distance), py::arg("mu"));
  m.def("lemma5_bias_bound", &lemma5_bias_bound, py::arg("q"), py::arg("mu"), py::arg("n"));
  m.def("max_feasible_mu", &max_feasible_mu, py::arg("q"));
  m.def(
      "t_threshold",
      [](double q, double mu, double epsilon) {
        const auto r = t_threshold_thm8(q, mu, epsilon);
        py::dict d;
        d["g_value"] = r.g_value;
        d["t_threshold"] = r.t_threshold;
        d["rate"] = r.rate;
        d["valid"] = r.valid;
        return d;
      },
      py::arg("q"), py::arg("mu"), py::arg("epsilon"));
  m.def("t_threshold_gaussian", &t_threshold_thm10_gaussian, py::arg("mu"));
  m.def("threshold_table", [] {
    py::list rows;
    for (const auto& r : table1_thresholds()) {
      py::dict d;
      d["mu"] = r.mu;
      d["t_table"] = r.t_table;
      d["t_gaussian"] = r.t_thm10;
      d["g_half"] = r.g_half;
      d["l1"] = r.l1;
      rows.append(d);
    }
    return rows;
  });

  m.def("monte_carlo_bernoulli", &monte_carlo_bernoulli, py::arg("means"), py::arg("horizon"), py::arg("reps"),
        py::arg("seed") = 0, py::arg("workers") = 1,
        "EXP4.P regret against {uniform, oracle} experts on a Bernoulli instance.");

  m.def(
      "train_rl",
      [](std::size_t chain_length, std::size_t episodes, std::size_t steps, std::uint64_t seed) {
        rl::RlConfig config;
        config.chain_length = chain_length;
        config.episodes = episodes;
        config.steps_per_episode = steps;
        config.seed = seed;
        const auto curve = rl::run_training(config);
        py::dict d;
        d["total_goal_hits"] = curve.total_goal_hits;
        d["min_rho"] = curve.min_rho;
        py::list returns;
        for (const auto& e : curve.episodes) returns.append(e.ext_return);
        d["returns"] = returns;
        return d;
      },
      py::arg("chain_length") = 15, py::arg("episodes") = 200, py::arg("steps") = 60, py::arg("seed") = 0);

  m.def("run_config", &run_config, py::arg("path"), py::arg("seed") = std::nullopt);
}
