"""Exponential-weights bandit algorithms, regret bounds and lower-bound analytics."""

from ._core import (
    BoundReport,
    ExpParams,
    InvalidInput,
    SubGaussianEnv,
    big_g,
    big_g_quadrature,
    compute_delta,
    exp3p_bound,
    exp3p_params,
    exp4p_bound,
    exp4p_params,
    exp4p_unbounded_bound,
    l1_distance,
    lemma5_bias_bound,
    max_feasible_mu,
    monte_carlo_bernoulli,
    run_config,
    standard_normal_cdf,
    t_threshold,
    t_threshold_gaussian,
    threshold_table,
    train_rl,
)

__all__ = [
    "BoundReport",
    "ExpParams",
    "InvalidInput",
    "SubGaussianEnv",
    "big_g",
    "big_g_quadrature",
    "compute_delta",
    "exp3p_bound",
    "exp3p_params",
    "exp4p_bound",
    "exp4p_params",
    "exp4p_unbounded_bound",
    "l1_distance",
    "lemma5_bias_bound",
    "max_feasible_mu",
    "monte_carlo_bernoulli",
    "run_config",
    "standard_normal_cdf",
    "t_threshold",
    "t_threshold_gaussian",
    "threshold_table",
    "train_rl",
]
