#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <span>
#include <string>
#include <vector>

#include "expbandit/core.hpp"
#include "expbandit/environments.hpp"

namespace expbandit {

using Density = std::function<double(double)>;

// Adaptive 15-point Gauss-Kronrod with interval bisection until the summed
// error estimate is below `abs_tol`.
double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi, double abs_tol = 1e-10,
                          std::size_t max_intervals = 20000);

// Crossing point of q*f0 and (1-q)*f1 for unit-variance Gaussians 0 and mu.
double g_threshold(double q, double mu);

// max of the two weighted L1 integrals, closed form in terms of Phi.
double big_g(double q, double mu);
// Same quantity by direct quadrature of the absolute-value integrands.
double big_g_quadrature(double q, double mu);

// Integral of |N(0,1) - N(mu,1)| density difference (= 2 TV).
double l1_distance(double mu);
double l1_distance(const Density& f0, const Density& f1, double lo, double hi);

struct ThresholdReport {
  double q;
  double mu;
  double epsilon;
  double g_value;
  double l1;
  double t_threshold;
  // Per-step lower bound on pseudo regret, (q - eps) * mu.
  double rate;
  // G < eps < q.
  bool valid;
};

ThresholdReport t_threshold_thm8(double q, double mu, double epsilon);

// T <= 1 / (2 * l1) + 1 for two arms and q = 1/2.
double t_threshold_thm10(double l1);
double t_threshold_thm10(const Density& f0, const Density& f1, double lo, double hi);
double t_threshold_thm10_gaussian(double mu);

struct Table1Row {
  double mu;
  double t_table;
  double t_thm10;
  double g_half;
  double l1;
};

// T(mu) = 1 / (4 mu) + 1 at mu = 1e-5 .. 1e-1, next to the two-arm L1 threshold.
std::vector<Table1Row> table1_thresholds();

// min(1, G(q,mu) + (1-q)(n-1) * l1(mu))
double lemma5_bias_bound(double q, double mu, std::size_t n);

// Largest mu0 on a geometric scan such that big_g(q, mu) < q for all scanned mu <= mu0,
// refined by bisection at the first crossing. Returns 0 when none exists.
double max_feasible_mu(double q);

// b_t(y_1..y_{t-1}) for t = 2..n+1: true means "play the other set than the first pull".
class ScriptedPolicy {
 public:
  using Decision = std::function<bool(std::span<const double> history)>;

  explicit ScriptedPolicy(std::vector<Decision> decisions, std::vector<std::string> descriptions = {});

  std::size_t horizon() const { return decisions_.size(); }
  // step is 2-based as in b_2 .. b_{n+1}; history holds y_1 .. y_{step-1}.
  bool switch_at(std::size_t step, std::span<const double> history) const;
  const std::vector<std::string>& descriptions() const { return descriptions_; }

 private:
  std::vector<Decision> decisions_;
  std::vector<std::string> descriptions_;
};

// One rule per line, for steps 2..n+1 in order:
//   stay | switch | below <stat> <threshold> | above <stat> <threshold>
// with stat in {first, last, mean, sum}; `#` starts a comment.
ScriptedPolicy parse_policy(std::istream& in);
ScriptedPolicy load_policy(const std::filesystem::path& path);
// Random rules drawn from the same grammar.
ScriptedPolicy random_policy(std::size_t n, SeededRng& rng);

struct BiasEstimate {
  double statistic;  // |E_hat[B] - (1-q)(n+1)| / (n+1)
  double stderr_statistic;
  double mean_superior_pulls;
};

BiasEstimate simulate_policy_bias(const ScriptedPolicy& policy, const TwoTypeInstance& instance, std::size_t n,
                                  std::size_t reps, SeededRng& rng, std::size_t workers = 1);

}  // namespace expbandit
