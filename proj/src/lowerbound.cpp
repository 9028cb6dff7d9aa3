#include "expbandit/lowerbound.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

#include <fmt/core.h>

#include "expbandit/regret.hpp"

namespace expbandit {

namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851, 0.864864423359769072789712788640926,
    0.741531185599394439863864773280788, 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204, 0.104790010322250183839876322541518,
    0.140653259715525918745189590510238, 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd-indexed Kronrod nodes (1, 3, 5, 7).
constexpr std::array<double, 4> kGaussWeights = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                                 0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Piece {
  double lo;
  double hi;
  double value;
  double error;
  bool operator<(const Piece& other) const { return error < other.error; }
};

Piece gauss_kronrod(const std::function<double(double)>& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double kronrod = fc * kKronrodWeights[7];
  double gauss = fc * kGaussWeights[3];
  for (std::size_t i = 0; i < 7; ++i) {
    const double dx = half * kKronrodNodes[i];
    const double sum = f(center - dx) + f(center + dx);
    kronrod += kKronrodWeights[i] * sum;
    if (i % 2 == 1) {
      gauss += kGaussWeights[i / 2] * sum;
    }
  }
  return {lo, hi, kronrod * half, std::abs((kronrod - gauss) * half)};
}

double unit_gaussian(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// 2 * Phi(x) - 1 without cancellation near zero.
double centered_mass(double x) { return std::erf(x / std::sqrt(2.0)); }

void check_q(double q) {
  if (!(q > 0.0 && q < 1.0)) {
    throw InvalidInput(fmt::format("q={} outside (0,1)", q));
  }
}

double weighted_l1_closed_form(double q, double mu) {
  // |q f0 - (1-q) f1| changes sign at g; integrate each side through Phi.
  const double g = g_threshold(q, mu);
  return q * centered_mass(g) - (1.0 - q) * centered_mass(g - mu);
}

double statistic_of(const std::string& stat, std::span<const double> h) {
  if (stat == "first") {
    return h.front();
  }
  if (stat == "last") {
    return h.back();
  }
  double s = 0.0;
  for (double v : h) {
    s += v;
  }
  if (stat == "sum") {
    return s;
  }
  return s / static_cast<double>(h.size());
}

bool valid_stat(const std::string& stat) {
  return stat == "first" || stat == "last" || stat == "mean" || stat == "sum";
}

ScriptedPolicy::Decision make_rule(const std::string& kind, const std::string& stat, double threshold) {
  if (kind == "stay") {
    return [](std::span<const double>) { return false; };
  }
  if (kind == "switch") {
    return [](std::span<const double>) { return true; };
  }
  const bool below = kind == "below";
  return [below, stat, threshold](std::span<const double> h) {
    const double v = statistic_of(stat, h);
    return below ? v < threshold : v > threshold;
  };
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double lo, double hi, double abs_tol,
                          std::size_t max_intervals) {
  if (!(hi > lo)) {
    if (hi == lo) {
      return 0.0;
    }
    return -integrate_adaptive(f, hi, lo, abs_tol, max_intervals);
  }
  // A single wide panel can miss a narrow bump and report a tiny error, so
  // start from a uniform split.
  constexpr std::size_t kInitialPanels = 32;
  std::priority_queue<Piece> pieces;
  double total = 0.0;
  double error = 0.0;
  const double width = (hi - lo) / static_cast<double>(kInitialPanels);
  for (std::size_t i = 0; i < kInitialPanels; ++i) {
    const double a = lo + width * static_cast<double>(i);
    const double b = i + 1 == kInitialPanels ? hi : a + width;
    const Piece piece = gauss_kronrod(f, a, b);
    total += piece.value;
    error += piece.error;
    pieces.push(piece);
  }
  while (error > abs_tol && pieces.size() < max_intervals) {
    const Piece worst = pieces.top();
    pieces.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    const Piece left = gauss_kronrod(f, worst.lo, mid);
    const Piece right = gauss_kronrod(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    pieces.push(left);
    pieces.push(right);
  }
  // Re-sum to shed drift from the running updates.
  std::vector<double> values;
  values.reserve(pieces.size());
  while (!pieces.empty()) {
    values.push_back(pieces.top().value);
    pieces.pop();
  }
  std::sort(values.begin(), values.end());
  return pairwise_sum(values);
}

double g_threshold(double q, double mu) {
  check_q(q);
  if (!(mu > 0.0)) {
    throw InvalidInput(fmt::format("g threshold needs mu > 0 (got {})", mu));
  }
  return 0.5 * mu - std::log((1.0 - q) / q) / mu;
}

double big_g(double q, double mu) {
  if (!(q >= 0.0 && q <= 1.0) || !(mu >= 0.0)) {
    throw InvalidInput(fmt::format("big_g needs q in [0,1] and mu >= 0 (got q={}, mu={})", q, mu));
  }
  if (q == 0.0 || q == 1.0) {
    return 1.0;
  }
  if (mu == 0.0) {
    return std::abs(1.0 - 2.0 * q);
  }
  return std::max(weighted_l1_closed_form(q, mu), weighted_l1_closed_form(1.0 - q, mu));
}

double big_g_quadrature(double q, double mu) {
  if (!(q >= 0.0 && q <= 1.0) || !(mu >= 0.0)) {
    throw InvalidInput("big_g_quadrature needs q in [0,1] and mu >= 0");
  }
  const double lo = -mu - 12.0;
  const double hi = mu + 12.0;
  const double g1 = integrate_adaptive(
      [q, mu](double x) { return std::abs(q * unit_gaussian(x) - (1.0 - q) * unit_gaussian(x - mu)); }, lo, hi);
  const double g2 = integrate_adaptive(
      [q, mu](double x) { return std::abs((1.0 - q) * unit_gaussian(x) - q * unit_gaussian(x - mu)); }, lo, hi);
  return std::max(g1, g2);
}

double l1_distance(double mu) { return 2.0 * centered_mass(std::abs(mu) / 2.0); }

double l1_distance(const Density& f0, const Density& f1, double lo, double hi) {
  return integrate_adaptive([&](double x) { return std::abs(f0(x) - f1(x)); }, lo, hi, 1e-11);
}

ThresholdReport t_threshold_thm8(double q, double mu, double epsilon) {
  check_q(q);
  if (!(mu > 0.0)) {
    throw InvalidInput("threshold needs mu > 0");
  }
  ThresholdReport r{};
  r.q = q;
  r.mu = mu;
  r.epsilon = epsilon;
  r.g_value = big_g(q, mu);
  r.l1 = l1_distance(mu);
  r.t_threshold = (epsilon - r.g_value) / ((1.0 - q) * r.l1) + 2.0;
  r.rate = (q - epsilon) * mu;
  r.valid = r.g_value < epsilon && epsilon < q;
  return r;
}

double t_threshold_thm10(double l1) {
  if (!(l1 > 0.0)) {
    throw InvalidInput("two-arm threshold needs a positive L1 distance");
  }
  return 1.0 / (2.0 * l1) + 1.0;
}

double t_threshold_thm10(const Density& f0, const Density& f1, double lo, double hi) {
  return t_threshold_thm10(l1_distance(f0, f1, lo, hi));
}

double t_threshold_thm10_gaussian(double mu) { return t_threshold_thm10(l1_distance(mu)); }

std::vector<Table1Row> table1_thresholds() {
  std::vector<Table1Row> rows;
  for (int decade = 5; decade >= 1; --decade) {
    const double inverse_mu = std::pow(10.0, decade);
    const double mu = 1.0 / inverse_mu;
    // inverse_mu is an exact power of ten, so the table values are exact.
    rows.push_back({mu, inverse_mu / 4.0 + 1.0, t_threshold_thm10_gaussian(mu), big_g(0.5, mu), l1_distance(mu)});
  }
  return rows;
}

double lemma5_bias_bound(double q, double mu, std::size_t n) {
  if (n == 0) {
    throw InvalidInput("bias bound needs n >= 1");
  }
  const double bound = big_g(q, mu) + (1.0 - q) * static_cast<double>(n - 1) * l1_distance(mu);
  return std::min(1.0, bound);
}

double max_feasible_mu(double q) {
  check_q(q);
  constexpr double kStart = 1e-6;
  constexpr double kEnd = 50.0;
  if (big_g(q, kStart) >= q) {
    return 0.0;
  }
  double prev = kStart;
  for (double mu = kStart * 1.25; mu <= kEnd; mu *= 1.25) {
    if (big_g(q, mu) >= q) {
      double lo = prev;
      double hi = mu;
      while (hi - lo > 1e-12 * hi) {
        const double mid = 0.5 * (lo + hi);
        (big_g(q, mid) < q ? lo : hi) = mid;
      }
      return lo;
    }
    prev = mu;
  }
  return prev;
}

ScriptedPolicy::ScriptedPolicy(std::vector<Decision> decisions, std::vector<std::string> descriptions)
    : decisions_(std::move(decisions)), descriptions_(std::move(descriptions)) {
  if (decisions_.empty()) {
    throw InvalidInput("scripted policy needs at least one decision");
  }
}

bool ScriptedPolicy::switch_at(std::size_t step, std::span<const double> history) const {
  if (step < 2 || step > decisions_.size() + 1 || history.size() != step - 1) {
    throw InvalidInput(fmt::format("decision b_{} queried with {} observations", step, history.size()));
  }
  return decisions_[step - 2](history);
}

ScriptedPolicy parse_policy(std::istream& in) {
  std::vector<ScriptedPolicy::Decision> rules;
  std::vector<std::string> text;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) {
      continue;
    }
    std::string stat;
    double threshold = 0.0;
    if (kind == "below" || kind == "above") {
      if (!(ss >> stat >> threshold) || !valid_stat(stat)) {
        throw InvalidInput(fmt::format("policy line {}: expected `{} <first|last|mean|sum> <threshold>`", line_no,
                                       kind));
      }
    } else if (kind != "stay" && kind != "switch") {
      throw InvalidInput(fmt::format("policy line {}: unknown rule `{}`", line_no, kind));
    }
    std::string extra;
    if (ss >> extra) {
      throw InvalidInput(fmt::format("policy line {}: trailing token `{}`", line_no, extra));
    }
    rules.push_back(make_rule(kind, stat, threshold));
    text.push_back(stat.empty() ? kind : fmt::format("{} {} {:.17g}", kind, stat, threshold));
  }
  return ScriptedPolicy(std::move(rules), std::move(text));
}

ScriptedPolicy load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidInput(fmt::format("cannot open policy file {}", path.string()));
  }
  return parse_policy(in);
}

ScriptedPolicy random_policy(std::size_t n, SeededRng& rng) {
  static const std::array<const char*, 4> kStats = {"first", "last", "mean", "sum"};
  std::vector<ScriptedPolicy::Decision> rules;
  std::vector<std::string> text;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    if (u < 0.2) {
      rules.push_back(make_rule("stay", "", 0.0));
      text.emplace_back("stay");
    } else if (u < 0.4) {
      rules.push_back(make_rule("switch", "", 0.0));
      text.emplace_back("switch");
    } else {
      const std::string kind = u < 0.7 ? "below" : "above";
      const std::string stat = kStats[rng.uniform_index(kStats.size())];
      const double threshold = 2.0 * rng.uniform() - 1.0;
      rules.push_back(make_rule(kind, stat, threshold));
      text.push_back(fmt::format("{} {} {:.17g}", kind, stat, threshold));
    }
  }
  return ScriptedPolicy(std::move(rules), std::move(text));
}

BiasEstimate simulate_policy_bias(const ScriptedPolicy& policy, const TwoTypeInstance& instance, std::size_t n,
                                  std::size_t reps, SeededRng& rng, std::size_t workers) {
  instance.validate();
  if (policy.horizon() != n) {
    throw InvalidInput(fmt::format("policy scripts {} decisions but n={}", policy.horizon(), n));
  }
  if (reps == 0) {
    throw InvalidInput("simulate_policy_bias needs reps >= 1");
  }
  const std::uint64_t base = rng.next_u64();
  std::vector<double> superior_pulls(reps);
  parallel_for(reps, workers, [&](std::size_t rep) {
    SeededRng local(base, rep);
    std::vector<double> history;
    history.reserve(n + 1);
    const FirstPull first = first_pull(instance, local);
    const bool first_superior = first.set == ArmSet::superior;
    history.push_back(first.reward);
    std::size_t b = first_superior ? 1 : 0;
    for (std::size_t step = 2; step <= n + 1; ++step) {
      const bool flip = policy.switch_at(step, history);
      const bool superior = flip != first_superior;
      b += superior ? 1 : 0;
      if (step <= n) {
        history.push_back(draw_set_reward(instance, superior ? ArmSet::superior : ArmSet::inferior, local));
      }
    }
    superior_pulls[rep] = static_cast<double>(b);
  });
  const MeanAndStderr agg = aggregate(superior_pulls);
  const double pulls = static_cast<double>(n + 1);
  return {std::abs(agg.mean - (1.0 - instance.q) * pulls) / pulls, agg.stderr_mean / pulls, agg.mean};
}

}  // namespace expbandit
