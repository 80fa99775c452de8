#include "sigdet/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "sigdet/compensated_sum.hpp"
#include "sigdet/errors.hpp"

namespace sigdet {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

struct Signal {
  std::vector<double> mean;  // b sqrt(theta^2) per support index
  std::vector<double> weight;
  std::size_t m;
};

// Mirrors run_test term by term so both paths agree bit for bit.
double statistic_for(const Signal& sig, double epsilon, GaussianStream& rng) {
  const double eps2 = epsilon * epsilon;
  CompensatedSum stat;
  for (std::size_t i = 0; i < sig.mean.size(); ++i) {
    for (std::size_t k = 0; k < sig.m; ++k) {
      const double y = sig.mean[i] + epsilon * rng.next();
      stat += sig.weight[i] * (y * y / eps2 - 1.0);
    }
  }
  return stat.value();
}

}  // namespace

GaussianStream::GaussianStream(std::uint64_t seed, Arm arm, std::uint64_t replication)
    : key_(splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(arm)) ^
                      replication)) {}

double GaussianStream::next() {
  const std::uint64_t bits = splitmix64(key_ ^ splitmix64(counter_++));
  const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
  return gaussian_inverse_cdf(u);
}

Observations simulate_observations(const std::map<MultiIndex, double>& theta_squared,
                                   const ValidatedConfig& config, double epsilon,
                                   std::uint64_t seed, std::uint64_t replication, Arm arm) {
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("simulate_observations: epsilon must be nonnegative");
  }
  const auto m = static_cast<std::size_t>(config.multiplicity());
  GaussianStream rng(seed, arm, replication);
  Observations out;
  for (const auto& [index, t2] : theta_squared) {
    if (!(t2 >= 0.0)) {
      throw InvalidArgument("simulate_observations: negative theta^2 at index " +
                            to_string(index));
    }
    const double mean = coefficients(config, index).b * std::sqrt(t2);
    std::vector<double> ys(m);
    for (auto& y : ys) y = mean + epsilon * rng.next();
    out.emplace(index, std::move(ys));
  }
  return out;
}

Observations simulate_observations(const std::map<MultiIndex, double>& theta_squared,
                                   const ValidatedConfig& config, std::uint64_t seed,
                                   std::uint64_t replication, Arm arm) {
  return simulate_observations(theta_squared, config, config.epsilon(), seed, replication, arm);
}

std::map<MultiIndex, double> theta_map(const ExtremalSolution& solution) {
  std::map<MultiIndex, double> out;
  for (const auto& p : solution.support) out.emplace(p.index, p.theta_star_squared);
  return out;
}

unsigned default_thread_count() {
  if (const char* env = std::getenv("SIGDET_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<double> simulate_statistics(const ExtremalSolution& solution,
                                        const FilterWeights& weights, std::uint64_t seed,
                                        Arm arm, std::size_t n, unsigned threads) {
  if (weights.indices.size() != solution.support.size()) {
    throw InvalidArgument("simulate_statistics: weights do not match the solution support");
  }
  Signal sig;
  sig.m = static_cast<std::size_t>(weights.multiplicity);
  sig.weight = weights.weights;
  sig.mean.resize(solution.support.size(), 0.0);
  if (arm == Arm::Alternative) {
    for (std::size_t i = 0; i < sig.mean.size(); ++i) {
      const auto& p = solution.support[i];
      sig.mean[i] = p.b * std::sqrt(p.theta_star_squared);
    }
  }
  std::vector<double> out(n);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(threads ? threads : default_thread_count(), n));
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t r = begin; r < end; ++r) {
      GaussianStream rng(seed, arm, r);
      out[r] = statistic_for(sig, solution.epsilon, rng);
    }
  };
  if (workers == 1) {
    run(0, n);
    return out;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back(run, begin, end);
  }
  for (auto& t : pool) t.join();
  return out;
}

double binomial_se(double p, std::size_t n) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

MomentSummary moments(const std::vector<double>& values) {
  if (values.empty()) return {0.0, 0.0};
  CompensatedSum s;
  for (double v : values) s += v;
  const double mean = s.value() / static_cast<double>(values.size());
  CompensatedSum q;
  for (double v : values) q += (v - mean) * (v - mean);
  const double var =
      values.size() > 1 ? q.value() / static_cast<double>(values.size() - 1) : 0.0;
  return {mean, var};
}

ErrorEstimates estimate_errors(const ExperimentPlan& plan) {
  if (plan.replications == 0) {
    throw InvalidArgument("estimate_errors: replications must be positive");
  }
  if (plan.threshold_rule == ThresholdRule::ConsistencyCU && !(plan.c > 0.0 && plan.c < 1.0)) {
    throw InvalidArgument("estimate_errors: threshold constant c must lie in (0,1)");
  }
  const ValidatedConfig config = validate_config(plan.config);
  const ExtremalSolution sol = plan.alternative == AlternativeSpec::Radius
                                   ? solve_extremal(config, plan.value)
                                   : solve_for_u(config, plan.value);
  const FilterWeights weights = filter_weights(sol);
  const double threshold = plan.threshold_rule == ThresholdRule::QuantileAlpha
                               ? gaussian_quantile(config.alpha())
                               : plan.c * sol.u;

  const std::size_t n = plan.replications;
  const auto null_stats = simulate_statistics(sol, weights, plan.seed, Arm::Null, n, plan.threads);
  const auto alt_stats =
      simulate_statistics(sol, weights, plan.seed, Arm::Alternative, n, plan.threads);
  const auto rejections = [&](const std::vector<double>& v) {
    return static_cast<std::size_t>(
        std::count_if(v.begin(), v.end(), [&](double s) { return s > threshold; }));
  };
  const std::size_t type1 = rejections(null_stats);
  const std::size_t type2 = n - rejections(alt_stats);

  ErrorEstimates e{};
  e.alpha = config.alpha();
  e.radius = sol.radius;
  e.u_value = sol.u;
  e.threshold = threshold;
  e.replications = n;
  e.type1_count = type1;
  e.type2_count = type2;
  e.type1_rate = static_cast<double>(type1) / static_cast<double>(n);
  e.type2_rate = static_cast<double>(type2) / static_cast<double>(n);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const bool report_se = n >= kMinReplicationsForSe;
  e.type1_se = report_se ? binomial_se(e.type1_rate, n) : nan;
  e.type2_se = report_se ? binomial_se(e.type2_rate, n) : nan;
  e.predicted_type2 = gaussian_cdf(threshold - sol.u);
  e.support_size = sol.support.size();
  e.seed = plan.seed;
  e.null_moments = moments(null_stats);
  e.alternative_moments = moments(alt_stats);
  return e;
}

}  // namespace sigdet
