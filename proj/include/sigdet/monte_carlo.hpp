#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "sigdet/detection.hpp"
#include "sigdet/extremal_solver.hpp"
#include "sigdet/sequence_model.hpp"

namespace sigdet {

/// The two simulation arms. Each (seed, arm, replication) owns its own
/// random stream, so results do not depend on worker count or scheduling.
enum class Arm : std::uint32_t { Null = 0, Alternative = 1 };

/// Counter-based standard Gaussian generator. Draw k of a stream is
/// Phi^{-1}(U) where U is the top 53 bits of a SplitMix64 finalizer applied
/// to a hash of (seed, arm, replication, k), shifted off 0 and 1.
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, Arm arm, std::uint64_t replication);
  double next();

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// y_{l,k} = b_l sqrt(theta_l^2) + eps xi_{l,k} for k < m, over the indices of
/// `theta_squared` in lexicographic order. eps = 0 is allowed here and gives
/// the noiseless model. Throws InvalidArgument on a negative theta^2 or eps < 0.
Observations simulate_observations(const std::map<MultiIndex, double>& theta_squared,
                                   const ValidatedConfig& config, double epsilon,
                                   std::uint64_t seed, std::uint64_t replication,
                                   Arm arm = Arm::Alternative);

/// Convenience overload using config.epsilon().
Observations simulate_observations(const std::map<MultiIndex, double>& theta_squared,
                                   const ValidatedConfig& config, std::uint64_t seed,
                                   std::uint64_t replication, Arm arm = Arm::Alternative);

/// theta*^2 of a solution keyed by index, for simulate_observations.
std::map<MultiIndex, double> theta_map(const ExtremalSolution& solution);

/// Normalized statistics for replications [0, n) of one arm. The Null arm
/// simulates theta = 0, the Alternative arm theta = theta* with positive
/// signs. Bit-identical to run_test(simulate_observations(...)) on the same
/// stream. `threads` = 0 means default_thread_count().
std::vector<double> simulate_statistics(const ExtremalSolution& solution,
                                        const FilterWeights& weights, std::uint64_t seed,
                                        Arm arm, std::size_t n, unsigned threads = 0);

/// SIGDET_THREADS if set to a positive integer, else hardware concurrency.
unsigned default_thread_count();

enum class ThresholdRule {
  QuantileAlpha,   // t = gaussian_quantile(alpha)
  ConsistencyCU,   // t = c u_eps, 0 < c < 1
};

/// How the alternative is placed: a separation radius, or a target u_eps
/// from which the radius is solved.
enum class AlternativeSpec { Radius, TargetU };

struct ExperimentPlan {
  ProblemConfig config;
  AlternativeSpec alternative = AlternativeSpec::Radius;
  double value = 0.0;  // radius or target u
  std::size_t replications = 10'000;
  std::uint64_t seed = 0;
  ThresholdRule threshold_rule = ThresholdRule::QuantileAlpha;
  double c = 0.5;        // used by ConsistencyCU
  unsigned threads = 0;  // 0: default_thread_count()
};

/// Standard errors are reported only for at least this many replications.
inline constexpr std::size_t kMinReplicationsForSe = 100;

struct MomentSummary {
  double mean;
  double variance;  // unbiased
};

struct ErrorEstimates {
  double alpha;
  double radius;
  double u_value;
  double threshold;
  double type1_rate;
  double type2_rate;
  double type1_se;  // NaN below kMinReplicationsForSe
  double type2_se;
  double predicted_type2;
  std::size_t replications;
  std::size_t type1_count;
  std::size_t type2_count;
  std::size_t support_size;
  std::uint64_t seed;
  MomentSummary null_moments;
  MomentSummary alternative_moments;
};

/// Solves the extremal problem once, then runs `replications` draws under
/// theta = 0 and under theta = theta*. Throws InvalidArgument for zero
/// replications or c outside (0,1); solver errors propagate.
ErrorEstimates estimate_errors(const ExperimentPlan& plan);

/// sqrt(p (1 - p) / n).
double binomial_se(double p, std::size_t n);

MomentSummary moments(const std::vector<double>& values);

}  // namespace sigdet
