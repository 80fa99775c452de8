#pragma once

#include <map>
#include <vector>

#include "sigdet/extremal_solver.hpp"
#include "sigdet/sequence_model.hpp"

namespace sigdet {

/// Optimal weights w_l = b_l^2 theta_l^2 / sqrt(2 sum m b^4 theta^4) over the
/// support of a solution. Entries are aligned: weights[i] belongs to indices[i].
struct FilterWeights {
  std::vector<MultiIndex> indices;  // lexicographic order
  std::vector<double> weights;
  double multiplicity = 1.0;
  double normalization = 0.0;  // sqrt(2 sum m b^4 theta^4)

  /// sum m w^2, equal to 1/2 up to round-off.
  double squared_norm() const;
  /// sum m w.
  double total() const;
};

/// Throws DomainError if the support is empty.
FilterWeights filter_weights(const ExtremalSolution& solution);

/// Standard normal CDF via std::erfc, accurate to a few ulps.
double gaussian_cdf(double x);

/// Inverse of gaussian_cdf by Wichura's AS241 (PPND16), relative error about
/// 1e-16. Throws DomainError unless 0 < p < 1.
double gaussian_inverse_cdf(double p);

/// Upper quantile H = Phi^{-1}(1 - alpha), the level-alpha critical value.
/// Throws DomainError unless 0 < alpha < 1.
double gaussian_quantile(double alpha);

struct TestOutcome {
  double statistic;
  double threshold;
  bool reject;  // statistic > threshold
};

/// Observations per support index: m independent coordinates each.
using Observations = std::map<MultiIndex, std::vector<double>>;

/// Normalized statistic eps^-2 sum_l w_l sum_{k<m} (y_{l,k}^2 - eps^2).
/// Throws InvalidArgument when an index of `weights` is missing, carries the
/// wrong number of coordinates, or when eps <= 0.
TestOutcome run_test(const Observations& observations, const FilterWeights& weights,
                     double epsilon, double threshold);

/// Phi(H - u), the limiting type II error. Throws DomainError unless
/// 0 < alpha < 1.
double predicted_type2(double u, double alpha);

}  // namespace sigdet
