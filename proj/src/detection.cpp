#include "sigdet/detection.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sigdet/compensated_sum.hpp"
#include "sigdet/errors.hpp"

namespace sigdet {

double FilterWeights::squared_norm() const {
  CompensatedSum s;
  for (double w : weights) s += multiplicity * w * w;
  return s.value();
}

double FilterWeights::total() const {
  CompensatedSum s;
  for (double w : weights) s += multiplicity * w;
  return s.value();
}

FilterWeights filter_weights(const ExtremalSolution& solution) {
  if (solution.support.empty()) {
    throw DomainError("filter_weights: empty support");
  }
  FilterWeights out;
  out.multiplicity = solution.support.front().multiplicity;
  CompensatedSum quartic;
  std::vector<double> numerators;
  numerators.reserve(solution.support.size());
  for (const auto& p : solution.support) {
    const double v = p.b * p.b * p.theta_star_squared;
    numerators.push_back(v);
    quartic += p.multiplicity * v * v;
  }
  out.normalization = std::sqrt(2.0 * quartic.value());
  if (!(out.normalization > 0.0)) {
    throw DomainError("filter_weights: extremal point is identically zero");
  }
  out.indices.reserve(numerators.size());
  out.weights.reserve(numerators.size());
  for (std::size_t i = 0; i < numerators.size(); ++i) {
    out.indices.push_back(solution.support[i].index);
    out.weights.push_back(numerators[i] / out.normalization);
  }
  return out;
}

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

double poly(const double* c, int n, double x) {
  double r = c[n - 1];
  for (int i = n - 2; i >= 0; --i) r = r * x + c[i];
  return r;
}

}  // namespace

// Wichura, Algorithm AS 241, Applied Statistics 37 (1988), PPND16.
double gaussian_inverse_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("gaussian_inverse_cdf: probability " + std::to_string(p) +
                      " outside (0,1)");
  }
  static constexpr double a[] = {3.3871328727963666080e0, 1.3314166789178437745e2,
                                 1.9715909503065514427e3, 1.3731693765509461125e4,
                                 4.5921953931549871457e4, 6.7265770927008700853e4,
                                 3.3430575583588128105e4, 2.5090809287301226727e3};
  static constexpr double b[] = {1.0,
                                 4.2313330701600911252e1, 6.8718700749205790830e2,
                                 5.3941960214247511077e3, 2.1213794301586595867e4,
                                 3.9307895800092710610e4, 2.8729085735721942674e4,
                                 5.2264952788528545610e3};
  static constexpr double c[] = {1.42343711074968357734e0, 4.63033784615654529590e0,
                                 5.76949722146069140550e0, 3.64784832476320460504e0,
                                 1.27045825245236838258e0, 2.41780725177450611770e-1,
                                 2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[] = {1.0,
                                 2.05319162663775882187e0, 1.67638483018380384940e0,
                                 6.89767334985100004550e-1, 1.48103976427480074590e-1,
                                 1.51986665636164571966e-2, 5.47593808499534494600e-4,
                                 1.05075007164441684324e-9};
  static constexpr double e[] = {6.65790464350110377720e0, 5.46378491116411436990e0,
                                 1.78482653991729133580e0, 2.96560571828504891230e-1,
                                 2.65321895265761230930e-2, 1.24266094738807843860e-3,
                                 2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[] = {1.0,
                                 5.99832206555887937690e-1, 1.36929880922735805310e-1,
                                 1.48753612908506148525e-2, 7.86869131145613259100e-4,
                                 1.84631831751005468180e-5, 1.42151175831644588870e-7,
                                 2.04426310338993978564e-15};

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, 8, r) / poly(b, 8, r);
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = poly(c, 8, r) / poly(d, 8, r);
  } else {
    r -= 5.0;
    x = poly(e, 8, r) / poly(f, 8, r);
  }
  return q < 0.0 ? -x : x;
}

double gaussian_quantile(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw DomainError("alpha " + std::to_string(alpha) + " outside (0,1)");
  }
  // Phi^{-1}(1 - alpha) = -Phi^{-1}(alpha) avoids rounding 1 - alpha.
  return -gaussian_inverse_cdf(alpha);
}

TestOutcome run_test(const Observations& observations, const FilterWeights& weights,
                     double epsilon, double threshold) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw InvalidArgument("run_test: epsilon must be positive");
  }
  const auto m = static_cast<std::size_t>(weights.multiplicity);
  const double eps2 = epsilon * epsilon;
  CompensatedSum stat;
  for (std::size_t i = 0; i < weights.indices.size(); ++i) {
    const auto it = observations.find(weights.indices[i]);
    if (it == observations.end()) {
      throw InvalidArgument("run_test: no observation for index " +
                            to_string(weights.indices[i]));
    }
    if (it->second.size() != m) {
      throw InvalidArgument("run_test: index " + to_string(weights.indices[i]) + " has " +
                            std::to_string(it->second.size()) + " coordinates, expected " +
                            std::to_string(m));
    }
    for (double y : it->second) stat += weights.weights[i] * (y * y / eps2 - 1.0);
  }
  const double s = stat.value();
  return {s, threshold, s > threshold};
}

double predicted_type2(double u, double alpha) {
  return gaussian_cdf(gaussian_quantile(alpha) - u);
}

}  // namespace sigdet
