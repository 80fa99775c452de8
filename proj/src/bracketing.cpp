#include "sigdet/bracketing.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "sigdet/errors.hpp"

namespace sigdet {

BracketResult find_unique_root(const std::function<double(double)>& f, double upper,
                               double value_at_upper, const BracketOptions& options) {
  if (!(upper > 0.0) || !std::isfinite(upper)) {
    throw InvalidArgument("find_unique_root: upper end must be positive and finite");
  }
  if (!(value_at_upper > 0.0)) {
    throw NumericalFailure("find_unique_root: function is not positive at the upper end");
  }
  if (options.scan_points < 2) {
    throw InvalidArgument("find_unique_root: need at least two scan points");
  }
  std::size_t evaluations = 0;
  auto eval = [&](double x) {
    ++evaluations;
    return f(x);
  };

  double lower = 0.5 * upper;
  double f_lower = eval(lower);
  for (std::size_t i = 0; f_lower >= 0.0; ++i) {
    if (f_lower == 0.0) return {lower, lower, lower, 1, evaluations};
    if (i >= options.max_halvings || lower < 1e-300) {
      throw NumericalFailure("no sign change found below " + std::to_string(upper) +
                             " after " + std::to_string(i) + " halvings");
    }
    lower *= 0.5;
    f_lower = eval(lower);
  }

  const std::size_t n = options.scan_points;
  std::vector<double> nodes(n);
  std::vector<double> values(n);
  const double log_ratio = std::log(upper / lower);
  for (std::size_t k = 0; k < n; ++k) {
    nodes[k] = lower * std::exp(log_ratio * double(k) / double(n - 1));
  }
  nodes.front() = lower;
  nodes.back() = upper;
  values.front() = f_lower;
  values.back() = value_at_upper;
  for (std::size_t k = 1; k + 1 < n; ++k) {
    values[k] = eval(nodes[k]);
    if (values[k] == 0.0) return {nodes[k], nodes[k], nodes[k], 1, evaluations};
  }

  std::size_t changes = 0;
  std::size_t bracket = 0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if ((values[k] < 0.0) != (values[k + 1] < 0.0)) {
      ++changes;
      bracket = k;
    }
  }
  if (changes == 0) {
    throw NumericalFailure("no sign change on the scan grid");
  }
  if (changes > 1) {
    throw NumericalFailure("found " + std::to_string(changes) +
                           " sign-change brackets; the root is not unique");
  }

  double lo = nodes[bracket];
  double hi = nodes[bracket + 1];
  const bool increasing = values[bracket] < 0.0;
  while (hi - lo > options.relative_tolerance * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = eval(mid);
    if (fm == 0.0) return {mid, lo, hi, changes, evaluations};
    if ((fm < 0.0) == increasing) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {0.5 * (lo + hi), lo, hi, changes, evaluations};
}

}  // namespace sigdet
