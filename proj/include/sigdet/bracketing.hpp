#pragma once

#include <cstddef>
#include <functional>

namespace sigdet {

/// Root-finding controls for scalar problems on a positive half-line.
struct BracketOptions {
  std::size_t scan_points = 64;       // geometric grid used to count sign changes
  double relative_tolerance = 1e-10;  // bisection stops when (hi - lo) <= tol * hi
  std::size_t max_halvings = 2048;    // lower-bracket search budget
};

struct BracketResult {
  double root;
  double lower;
  double upper;
  std::size_t sign_changes;  // observed on the scan grid
  std::size_t evaluations;
};

/// Finds the root of a continuous f on (0, upper). The caller supplies the
/// left limit f(upper^-) as `value_at_upper`, which must be positive; f need
/// not be defined at `upper` itself.
///
/// A point with f < 0 is located by halving from upper / 2. A geometric grid
/// of `scan_points` nodes between that point and `upper` is then evaluated.
/// Zero or several sign changes on the grid raise NumericalFailure; otherwise
/// the single bracket is bisected. Monotonicity of f is never assumed.
/// Exceptions thrown by f propagate unchanged.
BracketResult find_unique_root(const std::function<double(double)>& f, double upper,
                               double value_at_upper, const BracketOptions& options = {});

}  // namespace sigdet
