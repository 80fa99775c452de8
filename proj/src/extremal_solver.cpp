#include "sigdet/extremal_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sigdet/compensated_sum.hpp"
#include "sigdet/errors.hpp"

namespace sigdet {
namespace {

constexpr double kResidualTolerance = 1e-8;

void require_positive_a(double lagrange_a) {
  if (!(lagrange_a > 0.0) || !std::isfinite(lagrange_a)) {
    throw InvalidArgument("Lagrange parameter A must be positive and finite, got " +
                          std::to_string(lagrange_a));
  }
}

class SupportWalker {
 public:
  SupportWalker(const ValidatedConfig& config, double lagrange_a,
                const std::function<void(const MultiIndex&)>& visit)
      : config_(config.get()), a_(lagrange_a), visit_(visit),
        cap_(static_cast<std::size_t>(config->support_cap)),
        index_(MultiIndex::ones(config.dimension())) {}

  std::size_t run() {
    descend(0);
    return count_;
  }

 private:
  void descend(std::size_t j) {
    const std::size_t d = index_.size();
    for (std::int32_t v = 1;; ++v) {
      if (v == std::numeric_limits<std::int32_t>::max()) {
        throw ResourceLimitError("support coordinate overflow");
      }
      index_[j] = v;
      // Coordinates after j sit at 1, so this is the smallest a^2 in the
      // subtree; monotonicity lets us stop the whole row here.
      if (!(a_ * a_squared(config_, index_) < 1.0)) break;
      if (j + 1 == d) {
        if (++count_ > cap_) {
          throw ResourceLimitError("support size exceeds support_cap = " +
                                   std::to_string(cap_) + " indices");
        }
        visit_(index_);
      } else {
        descend(j + 1);
      }
    }
    index_[j] = 1;
  }

  const ProblemConfig& config_;
  double a_;
  const std::function<void(const MultiIndex&)>& visit_;
  std::size_t cap_;
  MultiIndex index_;
  std::size_t count_ = 0;
};

}  // namespace

std::size_t for_each_support_index(const ValidatedConfig& config, double lagrange_a,
                                   const std::function<void(const MultiIndex&)>& visit) {
  require_positive_a(lagrange_a);
  return SupportWalker(config, lagrange_a, visit).run();
}

std::vector<MultiIndex> enumerate_support(const ValidatedConfig& config, double lagrange_a) {
  std::vector<MultiIndex> out;
  for_each_support_index(config, lagrange_a, [&](const MultiIndex& l) { out.push_back(l); });
  return out;
}

JTriple compute_J(const ValidatedConfig& config, double lagrange_a) {
  const double m = config.multiplicity();
  CompensatedSum j0, j1, j2;
  for_each_support_index(config, lagrange_a, [&](const MultiIndex& l) {
    const double x = lagrange_a * a_squared(config.get(), l);
    const double w = m * inverse_b4(config.get(), l);
    const double slack = 1.0 - x;
    j1 += w * slack;
    j2 += w * x * slack;
    j0 += w * slack * slack;
  });
  return {j0.value(), j1.value(), j2.value()};
}

double radius_squared_at(const ValidatedConfig& config, double lagrange_a) {
  const JTriple j = compute_J(config, lagrange_a);
  if (j.j2 <= 0.0) {
    throw DomainError("empty support at A = " + std::to_string(lagrange_a));
  }
  return lagrange_a * j.j1 / j.j2;
}

ExtremalSolution solution_at(const ValidatedConfig& config, double lagrange_a) {
  ExtremalSolution sol;
  sol.lagrange_a = lagrange_a;
  sol.epsilon = config.epsilon();
  sol.j = compute_J(config, lagrange_a);
  if (sol.j.j2 <= 0.0) {
    throw DomainError("empty support at A = " + std::to_string(lagrange_a));
  }
  sol.z0_squared = lagrange_a / sol.j.j2;
  sol.radius = std::sqrt(lagrange_a * sol.j.j1 / sol.j.j2);
  const double eps2 = config.epsilon() * config.epsilon();
  sol.u = sol.z0_squared * std::sqrt(sol.j.j0 / 2.0) / eps2;

  const double m = config.multiplicity();
  for_each_support_index(config, lagrange_a, [&](const MultiIndex& l) {
    const Coefficients c = coefficients(config, l);
    const double slack = 1.0 - lagrange_a * c.a_squared;
    sol.support.push_back(
        {l, m, c.b, c.a_squared, sol.z0_squared * inverse_b4(config.get(), l) * slack});
  });
  return sol;
}

ConstraintResiduals constraint_residuals(const ExtremalSolution& solution) {
  CompensatedSum norm2, ellipsoid, quartic;
  for (const auto& p : solution.support) {
    const double b2theta2 = p.b * p.b * p.theta_star_squared;
    norm2 += p.multiplicity * p.theta_star_squared;
    ellipsoid += p.multiplicity * p.a_squared * p.theta_star_squared;
    quartic += p.multiplicity * b2theta2 * b2theta2;
  }
  const double r2 = solution.radius * solution.radius;
  const double big_r2 = solution.ellipsoid_radius * solution.ellipsoid_radius;
  const double eps2 = solution.epsilon * solution.epsilon;
  const double u_direct = std::sqrt(quartic.value() / 2.0) / eps2;
  return {std::abs(norm2.value() - r2) / r2, std::abs(ellipsoid.value() - big_r2) / big_r2,
          solution.u > 0.0 ? std::abs(u_direct - solution.u) / solution.u : u_direct};
}

namespace {

void check_residuals(const ExtremalSolution& sol) {
  const ConstraintResiduals res = constraint_residuals(sol);
  if (!(res.radius_relative <= kResidualTolerance) ||
      !(res.ellipsoid_relative <= kResidualTolerance)) {
    throw NumericalFailure("constraint residuals too large after solve: radius " +
                           std::to_string(res.radius_relative) + ", ellipsoid " +
                           std::to_string(res.ellipsoid_relative));
  }
}

// On a fixed support, with S_k = sum m b^-4 a^{2k}, r^2 = (S0 - A S1) / (S1 - A S2),
// so A = (S0 - r^2 S1) / (S1 - r^2 S2). Returns that A for the support at
// `probe`, or 0 when it is not a positive finite number.
double closed_form_a(const ValidatedConfig& config, double probe, double r2) {
  const double m = config.multiplicity();
  CompensatedSum s0, s1, s2;
  for_each_support_index(config, probe, [&](const MultiIndex& l) {
    const double a2 = a_squared(config.get(), l);
    const double w = m * inverse_b4(config.get(), l);
    s0 += w;
    s1 += w * a2;
    s2 += w * a2 * a2;
  });
  const double a = (s0.value() - r2 * s1.value()) / (s1.value() - r2 * s2.value());
  return a > 0.0 && std::isfinite(a) ? a : 0.0;
}

// Replaces the bisection midpoint by the exact root of the piecewise-rational
// r^2(A) when that fits the radius at least as well. This removes indices
// that would otherwise enter the support with theta^2 at round-off level.
double polish_root(const ValidatedConfig& config, const BracketResult& root, double r2) {
  double best = root.root;
  double best_gap = std::abs(radius_squared_at(config, best) - r2);
  for (double probe : {root.root, root.lower, root.upper}) {
    const double a = closed_form_a(config, probe, r2);
    if (!(a > 0.0) || std::abs(a - root.root) > 1e-6 * root.root) continue;
    const double gap = std::abs(radius_squared_at(config, a) - r2);
    if (gap <= best_gap) {
      best = a;
      best_gap = gap;
    }
  }
  return best;
}

}  // namespace

ExtremalSolution solve_extremal(const ValidatedConfig& config, double radius,
                                const BracketOptions& options) {
  const double a_min2 = a_min_squared(config);
  const double r2 = radius * radius;
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("radius must be positive, got " + std::to_string(radius));
  }
  if (!(r2 < 1.0 / a_min2)) {
    throw DomainError("radius exceeds ellipsoid: r^2 = " + std::to_string(r2) +
                      " must be below 1/a_min^2 = " + std::to_string(1.0 / a_min2));
  }
  const double upper = 1.0 / a_min2;
  const BracketResult root = find_unique_root(
      [&](double a) { return radius_squared_at(config, a) - r2; }, upper, upper - r2, options);

  ExtremalSolution sol = solution_at(config, polish_root(config, root, r2));
  sol.radius = radius;
  check_residuals(sol);
  return sol;
}

ExtremalSolution solve_extremal(const ValidatedConfig& config, double radius,
                                double ellipsoid_radius, const BracketOptions& options) {
  if (!(ellipsoid_radius > 0.0) || !std::isfinite(ellipsoid_radius)) {
    throw DomainError("ellipsoid radius must be positive");
  }
  ExtremalSolution sol = solve_extremal(config, radius / ellipsoid_radius, options);
  const double scale = ellipsoid_radius * ellipsoid_radius;
  for (auto& p : sol.support) p.theta_star_squared *= scale;
  sol.z0_squared *= scale;
  sol.u *= scale;
  sol.radius = radius;
  sol.ellipsoid_radius = ellipsoid_radius;
  return sol;
}

double max_attainable_u(const ValidatedConfig& config) {
  const MultiIndex ones = MultiIndex::ones(config.dimension());
  const double eps2 = config.epsilon() * config.epsilon();
  const double a_min2 = a_min_squared(config);
  return 1.0 / (eps2 * a_min2 * std::sqrt(2.0 * config.multiplicity() *
                                          inverse_b4(config.get(), ones)));
}

ExtremalSolution solve_for_u(const ValidatedConfig& config, double target_u,
                             const BracketOptions& options) {
  if (!(target_u > 0.0) || !std::isfinite(target_u)) {
    throw DomainError("target u must be positive");
  }
  const double u_max = max_attainable_u(config);
  if (!(target_u < u_max)) {
    throw DomainError("target u = " + std::to_string(target_u) +
                      " is unattainable: the largest feasible radius gives u = " +
                      std::to_string(u_max));
  }
  const double eps2 = config.epsilon() * config.epsilon();
  auto log_u_gap = [&](double a) {
    const JTriple j = compute_J(config, a);
    const double u = (a / j.j2) * std::sqrt(j.j0 / 2.0) / eps2;
    return std::log(u) - std::log(target_u);
  };
  const double upper = 1.0 / a_min_squared(config);
  const BracketResult root =
      find_unique_root(log_u_gap, upper, std::log(u_max) - std::log(target_u), options);
  ExtremalSolution sol = solution_at(config, root.root);
  check_residuals(sol);
  return sol;
}

}  // namespace sigdet
