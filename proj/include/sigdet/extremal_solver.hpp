#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sigdet/bracketing.hpp"
#include "sigdet/sequence_model.hpp"

namespace sigdet {

/// The three weighted sums that drive the extremal problem at a given
/// Lagrange parameter A:
///   J1 = sum m b^-4 (1 - A a^2)_+
///   J2 = A sum m a^2 b^-4 (1 - A a^2)_+
///   J0 = sum m b^-4 (1 - A a^2)_+^2
/// J0 is accumulated on its own, so J0 == J1 - J2 is a genuine check.
struct JTriple {
  double j0 = 0.0;
  double j1 = 0.0;
  double j2 = 0.0;
};

struct SupportPoint {
  MultiIndex index;
  double multiplicity;
  double b;
  double a_squared;
  double theta_star_squared;
};

/// Minimizer of sum b^4 theta^4 over {sum a^2 theta^2 <= R^2, |theta| >= r}.
struct ExtremalSolution {
  double lagrange_a = 0.0;
  double z0_squared = 0.0;
  std::vector<SupportPoint> support;  // lexicographic order
  JTriple j;
  double radius = 0.0;            // target separation radius r
  double u = 0.0;                 // u_eps(r)
  double epsilon = 0.0;
  double ellipsoid_radius = 1.0;  // R
  std::size_t partitions = 1;     // reduction partitions used for the J sums
};

/// Calls `visit` for every l with A a_l^2 < 1, in lexicographic order.
/// Throws ResourceLimitError when more than config.support_cap indices qualify
/// and InvalidArgument unless A > 0. Returns the number of indices visited.
std::size_t for_each_support_index(const ValidatedConfig& config, double lagrange_a,
                                   const std::function<void(const MultiIndex&)>& visit);

std::vector<MultiIndex> enumerate_support(const ValidatedConfig& config, double lagrange_a);

JTriple compute_J(const ValidatedConfig& config, double lagrange_a);

/// r^2(A) = A J1 / J2, the squared radius reached at Lagrange parameter A.
double radius_squared_at(const ValidatedConfig& config, double lagrange_a);

/// Builds the extremal point for a given A (the radius is whatever A implies).
/// Throws DomainError if the support at A is empty.
ExtremalSolution solution_at(const ValidatedConfig& config, double lagrange_a);

/// Solves the extremal problem for separation radius r with unit ellipsoid.
/// Throws DomainError("radius exceeds ellipsoid") unless 0 < r^2 < 1/a_min^2,
/// NumericalFailure when the bracket is not unique or a constraint residual
/// exceeds 1e-8.
ExtremalSolution solve_extremal(const ValidatedConfig& config, double radius,
                                const BracketOptions& options = {});

/// Same problem with ellipsoid radius R, via u(r, R) = R^2 u(r / R, 1):
/// theta*^2, z0^2 and u scale by R^2, A and the J sums are unchanged.
ExtremalSolution solve_extremal(const ValidatedConfig& config, double radius,
                                double ellipsoid_radius, const BracketOptions& options = {});

/// Finds the radius at which u_eps(r) equals `target_u` and returns the
/// corresponding solution. Throws DomainError when `target_u` is at or above
/// the value reached at the largest feasible radius.
ExtremalSolution solve_for_u(const ValidatedConfig& config, double target_u,
                             const BracketOptions& options = {});

/// Largest value of u_eps over feasible radii, attained as r^2 -> 1/a_min^2
/// where the support collapses onto (1, ..., 1).
double max_attainable_u(const ValidatedConfig& config);

struct ConstraintResiduals {
  double radius_relative;     // |sum m theta^2 - r^2| / r^2
  double ellipsoid_relative;  // |sum m a^2 theta^2 - R^2| / R^2
  double u_relative;          // |sqrt(sum m b^4 theta^4 / 2) / eps^2 - u| / u
};

/// Recomputes the constraints directly from the support points.
ConstraintResiduals constraint_residuals(const ExtremalSolution& solution);

}  // namespace sigdet
