#include <gtest/gtest.h>

#include <cmath>

#include "sigdet/bracketing.hpp"
#include "sigdet/compensated_sum.hpp"
#include "sigdet/errors.hpp"
#include "sigdet/extremal_solver.hpp"
#include "test_support.hpp"

namespace sigdet {
namespace {

using testing::make_config;
using testing::relative_error;
using testing::worked_config;

TEST(EnumerateSupport, OneDimensionalExcludesBoundary) {
  // l = 3 gives A a^2 = 1 exactly and is excluded.
  const auto s = enumerate_support(worked_config(), 1.0 / 9.0);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0], MultiIndex{1});
  EXPECT_EQ(s[1], MultiIndex{2});
}

TEST(EnumerateSupport, TensorProductLexicographic) {
  const auto c = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {0, 0},
                                             SmoothnessShape::TensorPolynomial, {1, 1}));
  const auto s = enumerate_support(c, 0.2);
  const std::vector<MultiIndex> want{{1, 1}, {1, 2}, {2, 1}};
  EXPECT_EQ(s, want);
}

TEST(EnumerateSupport, EmptyAtOrAboveInverseMinimum) {
  const auto c = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {1, 1},
                                             SmoothnessShape::SobolevSum, {1, 2}));
  EXPECT_TRUE(enumerate_support(c, 1.0 / a_min_squared(c)).empty());
  EXPECT_TRUE(enumerate_support(c, 3.0).empty());
}

TEST(EnumerateSupport, RejectsNonPositiveA) {
  EXPECT_THROW(enumerate_support(worked_config(), 0.0), InvalidArgument);
  EXPECT_THROW(enumerate_support(worked_config(), -1.0), InvalidArgument);
}

TEST(EnumerateSupport, CapErrorNamesTheCap) {
  auto pc = make_config(2, SpectrumKind::MildlyIllPosed, {0, 0}, SmoothnessShape::SobolevSum,
                        {1, 1});
  pc.support_cap = 50;
  const auto c = validate_config(pc);
  try {
    enumerate_support(c, 1e-4);
    FAIL() << "expected ResourceLimitError";
  } catch (const ResourceLimitError& e) {
    EXPECT_NE(std::string(e.what()).find("50"), std::string::npos);
  }
}

TEST(EnumerateSupport, MatchesBruteForceFilter) {
  const auto c = validate_config(make_config(3, SpectrumKind::MildlyIllPosed, {0, 0, 0},
                                             SmoothnessShape::SobolevSum, {1, 0.7, 1.3}));
  const double A = 2e-3;
  std::vector<MultiIndex> brute;
  for (int i = 1; i <= 40; ++i)
    for (int j = 1; j <= 200; ++j)
      for (int k = 1; k <= 40; ++k) {
        const MultiIndex l{i, j, k};
        if (A * a_squared(c.get(), l) < 1.0) brute.push_back(l);
      }
  EXPECT_EQ(enumerate_support(c, A), brute);
}

TEST(ComputeJ, WorkedExample) {
  const JTriple j = compute_J(worked_config(), 1.0 / 9.0);
  EXPECT_NEAR(j.j0, 89.0 / 81.0, 1e-15);
  EXPECT_NEAR(j.j1, 13.0 / 9.0, 1e-15);
  EXPECT_NEAR(j.j2, 28.0 / 81.0, 1e-15);
}

TEST(ComputeJ, MultiplicityDoublesEveryTerm) {
  const JTriple j = compute_J(worked_config(0.1, 2), 1.0 / 9.0);
  EXPECT_NEAR(j.j0, 178.0 / 81.0, 1e-15);
  EXPECT_NEAR(j.j1, 26.0 / 9.0, 1e-15);
  EXPECT_NEAR(j.j2, 56.0 / 81.0, 1e-15);
}

TEST(ComputeJ, EmptySupportIsZero) {
  const JTriple j = compute_J(worked_config(), 2.0);
  EXPECT_EQ(j.j0, 0.0);
  EXPECT_EQ(j.j1, 0.0);
  EXPECT_EQ(j.j2, 0.0);
}

TEST(SolveExtremal, WorkedInstance) {
  const auto c = worked_config();
  const auto sol = solve_extremal(c, std::sqrt(13.0 / 28.0));
  EXPECT_LE(relative_error(sol.lagrange_a, 1.0 / 9.0), 1e-8);
  EXPECT_LE(relative_error(sol.z0_squared, 9.0 / 28.0), 1e-8);
  ASSERT_EQ(sol.support.size(), 2u);
  EXPECT_LE(relative_error(sol.support[0].theta_star_squared, 2.0 / 7.0), 1e-8);
  EXPECT_LE(relative_error(sol.support[1].theta_star_squared, 5.0 / 28.0), 1e-8);
  // u^2 = z0^4 J0 / (2 eps^4) with z0^2 = 9/28, J0 = 89/81, eps = 0.1.
  const double u_oracle = (9.0 / 28.0) * std::sqrt(89.0 / 81.0 / 2.0) / 1e-2;
  EXPECT_LE(relative_error(sol.u, u_oracle), 1e-8);
  EXPECT_NEAR(sol.u, 23.82, 5e-3);
}

TEST(SolveExtremal, SolutionInvariantsHold) {
  const auto c = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {1, 0.5},
                                             SmoothnessShape::SobolevSum, {2, 1}, 0.05));
  const auto sol = solve_extremal(c, 0.05);
  const double m = c.multiplicity();
  for (const auto& p : sol.support) {
    const double want =
        sol.z0_squared * inverse_b4(c.get(), p.index) * (1.0 - sol.lagrange_a * p.a_squared);
    EXPECT_NEAR(p.theta_star_squared, want, 1e-14 * want);
    EXPECT_GT(p.theta_star_squared, 0.0);
    EXPECT_EQ(p.multiplicity, m);
  }
  const auto res = constraint_residuals(sol);
  EXPECT_LE(res.radius_relative, 1e-8);
  EXPECT_LE(res.ellipsoid_relative, 1e-8);
  EXPECT_LE(res.u_relative, 1e-10);
  const double eps4 = std::pow(0.05, 4);
  EXPECT_NEAR(sol.u * sol.u, sol.z0_squared * sol.z0_squared * sol.j.j0 / (2.0 * eps4),
              1e-10 * sol.u * sol.u);
}

TEST(SolveExtremal, RadiusOutsideEllipsoidIsDomainError) {
  const auto c = worked_config();
  try {
    solve_extremal(c, 1.0);
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("radius exceeds ellipsoid"), std::string::npos);
  }
  EXPECT_THROW(solve_extremal(c, 0.0), DomainError);
  EXPECT_THROW(solve_extremal(c, -0.3), DomainError);
}

TEST(SolveExtremal, BoundaryConcentratesOnOrigin) {
  const auto c = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {0.5, 0.5},
                                             SmoothnessShape::SobolevSum, {1, 1}));
  const double r_max = 1.0 / std::sqrt(a_min_squared(c));
  const auto sol = solve_extremal(c, r_max * (1.0 - 1e-6));
  ASSERT_FALSE(sol.support.empty());
  EXPECT_EQ(sol.support.front().index, (MultiIndex{1, 1}));
  double total = 0.0;
  for (const auto& p : sol.support) total += p.multiplicity * p.theta_star_squared;
  EXPECT_GT(sol.support.front().theta_star_squared / total, 0.999);
}

TEST(SolveExtremal, TinyRadiusHitsSupportCap) {
  auto pc = make_config(2, SpectrumKind::MildlyIllPosed, {0, 0}, SmoothnessShape::SobolevSum,
                        {1, 1});
  pc.support_cap = 1000;
  EXPECT_THROW(solve_extremal(validate_config(pc), 1e-4), ResourceLimitError);
}

TEST(SolveExtremal, EllipsoidRadiusScaling) {
  const auto c = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {1, 0.25},
                                             SmoothnessShape::TensorPolynomial, {1, 1}, 0.05));
  const double r = 0.05;
  for (double R : {0.5, 2.0}) {
    const auto scaled = solve_extremal(c, r, R);
    const auto unit = solve_extremal(c, r / R);
    ASSERT_EQ(scaled.support.size(), unit.support.size());
    EXPECT_DOUBLE_EQ(scaled.lagrange_a, unit.lagrange_a);
    EXPECT_NEAR(scaled.u, R * R * unit.u, 1e-12 * scaled.u);
    EXPECT_EQ(scaled.ellipsoid_radius, R);
    EXPECT_EQ(scaled.radius, r);
    double norm2 = 0.0, ell = 0.0;
    for (std::size_t i = 0; i < scaled.support.size(); ++i) {
      const auto& p = scaled.support[i];
      EXPECT_NEAR(p.theta_star_squared, R * R * unit.support[i].theta_star_squared,
                  1e-14 * p.theta_star_squared);
      norm2 += p.theta_star_squared;
      ell += p.a_squared * p.theta_star_squared;
    }
    EXPECT_NEAR(norm2, r * r, 1e-8 * r * r);
    EXPECT_NEAR(ell, R * R, 1e-8 * R * R);
    const auto res = constraint_residuals(scaled);
    EXPECT_LE(res.ellipsoid_relative, 1e-8);
  }
}

TEST(SolveExtremal, MultiplicityLeavesAAndRadiusUnchanged) {
  const auto one = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {1, 0.5},
                                               SmoothnessShape::SobolevSum, {1, 1}, 0.05, 1));
  const auto four = one.with_multiplicity(4);
  const auto a = solve_extremal(one, 0.1);
  const auto b = solve_extremal(four, 0.1);
  EXPECT_NEAR(a.lagrange_a, b.lagrange_a, 1e-9 * a.lagrange_a);
  EXPECT_EQ(a.support.size(), b.support.size());
  // z0^2 scales by 1/m and J0 by m, so u scales by 1/sqrt(m).
  EXPECT_NEAR(a.u / b.u, 2.0, 1e-8);
}

TEST(SolveForU, RecoversTarget) {
  const auto c = validate_config(make_config(2, SpectrumKind::MildlyIllPosed, {1, 0.25},
                                             SmoothnessShape::TensorPolynomial, {1, 1}, 0.01));
  for (double target : {0.1, 1.0, 3.0}) {
    const auto sol = solve_for_u(c, target);
    EXPECT_NEAR(sol.u, target, 1e-8 * target);
    const auto again = solve_extremal(c, sol.radius);
    EXPECT_NEAR(again.u, target, 1e-7 * target);
  }
}

TEST(SolveForU, UnattainableTargetIsDomainError) {
  const auto c = worked_config(0.1);
  const double top = max_attainable_u(c);
  EXPECT_THROW(solve_for_u(c, top * 1.01), DomainError);
  EXPECT_NO_THROW(solve_for_u(c, top * 0.9));
  EXPECT_THROW(solve_for_u(c, 0.0), DomainError);
}

TEST(MaxAttainableU, MatchesSinglePointLimit) {
  const auto c = worked_config(0.1);
  const double r_max = 1.0 / std::sqrt(a_min_squared(c));
  const auto near = solve_extremal(c, r_max * (1.0 - 1e-9));
  EXPECT_NEAR(near.u, max_attainable_u(c), 1e-6 * max_attainable_u(c));
}

// Identity and constraint properties over randomized configurations.
TEST(ExtremalProperties, JIdentityOverRandomConfigs) {
  testing::ConfigSampler sampler(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = sampler.next();
    const double A = sampler.lagrange(c);
    const JTriple j = compute_J(c, A);
    EXPECT_LE(std::abs(j.j0 - (j.j1 - j.j2)), 1e-12 * std::max(1.0, j.j1))
        << "trial " << trial << " A=" << A;
    EXPECT_GE(j.j0, 0.0);
    EXPECT_GE(j.j2, 0.0);
  }
}

TEST(ExtremalProperties, SolvedConstraintsOverRandomConfigs) {
  testing::ConfigSampler sampler(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto c = sampler.next();
    const double A = sampler.lagrange(c);
    const double r = std::sqrt(radius_squared_at(c, A));
    const auto sol = solve_extremal(c, r);
    const auto res = constraint_residuals(sol);
    EXPECT_LE(res.radius_relative, 1e-8) << "trial " << trial;
    EXPECT_LE(res.ellipsoid_relative, 1e-8) << "trial " << trial;
  }
}

TEST(Bracketing, FindsSimpleRoot) {
  const auto res = find_unique_root([](double x) { return x * x - 2.0; }, 4.0, 14.0);
  EXPECT_NEAR(res.root, std::sqrt(2.0), 1e-9);
  EXPECT_EQ(res.sign_changes, 1u);
}

TEST(Bracketing, MultipleBracketsAreReported) {
  // Sign changes at 4, 6 and 8; the halving search lands at 2.5 where f < 0.
  auto f = [](double x) { return (x - 4.0) * (x - 6.0) * (x - 8.0); };
  EXPECT_THROW(find_unique_root(f, 10.0, f(10.0)), NumericalFailure);
}

TEST(Bracketing, NoNegativeValueIsReported) {
  BracketOptions opts;
  opts.max_halvings = 40;
  EXPECT_THROW(find_unique_root([](double x) { return 1.0 + x; }, 1.0, 2.0, opts),
               NumericalFailure);
  EXPECT_THROW(find_unique_root([](double x) { return x; }, 1.0, -1.0), NumericalFailure);
}

TEST(CompensatedSum, RecoversCancelledLowOrderBits) {
  CompensatedSum s;
  s += 1.0;
  for (int i = 0; i < 1000; ++i) s += 1e-16;
  s += -1.0;
  // 1e-16 is not representable, so compare against the exact sum of its double.
  EXPECT_NEAR(s.value(), 1000.0 * 1e-16, 1e-26);
  CompensatedSum a, b;
  a += 1e100;
  b += 1.0;
  b += -1e100;
  a.merge(b);
  EXPECT_EQ(a.value(), 1.0);
}

}  // namespace
}  // namespace sigdet
