#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "sigdet/extremal_solver.hpp"
#include "sigdet/sequence_model.hpp"

namespace sigdet {

/// The six closed-form separation-rate regimes.
enum class RegimeKind {
  TensorMildOrdinary,       // mild b, a^2 = prod l^{2s}
  TensorMildSupersmooth,    // mild b, a^2 = prod e^{2 s l}, common s
  TensorSevereSupersmooth,  // severe b, a^2 = prod e^{2 s_j l_j}
  TensorSevereOrdinary,     // severe b, a^2 = prod l^{2s}, common s
  SobolevMild,              // mild b, a^2 = sum l^{2 s_j}
  SobolevSevere,            // severe b, a = (sum l)^s, common s
};

std::string_view to_string(RegimeKind kind) noexcept;
RegimeKind parse_regime_kind(std::string_view text);

struct RateRegime {
  RegimeKind kind;
  std::vector<double> t;
  std::vector<double> s;
};

/// Throws DomainError naming the violated inequality:
///   TensorMildOrdinary:      c_1 > ... > c_d with c_j = (1 + 4 t_j) / s_j
///   TensorSevereSupersmooth: t_1 / s_1 > t_j / s_j for j >= 2
///   TensorSevereOrdinary,
///   SobolevSevere:           t_1 > t_j for j >= 2
/// Isotropic regimes also require a common s. Shape errors (length mismatch,
/// nonpositive s, negative t) raise InvalidArgument.
void validate_regime(const RateRegime& regime);

/// r* = eps^epsilon_exponent * (log_scale * ln(1/eps))^log_power.
struct RatePrediction {
  double r_star;
  double epsilon_exponent;
  double log_scale;
  double log_power;
  RateRegime regime;
  double epsilon;
};

/// Closed-form rate for `regime` at noise level eps in (0, 1). For
/// SobolevSevere the returned r* is the cutoff radius (t_1^{-1} ln(1/eps))^{-s};
/// see detection_possible for which side of it is detectable.
RatePrediction separation_rate(const RateRegime& regime, double epsilon);

/// SobolevSevere with r = (C ln(1/eps))^{-s}: true iff u_eps(r) -> infinity,
/// which happens for C < 1/t_1 (larger C means a smaller radius).
bool detection_possible(const RateRegime& regime, double C);

/// The problem configuration that realizes `regime` (mild/severe spectrum and
/// matching smoothness shape) at noise level eps.
ProblemConfig regime_config(const RateRegime& regime, double epsilon,
                            std::int64_t multiplicity = 1);

/// Riemann zeta for x > 1: direct sum of 64 terms plus an Euler-Maclaurin
/// tail through the B_10 term, absolute error below 1e-13 for x >= 1.01.
/// Throws DomainError for x <= 1.
double zeta(double x);

/// Gamma function for x > 0 (std::tgamma). Throws DomainError otherwise.
double gamma_fn(double x);

struct RatioCheck {
  double exact;
  double asymptotic;
  double ratio;  // exact / asymptotic
};

/// Lattice cap for verify_lemma1.
inline constexpr std::uint64_t kDefaultLatticeCap = 200'000'000;

/// Brute-force S(u, s, R) = sum over {prod (l_j / R)^{s_j} <= 1} of prod l_j^{u_j}
/// against R^{sbar c_1} / (1 + u_1) prod_{j>=2} zeta(c_1 s_j - u_j), where
/// c_j = (1 + u_j) / s_j and sbar = sum s_j. Requires strictly decreasing c
/// and c_1 s_j - u_j > 1 (DomainError), and throws ResourceLimitError when
/// the lattice exceeds `cap` points.
RatioCheck verify_lemma1(const std::vector<double>& u, const std::vector<double>& s, double R,
                         std::uint64_t cap = kDefaultLatticeCap);

struct JLemmaCheck {
  RatioCheck j0;
  RatioCheck j1;
  RatioCheck j2;
};

/// Exact J sums from compute_J (mild spectrum, TensorPolynomial smoothness,
/// multiplicity 2^d, A = R^{-2 sbar}) against D_k R^{sbar c_1} with
///   D1 = 2^d 2 s_1 / ((1+4t_1)(1+4t_1+2s_1)) Z
///   D2 = 2^d 2 s_1 / ((1+4t_1+2s_1)(1+4t_1+4s_1)) Z
///   D0 = 2^d 8 s_1^2 / ((1+4t_1)(1+4t_1+2s_1)(1+4t_1+4s_1)) Z
/// and Z = prod_{j>=2} zeta(c_1 s_j - 4 t_j). Requires c_j = (1+4t_j)/s_j
/// strictly decreasing.
JLemmaCheck verify_J_lemmas(const std::vector<double>& t, const std::vector<double>& s,
                            double R, std::int64_t support_cap = kDefaultSupportCap);

/// Liouville constants for the Sobolev-mild integrals
///   C_k = 2^d int_{x >= 0, v <= 1} prod x_j^{4 t_j} f_k(v) dx,  v = sum x_j^{2 s_j}
/// with f_1 = 1 - v, f_2 = v (1 - v), f_0 = (1 - v)^2. With p_j = (4t_j+1)/(2s_j),
/// P = sum p_j and G = prod Gamma(p_j) / (prod s_j Gamma(P)):
///   C1 = G / (P (P+1)),  C2 = G / ((P+1)(P+2)),  C0 = 2 G / (P (P+1)(P+2)).
struct SobolevConstants {
  double c0;
  double c1;
  double c2;
  double p;  // P
  // |closed form - quadrature| per constant; NaN when the oracle was skipped.
  double residual_c0;
  double residual_c1;
  double residual_c2;
};

/// Dimension limit for the nested quadrature oracle.
inline constexpr std::size_t kMaxOracleDimension = 3;

/// Closed-form constants; the quadrature oracle runs when `with_oracle` is
/// set and d <= kMaxOracleDimension.
SobolevConstants sobolev_constants(const std::vector<double>& t, const std::vector<double>& s,
                                   bool with_oracle = true);

/// Limit of u^2 eps^4 r^{-(4 + 2P)} for SobolevMild with multiplicity 2^d:
/// C0 / (2 C1^2) (C2 / C1)^P.
double sobolev_mild_prefactor(const SobolevConstants& constants);

struct SweepPoint {
  double epsilon;
  bool feasible;     // false when target u exceeds the attainable maximum
  double r_solved;   // NaN when infeasible
  double u;
  std::size_t support_size;
  double r_star;     // closed form at this eps
};

struct RateSweep {
  std::vector<SweepPoint> points;
  double fitted_slope;       // least squares of ln r on ln eps over feasible points
  double predicted_exponent;
  std::size_t feasible_count;
};

/// Solves u_eps(r) = target_u at each eps and fits the slope of ln r against
/// ln eps. Points where target_u is unattainable are kept in the output but
/// excluded from the fit. Throws DomainError if fewer than two points remain.
RateSweep rate_sweep(const RateRegime& regime, const std::vector<double>& epsilons,
                     double target_u = 1.0, std::int64_t multiplicity = 1);

/// {2^-4, ..., 2^-12}.
std::vector<double> default_sweep_epsilons();

/// Least-squares slope of y on x.
double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y);

struct LogRadiusPoint {
  double epsilon;
  double radius;
  double u;
};

/// u_eps along r = (C ln(1/eps))^{-s} for a SobolevSevere regime, one exact
/// solve per eps.
std::vector<LogRadiusPoint> sobolev_severe_path(const RateRegime& regime, double C,
                                                const std::vector<double>& epsilons);

struct PrefactorPoint {
  double epsilon;
  double radius;
  double u;
  double scaled;  // u^2 eps^4 r^{-(4 + 2P)}
};

/// Solves u_eps(r) = target_u for SobolevMild with multiplicity 2^d and
/// reports the scaled quantity that should approach sobolev_mild_prefactor.
std::vector<PrefactorPoint> sobolev_mild_prefactor_path(const RateRegime& regime,
                                                        const std::vector<double>& epsilons,
                                                        double target_u = 1.0);

}  // namespace sigdet
