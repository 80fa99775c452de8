#include "sigdet/asymptotics.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <string>

#include "sigdet/compensated_sum.hpp"
#include "sigdet/errors.hpp"

namespace sigdet {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_isotropic(RegimeKind kind) {
  return kind == RegimeKind::TensorMildSupersmooth || kind == RegimeKind::TensorSevereOrdinary ||
         kind == RegimeKind::SobolevSevere;
}

void check_shape(const std::vector<double>& t, const std::vector<double>& s) {
  if (t.empty() || t.size() > kMaxDimension) {
    throw InvalidArgument("dimension must be between 1 and " + std::to_string(kMaxDimension));
  }
  if (t.size() != s.size()) {
    throw InvalidArgument("t and s have different lengths (" + std::to_string(t.size()) +
                          " vs " + std::to_string(s.size()) + ")");
  }
  for (std::size_t j = 0; j < t.size(); ++j) {
    if (!(t[j] >= 0.0) || !std::isfinite(t[j])) {
      throw InvalidArgument("t_" + std::to_string(j + 1) + " must be finite and >= 0");
    }
    if (!(s[j] > 0.0) || !std::isfinite(s[j])) {
      throw InvalidArgument("s_" + std::to_string(j + 1) + " must be finite and > 0");
    }
  }
}

double sum_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0);
}

double two_pow(std::size_t d) { return std::ldexp(1.0, static_cast<int>(d)); }

}  // namespace

std::string_view to_string(RegimeKind kind) noexcept {
  switch (kind) {
    case RegimeKind::TensorMildOrdinary: return "tensor_mild_ordinary";
    case RegimeKind::TensorMildSupersmooth: return "tensor_mild_supersmooth";
    case RegimeKind::TensorSevereSupersmooth: return "tensor_severe_supersmooth";
    case RegimeKind::TensorSevereOrdinary: return "tensor_severe_ordinary";
    case RegimeKind::SobolevMild: return "sobolev_mild";
    case RegimeKind::SobolevSevere: return "sobolev_severe";
  }
  return "unknown";
}

RegimeKind parse_regime_kind(std::string_view text) {
  for (auto k : {RegimeKind::TensorMildOrdinary, RegimeKind::TensorMildSupersmooth,
                 RegimeKind::TensorSevereSupersmooth, RegimeKind::TensorSevereOrdinary,
                 RegimeKind::SobolevMild, RegimeKind::SobolevSevere}) {
    if (text == to_string(k)) return k;
  }
  throw InvalidArgument("unknown regime '" + std::string(text) + "'");
}

void validate_regime(const RateRegime& regime) {
  const auto& t = regime.t;
  const auto& s = regime.s;
  check_shape(t, s);
  const std::size_t d = t.size();
  if (is_isotropic(regime.kind)) {
    for (std::size_t j = 1; j < d; ++j) {
      if (s[j] != s[0]) throw DomainError("regime requires a common s: s_1 = s_j for all j");
    }
  }
  switch (regime.kind) {
    case RegimeKind::TensorMildOrdinary:
      for (std::size_t j = 1; j < d; ++j) {
        const double prev = (1.0 + 4.0 * t[j - 1]) / s[j - 1];
        const double cur = (1.0 + 4.0 * t[j]) / s[j];
        if (!(prev > cur)) {
          throw DomainError("ordering violated: c_" + std::to_string(j) + " > c_" +
                            std::to_string(j + 1) + " with c_j = (1 + 4 t_j) / s_j");
        }
      }
      break;
    case RegimeKind::TensorSevereSupersmooth:
      for (std::size_t j = 1; j < d; ++j) {
        if (!(t[0] / s[0] > t[j] / s[j])) {
          throw DomainError("ordering violated: t_1 / s_1 > t_" + std::to_string(j + 1) +
                            " / s_" + std::to_string(j + 1));
        }
      }
      break;
    case RegimeKind::TensorSevereOrdinary:
    case RegimeKind::SobolevSevere:
      if (!(t[0] > 0.0)) throw DomainError("ordering violated: t_1 > 0");
      for (std::size_t j = 1; j < d; ++j) {
        if (!(t[0] > t[j])) {
          throw DomainError("ordering violated: t_1 > t_" + std::to_string(j + 1));
        }
      }
      break;
    case RegimeKind::TensorMildSupersmooth:
    case RegimeKind::SobolevMild:
      break;
  }
}

RatePrediction separation_rate(const RateRegime& regime, double epsilon) {
  validate_regime(regime);
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("separation_rate: epsilon must lie in (0,1)");
  }
  const auto& t = regime.t;
  const auto& s = regime.s;
  RatePrediction p{0.0, 0.0, 1.0, 0.0, regime, epsilon};
  switch (regime.kind) {
    case RegimeKind::TensorMildOrdinary: {
      const double c1 = (1.0 + 4.0 * t[0]) / s[0];
      p.epsilon_exponent = 4.0 / (4.0 + c1);
      break;
    }
    case RegimeKind::TensorMildSupersmooth:
      p.epsilon_exponent = 1.0;
      p.log_power = sum_of(t) + 0.25 * static_cast<double>(t.size());
      break;
    case RegimeKind::TensorSevereSupersmooth:
      p.epsilon_exponent = s[0] / (s[0] + t[0]);
      break;
    case RegimeKind::TensorSevereOrdinary:
      // (ln(eps^-4) / (4 t_1))^{-2s} = (ln(1/eps) / t_1)^{-2s}
      p.log_scale = 1.0 / t[0];
      p.log_power = -2.0 * s[0];
      break;
    case RegimeKind::SobolevMild: {
      double sum = 0.0;
      for (std::size_t j = 0; j < t.size(); ++j) sum += (1.0 + 4.0 * t[j]) / s[j];
      p.epsilon_exponent = 4.0 / (4.0 + sum);
      break;
    }
    case RegimeKind::SobolevSevere:
      p.log_scale = 1.0 / t[0];
      p.log_power = -s[0];
      break;
  }
  const double log_term = p.log_power == 0.0
                              ? 1.0
                              : std::pow(p.log_scale * std::log(1.0 / epsilon), p.log_power);
  p.r_star = std::pow(epsilon, p.epsilon_exponent) * log_term;
  return p;
}

bool detection_possible(const RateRegime& regime, double C) {
  if (regime.kind != RegimeKind::SobolevSevere) {
    throw InvalidArgument("detection_possible applies to the sobolev_severe regime only");
  }
  validate_regime(regime);
  if (!(C > 0.0)) throw DomainError("detection_possible: C must be positive");
  return C < 1.0 / regime.t[0];
}

ProblemConfig regime_config(const RateRegime& regime, double epsilon,
                            std::int64_t multiplicity) {
  ProblemConfig c;
  c.dimension = regime.t.size();
  c.epsilon = epsilon;
  c.orthant_multiplicity = multiplicity;
  c.spectrum.degrees = regime.t;
  c.smoothness.exponents = regime.s;
  switch (regime.kind) {
    case RegimeKind::TensorMildOrdinary:
      c.spectrum.kind = SpectrumKind::MildlyIllPosed;
      c.smoothness.shape = SmoothnessShape::TensorPolynomial;
      break;
    case RegimeKind::TensorMildSupersmooth:
      c.spectrum.kind = SpectrumKind::MildlyIllPosed;
      c.smoothness.shape = SmoothnessShape::TensorExponential;
      break;
    case RegimeKind::TensorSevereSupersmooth:
      c.spectrum.kind = SpectrumKind::SeverelyIllPosed;
      c.smoothness.shape = SmoothnessShape::TensorExponential;
      break;
    case RegimeKind::TensorSevereOrdinary:
      c.spectrum.kind = SpectrumKind::SeverelyIllPosed;
      c.smoothness.shape = SmoothnessShape::TensorPolynomial;
      break;
    case RegimeKind::SobolevMild:
      c.spectrum.kind = SpectrumKind::MildlyIllPosed;
      c.smoothness.shape = SmoothnessShape::SobolevSum;
      break;
    case RegimeKind::SobolevSevere:
      c.spectrum.kind = SpectrumKind::SeverelyIllPosed;
      c.smoothness.shape = SmoothnessShape::SobolevSumPower;
      break;
  }
  return c;
}

double zeta(double x) {
  if (!(x > 1.0) || std::isnan(x)) {
    throw DomainError("zeta: argument must exceed 1, got " + std::to_string(x));
  }
  constexpr int kTerms = 64;
  CompensatedSum head;
  for (int l = kTerms - 1; l >= 1; --l) head += std::pow(static_cast<double>(l), -x);
  // Euler-Maclaurin tail sum_{l >= N} l^-x with Bernoulli corrections B_2..B_10.
  const double n = kTerms;
  static constexpr double bernoulli[] = {1.0 / 6.0, -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                         5.0 / 66.0};
  double tail = std::pow(n, 1.0 - x) / (x - 1.0) + 0.5 * std::pow(n, -x);
  double rising = x;       // x (x+1) ... (x+2k-2)
  double factorial = 2.0;  // (2k)!
  for (int k = 1; k <= 5; ++k) {
    tail += bernoulli[k - 1] / factorial * rising * std::pow(n, -x - 2.0 * k + 1.0);
    rising *= (x + 2.0 * k - 1.0) * (x + 2.0 * k);
    factorial *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
  }
  head += tail;
  return head.value();
}

double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("gamma_fn: argument must be positive and finite, got " +
                      std::to_string(x));
  }
  return std::tgamma(x);
}

RatioCheck verify_lemma1(const std::vector<double>& u, const std::vector<double>& s, double R,
                         std::uint64_t cap) {
  if (u.size() != s.size() || u.empty() || u.size() > kMaxDimension) {
    throw InvalidArgument("verify_lemma1: u and s must have equal length in [1, 8]");
  }
  if (!(R >= 1.0) || !std::isfinite(R)) throw DomainError("verify_lemma1: R must be >= 1");
  const std::size_t d = u.size();
  std::vector<double> c(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (!(s[j] > 0.0)) throw DomainError("verify_lemma1: s_j must be positive");
    if (!(u[j] > -1.0)) throw DomainError("verify_lemma1: u_j must exceed -1");
    c[j] = (1.0 + u[j]) / s[j];
  }
  for (std::size_t j = 1; j < d; ++j) {
    if (!(c[j - 1] > c[j])) {
      throw DomainError("ordering violated: c_" + std::to_string(j) + " > c_" +
                        std::to_string(j + 1) + " with c_j = (1 + u_j) / s_j");
    }
    if (!(c[0] * s[j] - u[j] > 1.0)) {
      throw DomainError("zeta argument c_1 s_j - u_j must exceed 1 for j = " +
                        std::to_string(j + 1));
    }
  }
  const double s_bar = sum_of(s);
  const double log_budget = s_bar * std::log(R);  // sum s_j ln l_j <= sbar ln R
  constexpr double kSlack = 1e-12;

  CompensatedSum total;
  std::uint64_t points = 0;
  // Outer coordinates 2..d are enumerated; coordinate 1 is summed along its row.
  std::function<void(std::size_t, double, double)> walk = [&](std::size_t j, double used,
                                                              double weight) {
    if (j == d) {
      const double remaining = log_budget - used;
      double l1_max = std::floor(std::exp(remaining / s[0]));
      // Check before the +-1 corrections, which stall once l1_max exceeds 2^53.
      if (static_cast<double>(points) + l1_max > 2.0 * static_cast<double>(cap) + 2.0) {
        throw ResourceLimitError("lattice for S(u,s,R) exceeds cap " + std::to_string(cap));
      }
      while (s[0] * std::log(l1_max + 1.0) <= remaining + kSlack * std::max(1.0, log_budget)) {
        l1_max += 1.0;
      }
      while (l1_max >= 1.0 &&
             s[0] * std::log(l1_max) > remaining + kSlack * std::max(1.0, log_budget)) {
        l1_max -= 1.0;
      }
      points += static_cast<std::uint64_t>(l1_max);
      if (points > cap) {
        throw ResourceLimitError("lattice for S(u,s,R) exceeds cap " + std::to_string(cap));
      }
      for (double l1 = 1.0; l1 <= l1_max; l1 += 1.0) total += weight * std::pow(l1, u[0]);
      return;
    }
    for (double l = 1.0;; l += 1.0) {
      const double next = used + s[j] * std::log(l);
      if (next > log_budget + kSlack * std::max(1.0, log_budget)) break;
      walk(j + 1, next, weight * std::pow(l, u[j]));
    }
  };
  walk(1, 0.0, 1.0);

  double asym = std::pow(R, s_bar * c[0]) / (1.0 + u[0]);
  for (std::size_t j = 1; j < d; ++j) asym *= zeta(c[0] * s[j] - u[j]);
  const double exact = total.value();
  return {exact, asym, exact / asym};
}

JLemmaCheck verify_J_lemmas(const std::vector<double>& t, const std::vector<double>& s,
                            double R, std::int64_t support_cap) {
  check_shape(t, s);
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("verify_J_lemmas: R must be positive");
  const std::size_t d = t.size();
  std::vector<double> c(d);
  for (std::size_t j = 0; j < d; ++j) c[j] = (1.0 + 4.0 * t[j]) / s[j];
  for (std::size_t j = 1; j < d; ++j) {
    if (!(c[j - 1] > c[j])) {
      throw DomainError("ordering violated: c_" + std::to_string(j) + " > c_" +
                        std::to_string(j + 1) + " with c_j = (1 + 4 t_j) / s_j");
    }
  }
  ProblemConfig pc;
  pc.dimension = d;
  pc.spectrum = {SpectrumKind::MildlyIllPosed, t};
  pc.smoothness = {SmoothnessShape::TensorPolynomial, s};
  pc.epsilon = 1.0;
  pc.orthant_multiplicity = std::int64_t{1} << d;
  pc.support_cap = support_cap;
  const ValidatedConfig config = validate_config(pc);

  const double s_bar = sum_of(s);
  const double A = std::pow(R, -2.0 * s_bar);
  const JTriple exact = compute_J(config, A);

  double z = 1.0;
  for (std::size_t j = 1; j < d; ++j) z *= zeta(c[0] * s[j] - 4.0 * t[j]);
  const double a = 1.0 + 4.0 * t[0];
  const double s1 = s[0];
  const double scale = two_pow(d) * z * std::pow(R, s_bar * c[0]);
  const double d1 = 2.0 * s1 / (a * (a + 2.0 * s1));
  const double d2 = 2.0 * s1 / ((a + 2.0 * s1) * (a + 4.0 * s1));
  const double d0 = 8.0 * s1 * s1 / (a * (a + 2.0 * s1) * (a + 4.0 * s1));
  auto check = [](double e, double as) { return RatioCheck{e, as, e / as}; };
  return {check(exact.j0, d0 * scale), check(exact.j1, d1 * scale),
          check(exact.j2, d2 * scale)};
}

namespace {

// 2^d int_{x >= 0, v <= 1} prod x_j^{4 t_j} f(v) dx by nested tanh-sinh.
double liouville_quadrature(const std::vector<double>& t, const std::vector<double>& s,
                            const std::function<double(double)>& f) {
  const std::size_t d = t.size();
  boost::math::quadrature::tanh_sinh<double> integrator;
  constexpr double kTolerance = 1e-12;
  std::function<double(std::size_t, double)> level = [&](std::size_t j, double v_used) {
    const double room = 1.0 - v_used;
    if (!(room > 0.0)) return 0.0;
    const double upper = std::pow(room, 1.0 / (2.0 * s[j]));
    auto integrand = [&](double x) {
      const double v = v_used + std::pow(x, 2.0 * s[j]);
      const double w = t[j] == 0.0 ? 1.0 : std::pow(x, 4.0 * t[j]);
      return w * (j + 1 == d ? f(std::min(v, 1.0)) : level(j + 1, v));
    };
    return integrator.integrate(integrand, 0.0, upper, kTolerance);
  };
  return two_pow(d) * level(0, 0.0);
}

}  // namespace

SobolevConstants sobolev_constants(const std::vector<double>& t, const std::vector<double>& s,
                                   bool with_oracle) {
  check_shape(t, s);
  const std::size_t d = t.size();
  double P = 0.0;
  double log_g = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double pj = (4.0 * t[j] + 1.0) / (2.0 * s[j]);
    P += pj;
    log_g += std::lgamma(pj) - std::log(s[j]);
  }
  log_g -= std::lgamma(P);
  const double g = std::exp(log_g);
  SobolevConstants out{};
  out.p = P;
  out.c1 = g / (P * (P + 1.0));
  out.c2 = g / ((P + 1.0) * (P + 2.0));
  out.c0 = 2.0 * g / (P * (P + 1.0) * (P + 2.0));
  out.residual_c0 = out.residual_c1 = out.residual_c2 = kNaN;
  if (with_oracle && d <= kMaxOracleDimension) {
    const double q1 = liouville_quadrature(t, s, [](double v) { return 1.0 - v; });
    const double q2 = liouville_quadrature(t, s, [](double v) { return v * (1.0 - v); });
    const double q0 = liouville_quadrature(t, s, [](double v) { return (1.0 - v) * (1.0 - v); });
    out.residual_c0 = std::abs(out.c0 - q0);
    out.residual_c1 = std::abs(out.c1 - q1);
    out.residual_c2 = std::abs(out.c2 - q2);
  }
  return out;
}

double sobolev_mild_prefactor(const SobolevConstants& k) {
  return k.c0 / (2.0 * k.c1 * k.c1) * std::pow(k.c2 / k.c1, k.p);
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DomainError("least_squares_slope: need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  if (!(sxx > 0.0)) throw DomainError("least_squares_slope: x values are all equal");
  return sxy / sxx;
}

std::vector<double> default_sweep_epsilons() {
  std::vector<double> out;
  for (int k = 4; k <= 12; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

RateSweep rate_sweep(const RateRegime& regime, const std::vector<double>& epsilons,
                     double target_u, std::int64_t multiplicity) {
  validate_regime(regime);
  RateSweep out{};
  std::vector<double> lx, ly;
  for (double eps : epsilons) {
    const ValidatedConfig config = validate_config(regime_config(regime, eps, multiplicity));
    SweepPoint p{eps, false, kNaN, kNaN, 0, separation_rate(regime, eps).r_star};
    if (target_u < max_attainable_u(config)) {
      const ExtremalSolution sol = solve_for_u(config, target_u);
      p.feasible = true;
      p.r_solved = sol.radius;
      p.u = sol.u;
      p.support_size = sol.support.size();
      lx.push_back(std::log(eps));
      ly.push_back(std::log(sol.radius));
    }
    out.points.push_back(p);
  }
  out.feasible_count = lx.size();
  if (lx.size() < 2) {
    throw DomainError("rate_sweep: fewer than two epsilon values admit u = " +
                      std::to_string(target_u));
  }
  out.fitted_slope = least_squares_slope(lx, ly);
  out.predicted_exponent = separation_rate(regime, epsilons.front()).epsilon_exponent;
  return out;
}

std::vector<LogRadiusPoint> sobolev_severe_path(const RateRegime& regime, double C,
                                                const std::vector<double>& epsilons) {
  if (regime.kind != RegimeKind::SobolevSevere) {
    throw InvalidArgument("sobolev_severe_path applies to the sobolev_severe regime only");
  }
  validate_regime(regime);
  if (!(C > 0.0)) throw DomainError("sobolev_severe_path: C must be positive");
  std::vector<LogRadiusPoint> out;
  for (double eps : epsilons) {
    if (!(eps > 0.0 && eps < 1.0)) throw DomainError("epsilon must lie in (0,1)");
    const ValidatedConfig config = validate_config(regime_config(regime, eps));
    const double r = std::pow(C * std::log(1.0 / eps), -regime.s[0]);
    out.push_back({eps, r, solve_extremal(config, r).u});
  }
  return out;
}

std::vector<PrefactorPoint> sobolev_mild_prefactor_path(const RateRegime& regime,
                                                        const std::vector<double>& epsilons,
                                                        double target_u) {
  if (regime.kind != RegimeKind::SobolevMild) {
    throw InvalidArgument("sobolev_mild_prefactor_path applies to the sobolev_mild regime only");
  }
  validate_regime(regime);
  const double P = sobolev_constants(regime.t, regime.s, false).p;
  const std::int64_t m = std::int64_t{1} << regime.t.size();
  std::vector<PrefactorPoint> out;
  for (double eps : epsilons) {
    const ValidatedConfig config = validate_config(regime_config(regime, eps, m));
    const ExtremalSolution sol = solve_for_u(config, target_u);
    const double scaled =
        sol.u * sol.u * std::pow(eps, 4.0) * std::pow(sol.radius, -(4.0 + 2.0 * P));
    out.push_back({eps, sol.radius, sol.u, scaled});
  }
  return out;
}

}  // namespace sigdet
