#include "sigdet/sequence_model.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "sigdet/errors.hpp"

namespace sigdet {

MultiIndex::MultiIndex(std::initializer_list<std::int32_t> coords)
    : MultiIndex(std::span<const std::int32_t>(coords.begin(), coords.size())) {}

MultiIndex::MultiIndex(std::span<const std::int32_t> coords) {
  if (coords.size() > kMaxDimension) {
    throw InvalidArgument("multi-index dimension " + std::to_string(coords.size()) +
                          " exceeds the maximum of " + std::to_string(kMaxDimension));
  }
  std::copy(coords.begin(), coords.end(), coords_.begin());
  size_ = coords.size();
}

MultiIndex MultiIndex::ones(std::size_t d) {
  if (d > kMaxDimension) {
    throw InvalidArgument("dimension exceeds the maximum of " + std::to_string(kMaxDimension));
  }
  MultiIndex l;
  l.size_ = d;
  std::fill_n(l.coords_.begin(), d, 1);
  return l;
}

std::strong_ordering operator<=>(const MultiIndex& lhs, const MultiIndex& rhs) noexcept {
  const auto a = lhs.coords();
  const auto b = rhs.coords();
  return std::lexicographical_compare_three_way(a.begin(), a.end(), b.begin(), b.end());
}

bool operator==(const MultiIndex& lhs, const MultiIndex& rhs) noexcept {
  return std::ranges::equal(lhs.coords(), rhs.coords());
}

std::ostream& operator<<(std::ostream& os, const MultiIndex& l) {
  os << '(';
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (j) os << ',';
    os << l[j];
  }
  return os << ')';
}

std::string to_string(const MultiIndex& l) {
  std::ostringstream os;
  os << l;
  return os.str();
}

namespace {

bool all_finite(const std::vector<double>& v) {
  return std::ranges::all_of(v, [](double x) { return std::isfinite(x); });
}

}  // namespace

ValidatedConfig validate_config(ProblemConfig config) {
  const std::size_t d = config.dimension;
  if (d < 1 || d > kMaxDimension) {
    throw ConfigError("problem.dimension",
                      "must be in [1, " + std::to_string(kMaxDimension) + "], got " +
                          std::to_string(d));
  }
  const auto& t = config.spectrum.degrees;
  if (t.size() != d) {
    throw ConfigError("spectrum.degrees", "dimension mismatch: expected " + std::to_string(d) +
                                              " entries, got " + std::to_string(t.size()));
  }
  if (!all_finite(t) || std::ranges::any_of(t, [](double x) { return x < 0.0; })) {
    throw ConfigError("spectrum.degrees", "degrees must be finite and nonnegative");
  }
  const auto& s = config.smoothness.exponents;
  if (s.size() != d) {
    throw ConfigError("smoothness.exponents", "dimension mismatch: expected " +
                                                  std::to_string(d) + " entries, got " +
                                                  std::to_string(s.size()));
  }
  if (!all_finite(s) || std::ranges::any_of(s, [](double x) { return x <= 0.0; })) {
    throw ConfigError("smoothness.exponents", "exponents must be finite and positive");
  }
  if (config.smoothness.shape == SmoothnessShape::SobolevSumPower &&
      std::ranges::any_of(s, [&](double x) { return x != s.front(); })) {
    throw ConfigError("smoothness.exponents", "sobolev_sum_power requires a common exponent");
  }
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) {
    throw ConfigError("problem.epsilon", "epsilon must be positive and finite");
  }
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("problem.alpha", "alpha out of (0,1)");
  }
  const std::int64_t full = std::int64_t{1} << d;
  if (config.orthant_multiplicity != 1 && config.orthant_multiplicity != full) {
    throw ConfigError("problem.multiplicity",
                      "must be 1 or 2^d = " + std::to_string(full));
  }
  if (config.support_cap < 1) {
    throw ConfigError("problem.support_cap", "must be positive");
  }
  return ValidatedConfig(std::move(config));
}

ValidatedConfig ValidatedConfig::with_epsilon(double epsilon) const {
  ProblemConfig copy = config_;
  copy.epsilon = epsilon;
  return validate_config(std::move(copy));
}

ValidatedConfig ValidatedConfig::with_multiplicity(std::int64_t m) const {
  ProblemConfig copy = config_;
  copy.orthant_multiplicity = m;
  return validate_config(std::move(copy));
}

double a_squared(const ProblemConfig& config, const MultiIndex& l) noexcept {
  const auto& s = config.smoothness.exponents;
  const std::size_t d = l.size();
  switch (config.smoothness.shape) {
    case SmoothnessShape::TensorPolynomial: {
      double prod = 1.0;
      for (std::size_t j = 0; j < d; ++j) prod *= std::pow(double(l[j]), 2.0 * s[j]);
      return prod;
    }
    case SmoothnessShape::TensorExponential: {
      double log_a2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) log_a2 += 2.0 * s[j] * l[j];
      return std::exp(log_a2);
    }
    case SmoothnessShape::SobolevSum: {
      double sum = 0.0;
      for (std::size_t j = 0; j < d; ++j) sum += std::pow(double(l[j]), 2.0 * s[j]);
      return sum;
    }
    case SmoothnessShape::SobolevExponentialSum: {
      double sum = 0.0;
      for (std::size_t j = 0; j < d; ++j) sum += std::exp(2.0 * s[j] * l[j]);
      return sum;
    }
    case SmoothnessShape::SobolevSumPower: {
      double total = 0.0;
      for (std::size_t j = 0; j < d; ++j) total += l[j];
      return std::pow(total, 2.0 * s.front());
    }
  }
  return 0.0;
}

double inverse_b4(const ProblemConfig& config, const MultiIndex& l) noexcept {
  const auto& t = config.spectrum.degrees;
  if (config.spectrum.kind == SpectrumKind::MildlyIllPosed) {
    double prod = 1.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
      if (t[j] != 0.0) prod *= std::pow(double(l[j]), 4.0 * t[j]);
    }
    return prod;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < l.size(); ++j) acc += t[j] * l[j];
  return std::exp(4.0 * acc);
}

namespace {

double spectrum_value(const ProblemConfig& config, const MultiIndex& l) noexcept {
  const auto& t = config.spectrum.degrees;
  if (config.spectrum.kind == SpectrumKind::MildlyIllPosed) {
    double prod = 1.0;
    for (std::size_t j = 0; j < l.size(); ++j) {
      if (t[j] != 0.0) prod *= std::pow(double(l[j]), -t[j]);
    }
    return prod;
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < l.size(); ++j) acc += t[j] * l[j];
  return std::exp(-acc);
}

}  // namespace

Coefficients coefficients(const ValidatedConfig& config, const MultiIndex& l) {
  if (l.size() != config.dimension()) {
    throw InvalidArgument("dimension mismatch: index " + to_string(l) + " has " +
                          std::to_string(l.size()) + " coordinates, config has d = " +
                          std::to_string(config.dimension()));
  }
  for (std::size_t j = 0; j < l.size(); ++j) {
    if (l[j] < 1) throw InvalidArgument("index coordinates start at 1: " + to_string(l));
  }
  return {spectrum_value(config.get(), l), a_squared(config.get(), l)};
}

double a_min_squared(const ValidatedConfig& config) noexcept {
  return a_squared(config.get(), MultiIndex::ones(config.dimension()));
}

std::string_view to_string(SpectrumKind kind) noexcept {
  switch (kind) {
    case SpectrumKind::MildlyIllPosed: return "mild";
    case SpectrumKind::SeverelyIllPosed: return "severe";
  }
  return "unknown";
}

std::string_view to_string(SmoothnessShape shape) noexcept {
  switch (shape) {
    case SmoothnessShape::TensorPolynomial: return "tensor_polynomial";
    case SmoothnessShape::TensorExponential: return "tensor_exponential";
    case SmoothnessShape::SobolevSum: return "sobolev_sum";
    case SmoothnessShape::SobolevExponentialSum: return "sobolev_exponential_sum";
    case SmoothnessShape::SobolevSumPower: return "sobolev_sum_power";
  }
  return "unknown";
}

SpectrumKind parse_spectrum_kind(std::string_view text) {
  if (text == "mild") return SpectrumKind::MildlyIllPosed;
  if (text == "severe") return SpectrumKind::SeverelyIllPosed;
  throw ConfigError("spectrum.kind", "expected 'mild' or 'severe', got '" + std::string(text) + "'");
}

SmoothnessShape parse_smoothness_shape(std::string_view text) {
  for (auto shape : {SmoothnessShape::TensorPolynomial, SmoothnessShape::TensorExponential,
                     SmoothnessShape::SobolevSum, SmoothnessShape::SobolevExponentialSum,
                     SmoothnessShape::SobolevSumPower}) {
    if (to_string(shape) == text) return shape;
  }
  throw ConfigError("smoothness.shape", "unknown shape '" + std::string(text) + "'");
}

}  // namespace sigdet
