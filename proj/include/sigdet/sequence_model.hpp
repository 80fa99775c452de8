#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sigdet {

/// Largest supported dimension. Lattice enumeration is exponential in d, so
/// indices are stored inline rather than on the heap.
inline constexpr std::size_t kMaxDimension = 8;

/// A lattice index l = (l_1, ..., l_d) with every coordinate >= 1.
class MultiIndex {
 public:
  MultiIndex() = default;
  MultiIndex(std::initializer_list<std::int32_t> coords);
  explicit MultiIndex(std::span<const std::int32_t> coords);

  /// (1, ..., 1) in dimension d.
  static MultiIndex ones(std::size_t d);

  std::size_t size() const noexcept { return size_; }
  std::int32_t operator[](std::size_t j) const noexcept { return coords_[j]; }
  std::int32_t& operator[](std::size_t j) noexcept { return coords_[j]; }
  std::span<const std::int32_t> coords() const noexcept { return {coords_.data(), size_}; }

  /// Lexicographic, first coordinate most significant.
  friend std::strong_ordering operator<=>(const MultiIndex& lhs, const MultiIndex& rhs) noexcept;
  friend bool operator==(const MultiIndex& lhs, const MultiIndex& rhs) noexcept;

 private:
  std::array<std::int32_t, kMaxDimension> coords_{};
  std::size_t size_ = 0;
};

std::ostream& operator<<(std::ostream& os, const MultiIndex& l);
std::string to_string(const MultiIndex& l);

enum class SpectrumKind { MildlyIllPosed, SeverelyIllPosed };

/// b_l = prod_j l_j^{-t_j} (mild) or prod_j exp(-t_j l_j) (severe).
struct SpectrumSpec {
  SpectrumKind kind = SpectrumKind::MildlyIllPosed;
  std::vector<double> degrees;
};

enum class SmoothnessShape {
  TensorPolynomial,       // a^2 = prod_j l_j^{2 s_j}
  TensorExponential,      // a^2 = prod_j exp(2 s_j l_j)
  SobolevSum,             // a^2 = sum_j l_j^{2 s_j}
  SobolevExponentialSum,  // a^2 = sum_j exp(2 s_j l_j)
  SobolevSumPower,        // a   = (sum_j l_j)^s, common s
};

struct SmoothnessSpec {
  SmoothnessShape shape = SmoothnessShape::SobolevSum;
  std::vector<double> exponents;
};

inline constexpr std::int64_t kDefaultSupportCap = 10'000'000;

/// One testing problem. The ellipsoid radius is fixed to 1; see
/// the ellipsoid-radius overload of solve_extremal for general radii.
struct ProblemConfig {
  std::size_t dimension = 1;
  SpectrumSpec spectrum;
  SmoothnessSpec smoothness;
  double epsilon = 0.1;
  double alpha = 0.05;
  std::int64_t orthant_multiplicity = 1;
  std::int64_t support_cap = kDefaultSupportCap;
};

class ValidatedConfig;

/// Checks every invariant of `config` and throws ConfigError naming the first
/// offending field.
ValidatedConfig validate_config(ProblemConfig config);

/// A ProblemConfig whose invariants have been checked. Only obtainable from
/// validate_config.
class ValidatedConfig {
 public:
  const ProblemConfig& get() const noexcept { return config_; }
  const ProblemConfig* operator->() const noexcept { return &config_; }

  std::size_t dimension() const noexcept { return config_.dimension; }
  double epsilon() const noexcept { return config_.epsilon; }
  double alpha() const noexcept { return config_.alpha; }
  double multiplicity() const noexcept {
    return static_cast<double>(config_.orthant_multiplicity);
  }

  /// Copies with one field replaced, re-validated.
  ValidatedConfig with_epsilon(double epsilon) const;
  ValidatedConfig with_multiplicity(std::int64_t m) const;

 private:
  explicit ValidatedConfig(ProblemConfig config) : config_(std::move(config)) {}
  friend ValidatedConfig validate_config(ProblemConfig config);

  ProblemConfig config_;
};

struct Coefficients {
  double b;
  double a_squared;
};

/// Exact b_l and a_l^2. Throws InvalidArgument on dimension mismatch or a
/// coordinate below 1.
Coefficients coefficients(const ValidatedConfig& config, const MultiIndex& l);

/// Unchecked evaluation used on enumeration hot paths.
double a_squared(const ProblemConfig& config, const MultiIndex& l) noexcept;
/// b_l^{-4}, computed directly rather than from b to avoid underflow in b.
double inverse_b4(const ProblemConfig& config, const MultiIndex& l) noexcept;

/// a^2 at (1, ..., 1), the minimum over the lattice.
double a_min_squared(const ValidatedConfig& config) noexcept;

std::string_view to_string(SpectrumKind kind) noexcept;
std::string_view to_string(SmoothnessShape shape) noexcept;
SpectrumKind parse_spectrum_kind(std::string_view text);
SmoothnessShape parse_smoothness_shape(std::string_view text);

}  // namespace sigdet
