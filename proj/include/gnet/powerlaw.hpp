#pragma once

// Discrete power-law p(x) = x^-alpha / zeta(alpha, x_min), x >= x_min.

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "gnet/rng.hpp"

namespace gnet {

/// Hurwitz zeta function sum_{k>=0} (q + k)^-s for s > 1, q > 0.
double hurwitz_zeta(double s, double q);

struct PowerLawFit {
  double exponent = 0.0;  // lambda > 1
  std::uint64_t x_min = 1;
  double ks_distance = 0.0;
  std::size_t tail_count = 0;
};

struct FixedXmin {
  std::uint64_t value = 1;
};
/// Choose x_min minimising the KS distance over candidate values that leave at
/// least `min_tail` samples.
struct ScanXmin {};
using XminMode = std::variant<FixedXmin, ScanXmin>;

/// Smallest tail the estimator accepts.
inline constexpr std::size_t kMinPowerLawTail = 50;

/// Exact discrete maximum-likelihood exponent (maximises
/// -n ln zeta(a, x_min) - a * sum ln x_i) over samples >= x_min.
/// Throws FitError when fewer than kMinPowerLawTail samples are in the tail or
/// when every tail sample equals x_min (the likelihood has no finite maximum).
PowerLawFit powerlaw_fit(std::span<const std::uint64_t> values, XminMode mode = FixedXmin{});

/// Closed-form approximation 1 + n / sum ln(x_i / (x_min - 0.5)). Accurate for
/// x_min of about 6 or more; strongly biased at x_min = 1.
double powerlaw_exponent_approx(std::span<const std::uint64_t> values, std::uint64_t x_min);

/// KS distance between the tail's empirical CDF and the fitted discrete CDF.
double powerlaw_ks_distance(std::span<const std::uint64_t> sorted_tail, double exponent,
                            std::uint64_t x_min);

/// Inverse-CDF sampler for the discrete power law.
class DiscretePowerLaw {
 public:
  DiscretePowerLaw(double exponent, std::uint64_t x_min = 1);

  std::uint64_t operator()(Rng& rng) const;
  /// Deterministic inverse of the complementary CDF for u in (0, 1].
  std::uint64_t quantile(double u) const;

  double exponent() const { return exponent_; }
  std::uint64_t x_min() const { return x_min_; }
  /// Mean, or +inf when exponent <= 2.
  double mean() const;

 private:
  double exponent_;
  std::uint64_t x_min_;
  std::vector<double> ccdf_;  // ccdf_[k] = P(X >= x_min + k)
};

}  // namespace gnet
