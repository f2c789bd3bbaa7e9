#include "gnet/powerlaw.hpp"

#include <optional>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/tools/minima.hpp>

#include "gnet/error.hpp"

namespace gnet {

namespace {

// B_{2j} / (2j)!
constexpr double kBernoulliOverFactorial[] = {
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40320.0,
    5.0 / 66.0 / 3628800.0,
    -691.0 / 2730.0 / 479001600.0,
    7.0 / 6.0 / 87178291200.0,
};

constexpr double kMaxExponent = 40.0;
constexpr std::size_t kTableSize = 4096;

}  // namespace

double hurwitz_zeta(double s, double q) {
  if (!(s > 1.0) || !(q > 0.0)) throw DomainError("hurwitz_zeta requires s > 1 and q > 0");
  // Euler-Maclaurin summation after M explicit terms.
  constexpr int M = 12;
  double sum = 0.0;
  for (int k = 0; k < M; ++k) sum += std::pow(q + k, -s);
  const double a = q + M;
  const double a_pow = std::pow(a, -s);
  sum += a * a_pow / (s - 1.0) + 0.5 * a_pow;
  double rising = s;         // s (s+1) ... (s+2j-2)
  double term_pow = a_pow / a;  // a^{-s-2j+1}
  for (std::size_t j = 0; j < std::size(kBernoulliOverFactorial); ++j) {
    sum += kBernoulliOverFactorial[j] * rising * term_pow;
    rising *= (s + 2 * j + 1) * (s + 2 * j + 2);
    term_pow /= a * a;
  }
  return sum;
}

double powerlaw_ks_distance(std::span<const std::uint64_t> sorted_tail, double exponent,
                            std::uint64_t x_min) {
  const double n = static_cast<double>(sorted_tail.size());
  const double norm = hurwitz_zeta(exponent, static_cast<double>(x_min));
  double d = 0.0;
  std::size_t i = 0;
  while (i < sorted_tail.size()) {
    const std::uint64_t x = sorted_tail[i];
    std::size_t j = i;
    while (j < sorted_tail.size() && sorted_tail[j] == x) ++j;
    const double empirical = static_cast<double>(j) / n;
    const double fitted = 1.0 - hurwitz_zeta(exponent, static_cast<double>(x) + 1.0) / norm;
    d = std::max(d, std::abs(empirical - fitted));
    i = j;
  }
  return std::min(d, 1.0);
}

namespace {

// Fit on an ascending-sorted sequence restricted to values >= x_min.
PowerLawFit fit_sorted(std::span<const std::uint64_t> sorted, std::uint64_t x_min) {
  if (x_min < 1) throw FitError("x_min must be at least 1", 0);
  auto first = std::lower_bound(sorted.begin(), sorted.end(), x_min);
  std::span<const std::uint64_t> tail(first, sorted.end());
  const std::size_t n = tail.size();
  if (n < kMinPowerLawTail)
    throw FitError("power-law tail too small: " + std::to_string(n) + " samples >= x_min=" +
                       std::to_string(x_min) + " (need " + std::to_string(kMinPowerLawTail) + ")",
                   n);
  if (tail.front() == tail.back())
    throw FitError("all tail samples equal x_min; exponent diverges", n);

  double log_sum = 0.0;
  for (std::uint64_t x : tail) log_sum += std::log(static_cast<double>(x));
  const double xm = static_cast<double>(x_min);
  const double dn = static_cast<double>(n);
  auto neg_loglik = [&](double a) { return dn * std::log(hurwitz_zeta(a, xm)) + a * log_sum; };
  auto [alpha, value] = boost::math::tools::brent_find_minima(neg_loglik, 1.0 + 1e-9, kMaxExponent, 50);
  (void)value;
  if (alpha > kMaxExponent - 1e-3) throw FitError("power-law exponent diverges", n);

  PowerLawFit fit;
  fit.exponent = alpha;
  fit.x_min = x_min;
  fit.tail_count = n;
  fit.ks_distance = powerlaw_ks_distance(tail, alpha, x_min);
  return fit;
}

}  // namespace

PowerLawFit powerlaw_fit(std::span<const std::uint64_t> values, XminMode mode) {
  std::vector<std::uint64_t> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());

  if (const auto* fixed = std::get_if<FixedXmin>(&mode)) return fit_sorted(sorted, fixed->value);

  std::optional<PowerLawFit> best;
  std::size_t largest_tail = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] == 0 || (i > 0 && sorted[i] == sorted[i - 1])) continue;
    const std::size_t tail = sorted.size() - i;
    largest_tail = std::max(largest_tail, tail);
    if (tail < kMinPowerLawTail) break;
    try {
      PowerLawFit f = fit_sorted(sorted, sorted[i]);
      if (!best || f.ks_distance < best->ks_distance) best = f;
    } catch (const FitError&) {
      // candidate without a finite maximum; try the next x_min
    }
  }
  if (!best) throw FitError("no x_min candidate admits a power-law fit", largest_tail);
  return *best;
}

double powerlaw_exponent_approx(std::span<const std::uint64_t> values, std::uint64_t x_min) {
  double log_sum = 0.0;
  std::size_t n = 0;
  for (std::uint64_t x : values) {
    if (x < x_min) continue;
    log_sum += std::log(static_cast<double>(x) / (static_cast<double>(x_min) - 0.5));
    ++n;
  }
  if (n < kMinPowerLawTail) throw FitError("power-law tail too small", n);
  return 1.0 + static_cast<double>(n) / log_sum;
}

DiscretePowerLaw::DiscretePowerLaw(double exponent, std::uint64_t x_min)
    : exponent_(exponent), x_min_(x_min) {
  if (!(exponent > 1.0)) throw DomainError("power-law exponent must exceed 1");
  if (x_min < 1) throw DomainError("power-law x_min must be at least 1");
  const double norm = hurwitz_zeta(exponent, static_cast<double>(x_min));
  ccdf_.resize(kTableSize);
  for (std::size_t k = 0; k < kTableSize; ++k)
    ccdf_[k] = hurwitz_zeta(exponent, static_cast<double>(x_min + k)) / norm;
  ccdf_[0] = 1.0;
}

std::uint64_t DiscretePowerLaw::quantile(double u) const {
  // largest x with P(X >= x) >= u
  auto it = std::partition_point(ccdf_.begin(), ccdf_.end(), [u](double c) { return c >= u; });
  const auto k = static_cast<std::size_t>(it - ccdf_.begin());
  if (k == 0) return x_min_;
  if (k < ccdf_.size()) return x_min_ + k - 1;
  // beyond the table: continuous approximation of the conditional tail
  const double x_last = static_cast<double>(x_min_ + ccdf_.size() - 1);
  const double v = u / ccdf_.back();
  const double x = std::floor((x_last - 0.5) * std::pow(v, -1.0 / (exponent_ - 1.0)) + 0.5);
  return static_cast<std::uint64_t>(std::clamp(x, x_last, 1e15));
}

std::uint64_t DiscretePowerLaw::operator()(Rng& rng) const {
  return quantile(1.0 - uniform01(rng));  // u in (0, 1]
}

double DiscretePowerLaw::mean() const {
  if (exponent_ <= 2.0) return std::numeric_limits<double>::infinity();
  const double xm = static_cast<double>(x_min_);
  return hurwitz_zeta(exponent_ - 1.0, xm) / hurwitz_zeta(exponent_, xm);
}

}  // namespace gnet
