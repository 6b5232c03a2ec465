#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rsfluct/numeric.hpp"

namespace rsfluct {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw std::invalid_argument("mean of empty sample");
  NeumaierSum s;
  for (double v : x) s.add(v);
  return s.value() / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("variance needs at least two values");
  const double m = mean(x);
  NeumaierSum s;
  for (double v : x) s.add((v - m) * (v - m));
  return s.value() / static_cast<double>(x.size() - 1);
}

struct Moments {
  double mean = 0.0;
  double variance = 0.0;         // unbiased
  double skewness = 0.0;         // m3 / m2^{3/2}
  double excess_kurtosis = 0.0;  // m4 / m2^2 - 3
};

/// Central-moment summary; skewness and kurtosis are 0 for a constant sample.
inline Moments moments(std::span<const double> x) {
  if (x.size() < 2) throw std::invalid_argument("moments need at least two values");
  const double n = static_cast<double>(x.size());
  Moments out;
  out.mean = mean(x);
  NeumaierSum m2, m3, m4;
  for (double v : x) {
    const double d = v - out.mean;
    m2.add(d * d);
    m3.add(d * d * d);
    m4.add(d * d * d * d);
  }
  out.variance = m2.value() / (n - 1.0);
  const double c2 = m2.value() / n;
  if (c2 > 0.0) {
    out.skewness = (m3.value() / n) / std::pow(c2, 1.5);
    out.excess_kurtosis = (m4.value() / n) / (c2 * c2) - 3.0;
  }
  return out;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

/// Kolmogorov-Smirnov distance between the sample and N(mean, sigma^2).
inline double ks_distance_normal(std::span<const double> x, double mu, double sigma) {
  if (x.empty()) throw std::invalid_argument("KS distance of empty sample");
  if (!(sigma > 0.0)) throw std::invalid_argument("KS distance needs sigma > 0");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = normal_cdf((sorted[i] - mu) / sigma);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

/// Pearson correlation; nullopt when either column has zero variance.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) throw std::invalid_argument("pearson needs at least two pairs");
  const double mx = mean(x);
  const double my = mean(y);
  NeumaierSum sxy, sxx, syy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy.add(dx * dy);
    sxx.add(dx * dx);
    syy.add(dy * dy);
  }
  if (!(sxx.value() > 0.0) || !(syy.value() > 0.0)) return std::nullopt;
  return std::clamp(sxy.value() / std::sqrt(sxx.value() * syy.value()), -1.0, 1.0);
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double v) const noexcept { return lo <= v && v <= hi; }
};

struct MomentIntervals {
  Interval variance;
  Interval skewness;
  Interval excess_kurtosis;
};

/// Percentile bootstrap intervals for variance, skewness and excess kurtosis.
/// Resampling indices come from the counter generator, so the result is a
/// pure function of (x, seed).
inline MomentIntervals bootstrap_moments(std::span<const double> x, int resamples = 1000, double level = 0.99,
                                         std::uint64_t seed = 0x5EEDB007u) {
  if (x.size() < 2) throw std::invalid_argument("bootstrap needs at least two values");
  if (resamples < 10) throw std::invalid_argument("bootstrap needs at least 10 resamples");
  const std::size_t n = x.size();
  std::vector<double> var(static_cast<std::size_t>(resamples)), skew(var.size()), kurt(var.size());
  std::vector<double> buffer(n);
  std::uint64_t counter = 0;
  for (int b = 0; b < resamples; ++b) {
    for (std::size_t i = 0; i < n; ++i) buffer[i] = x[counter_bits(seed, counter++) % n];
    const auto m = moments(buffer);
    var[static_cast<std::size_t>(b)] = m.variance;
    skew[static_cast<std::size_t>(b)] = m.skewness;
    kurt[static_cast<std::size_t>(b)] = m.excess_kurtosis;
  }
  auto interval = [&](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    const double tail = 0.5 * (1.0 - level);
    const auto index = [&](double q) {
      const auto i = static_cast<std::size_t>(std::floor(q * static_cast<double>(v.size() - 1)));
      return v[std::min(i, v.size() - 1)];
    };
    return Interval{index(tail), index(1.0 - tail)};
  };
  return {interval(var), interval(skew), interval(kurt)};
}

}  // namespace rsfluct
