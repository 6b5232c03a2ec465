#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "rsfluct/distribution.hpp"
#include "rsfluct/numeric.hpp"

namespace rsfluct {

/// One realization of V(n) = X_n / n^alpha on sites 1..N.
///
/// X_n is a pure function of (seed, n), so the sample is prefix-stable: the
/// first N values of a larger sample with the same seed are identical.
struct PotentialSample {
  int N = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  DistributionSpec dist = DistributionSpec::rademacher();
  std::vector<double> values;  // values[n - 1] = V(n)
};

/// X_n for the given seed.
inline double site_variable(const DistributionSpec& dist, std::uint64_t seed, std::int64_t n) {
  return dist.draw(counter_bits(seed, static_cast<std::uint64_t>(n)));
}

inline PotentialSample sample_potential(int N, double alpha, const DistributionSpec& dist,
                                        std::uint64_t seed) {
  if (N < 1) throw std::invalid_argument("sample_potential: N must be >= 1");
  if (!(alpha > 0.0)) throw std::invalid_argument("sample_potential: alpha must be positive");
  PotentialSample sample{N, alpha, seed, dist, std::vector<double>(static_cast<std::size_t>(N))};
  for (int n = 1; n <= N; ++n) {
    sample.values[static_cast<std::size_t>(n - 1)] =
        site_variable(dist, seed, n) * std::pow(static_cast<double>(n), -alpha);
  }
  return sample;
}

}  // namespace rsfluct
