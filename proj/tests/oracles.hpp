#pragma once

// Brute-force references for the tests. Deliberately naive: every step
// string is generated explicitly and nothing is shared with the library
// beyond the value types.

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "rsfluct/multi_index.hpp"
#include "rsfluct/numeric.hpp"

namespace oracle {

/// Calls visit(steps) for all 3^k strings over {-1, 0, 1}.
template <class Visit>
void for_each_step_string(int k, Visit visit) {
  std::vector<int> steps(static_cast<std::size_t>(k), -1);
  while (true) {
    visit(steps);
    int i = 0;
    while (i < k && steps[static_cast<std::size_t>(i)] == 1) steps[static_cast<std::size_t>(i++)] = -1;
    if (i == k) return;
    ++steps[static_cast<std::size_t>(i)];
  }
}

/// canonical beta -> number of closed paths of length k with that flat profile.
inline std::map<rsfluct::MultiIndex, std::uint64_t> profile_counts(int k) {
  std::map<rsfluct::MultiIndex, std::uint64_t> out;
  for_each_step_string(k, [&](const std::vector<int>& steps) {
    int level = 0;
    std::map<int, unsigned> flats;
    for (int s : steps) {
      if (s == 0) ++flats[level];
      level += s;
    }
    if (level != 0) return;
    ++out[rsfluct::MultiIndex::from_levels(flats)];
  });
  return out;
}

/// Tr H^k on [1, N] as site-exponent maps: sum over closed walks that stay
/// inside [1, N] of the product of V at the sites where the walk pauses.
inline std::map<std::map<int, unsigned>, std::uint64_t> trace_monomials(int N, int k) {
  std::map<std::map<int, unsigned>, std::uint64_t> out;
  for (int start = 1; start <= N; ++start) {
    for_each_step_string(k, [&](const std::vector<int>& steps) {
      int site = start;
      std::map<int, unsigned> mono;
      for (int s : steps) {
        if (s == 0) ++mono[site];
        site += s;
        if (site < 1 || site > N) return;
      }
      if (site == start) ++out[mono];
    });
  }
  return out;
}

using Dense = std::vector<std::vector<double>>;

inline Dense jacobi(const std::vector<double>& diag) {
  const std::size_t n = diag.size();
  Dense h(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    h[i][i] = diag[i];
    if (i + 1 < n) h[i][i + 1] = h[i + 1][i] = 1.0;
  }
  return h;
}

inline Dense multiply(const Dense& a, const Dense& b) {
  const std::size_t n = a.size();
  Dense c(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][l] * b[l][j];
  return c;
}

/// [Tr H^0, ..., Tr H^k] by dense repeated multiplication.
inline std::vector<double> dense_traces(const std::vector<double>& diag, int k) {
  const auto h = jacobi(diag);
  Dense p(diag.size(), std::vector<double>(diag.size(), 0.0));
  for (std::size_t i = 0; i < diag.size(); ++i) p[i][i] = 1.0;
  std::vector<double> out;
  for (int j = 0; j <= k; ++j) {
    double t = 0.0;
    for (std::size_t i = 0; i < diag.size(); ++i) t += p[i][i];
    out.push_back(t);
    p = multiply(p, h);
  }
  return out;
}

/// Standard normal draws from the counter generator (Box-Muller).
inline std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u1 = (static_cast<double>(rsfluct::counter_bits(seed, 2 * i) >> 11) + 0.5) * 0x1.0p-53;
    const double u2 = static_cast<double>(rsfluct::counter_bits(seed, 2 * i + 1) >> 11) * 0x1.0p-53;
    out[i] = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.141592653589793 * u2);
  }
  return out;
}

}  // namespace oracle
