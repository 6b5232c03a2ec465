#pragma once

// Numeric kernels for the Jacobi matrix with diagonal V and unit off-diagonal:
// traces of powers via banded products and Sturm-bisection eigenvalues.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsfluct/numeric.hpp"
#include "rsfluct/potential.hpp"

namespace rsfluct {

inline constexpr double trace_overflow_limit = 1e300;

/// [Tr H^0, ..., Tr H^k_max] for the N x N matrix with diagonal `diagonal`.
///
/// H^j is kept as a band of half-width j (row i holds (H^j)_{i, i+d} for
/// |d| <= j), and H^{j+1} = H^j H is formed row by row. Time O(N k_max^2),
/// memory O(N k_max).
inline std::vector<double> trace_moments(std::span<const double> diagonal, int k_max) {
  if (k_max < 0) throw std::invalid_argument("trace_moments: k_max must be >= 0");
  const auto n = static_cast<std::ptrdiff_t>(diagonal.size());
  std::vector<double> traces(static_cast<std::size_t>(k_max) + 1, 0.0);
  traces[0] = static_cast<double>(n);
  if (k_max == 0 || n == 0) return traces;

  const std::ptrdiff_t half = k_max;
  const std::ptrdiff_t stride = 2 * half + 1;
  std::vector<double> current(static_cast<std::size_t>(n * stride), 0.0);
  std::vector<double> next(current.size(), 0.0);
  auto at = [&](std::vector<double>& band, std::ptrdiff_t row, std::ptrdiff_t d) -> double& {
    return band[static_cast<std::size_t>(row * stride + half + d)];
  };

  for (std::ptrdiff_t i = 0; i < n; ++i) at(current, i, 0) = 1.0;  // H^0

  for (int j = 0; j < k_max; ++j) {
    const std::ptrdiff_t width = j;  // current holds H^j
    double largest = 0.0;
    NeumaierSum trace;
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::ptrdiff_t d_lo = std::max<std::ptrdiff_t>(-(width + 1), -i);
      const std::ptrdiff_t d_hi = std::min<std::ptrdiff_t>(width + 1, n - 1 - i);
      for (std::ptrdiff_t d = d_lo; d <= d_hi; ++d) {
        const std::ptrdiff_t col = i + d;
        double value = 0.0;
        // (H^j H)_{i,col} = (H^j)_{i,col-1} + (H^j)_{i,col} V(col) + (H^j)_{i,col+1}
        if (d - 1 >= -width && col - 1 >= 0) value += at(current, i, d - 1);
        if (d >= -width && d <= width) value += at(current, i, d) * diagonal[static_cast<std::size_t>(col)];
        if (d + 1 <= width && col + 1 < n) value += at(current, i, d + 1);
        at(next, i, d) = value;
        largest = std::max(largest, std::fabs(value));
      }
      trace.add(at(next, i, 0));
    }
    if (!(largest <= trace_overflow_limit)) {
      throw std::overflow_error("trace_moments: entries of H^" + std::to_string(j + 1) +
                                " exceed 1e300 (max |entry| = " + std::to_string(largest) + ")");
    }
    traces[static_cast<std::size_t>(j) + 1] = trace.value();
    std::swap(current, next);
  }
  return traces;
}

inline std::vector<double> trace_moments(const PotentialSample& sample, int k_max) {
  return trace_moments(std::span<const double>(sample.values), k_max);
}

/// Number of eigenvalues strictly below x (Sturm sequence of T - x I).
inline std::size_t sturm_count(std::span<const double> diagonal, double x) {
  constexpr double pivot_floor = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  std::size_t negatives = 0;
  double q = 1.0;
  for (std::size_t i = 0; i < diagonal.size(); ++i) {
    q = diagonal[i] - x - (i == 0 ? 0.0 : 1.0 / q);
    if (std::fabs(q) < pivot_floor) q = -pivot_floor;
    if (q < 0.0) ++negatives;
  }
  return negatives;
}

/// All eigenvalues, ascending, each located to within tol by bisection.
inline std::vector<double> eigenvalues(std::span<const double> diagonal, double tol = 1e-12) {
  if (!(tol > 0.0)) throw std::invalid_argument("eigenvalues: tol must be positive");
  const std::size_t n = diagonal.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  if (n == 1) {
    out[0] = diagonal[0];
    return out;
  }
  // Gershgorin bounds.
  const auto [dmin, dmax] = std::minmax_element(diagonal.begin(), diagonal.end());
  const double lo0 = *dmin - 2.0;
  const double hi0 = *dmax + 2.0;

  for (std::size_t j = 0; j < n; ++j) {
    double lo = lo0;
    double hi = hi0;
    // Reuse the bracket of the previous eigenvalue as a lower bound.
    if (j > 0) lo = std::max(lo, out[j - 1] - tol);
    while (hi - lo > tol) {
      const double mid = 0.5 * (lo + hi);
      if (mid <= lo || mid >= hi) break;
      if (sturm_count(diagonal, mid) > j) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out[j] = 0.5 * (lo + hi);
  }
  return out;
}

inline std::vector<double> eigenvalues(const PotentialSample& sample, double tol = 1e-12) {
  return eigenvalues(std::span<const double>(sample.values), tol);
}

}  // namespace rsfluct
