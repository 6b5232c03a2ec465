#pragma once

// Exact decomposition of E[Tr H^k] into the free part A_{k,1} N + A_{k,0},
// the boundary defect B^k(N), the main terms C_{j,k} S_j(N) and the site
// replacement error D^k(N); plus its aggregation over a power series.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

#include "rsfluct/analytic_series.hpp"
#include "rsfluct/combinatorics.hpp"
#include "rsfluct/distribution.hpp"
#include "rsfluct/numeric.hpp"
#include "rsfluct/symbolic.hpp"

namespace rsfluct {

struct FreeConstants {
  long long leading = 0;   // A_{k,1}
  long long constant = 0;  // A_{k,0}
};

/// Tr((S + S*)^k) = A_{k,1} N + A_{k,0}, both read off the closed paths
/// without flat steps.
inline FreeConstants a_constants(int k, int cap = default_enumeration_cap) {
  detail::check_length(k, cap, "a_constants");
  FreeConstants out;
  for (const auto& path : path_summaries(k, hard_enumeration_cap)) {
    if (!path.flats.empty()) continue;
    const auto count = static_cast<long long>(path.multiplicity);
    out.leading += count;
    out.constant -= count * (path.max_level - path.min_level);
  }
  return out;
}

/// E[X^beta] = prod_h E[X^{beta_h}].
inline double moment_of(const MultiIndex& beta, const DistributionSpec& dist) {
  double value = 1.0;
  for (const auto& [offset, count] : beta.entries()) {
    value *= dist.moment(static_cast<int>(count));
    if (value == 0.0) return 0.0;
  }
  return value;
}

/// E|X|^beta.
inline double abs_moment_of(const MultiIndex& beta, const DistributionSpec& dist) {
  double value = 1.0;
  for (const auto& [offset, count] : beta.entries()) value *= dist.abs_moment(static_cast<int>(count));
  return value;
}

/// C_{j,k} = sum over canonical |beta| = j of p^k(beta) E[X^beta].
inline double c_jk(int k, int j, const DistributionSpec& dist, int cap = default_enumeration_cap) {
  NeumaierSum sum;
  for (const auto& [beta, p] : profile_table(k, cap)) {
    if (static_cast<int>(beta.weight()) != j) continue;
    sum.add(static_cast<double>(p) * moment_of(beta, dist));
  }
  return sum.value();
}

/// S_j(N) = sum_{n=1}^N n^{-j alpha}, summed from the smallest term up.
inline double s_j(long N, int j, double alpha) {
  if (N < 1) throw std::invalid_argument("s_j: N must be >= 1");
  NeumaierSum sum;
  const double exponent = -alpha * j;
  for (long n = N; n >= 1; --n) sum.add(std::pow(static_cast<double>(n), exponent));
  return sum.value();
}

/// m = max{k : k alpha <= 1}, with k alpha = 1 counted up to rounding.
inline int leading_order(double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  constexpr double slack = 1e-12;
  int m = static_cast<int>(std::floor((1.0 + slack) / alpha));
  while (m > 0 && m * alpha > 1.0 + slack) --m;
  while ((m + 1) * alpha <= 1.0 + slack) ++m;
  return m;
}

namespace detail {

inline void check_expansion_args(long N, int k, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (k < 0) throw std::invalid_argument("power k must be >= 0");
  if (N <= 2L * k) {
    throw std::invalid_argument("expansion needs N > 2k (N=" + std::to_string(N) + ", k=" +
                                std::to_string(k) + ")");
  }
}

/// E[X^beta] prod_h (iota + h)^{-alpha beta_h}: E[V^beta] for the placement.
inline double placed_expectation(const MultiIndex& beta, double moment, long iota, double alpha) {
  double weight = moment;
  for (const auto& [offset, count] : beta.entries()) {
    weight *= std::pow(static_cast<double>(iota + offset), -alpha * count);
  }
  return weight;
}

}  // namespace detail

struct BoundaryDefect {
  double left = 0.0;   // placements with iota in [1, k)
  double right = 0.0;  // placements with iota in (N - k, N]
  double total() const noexcept { return left + right; }
};

/// B^k(N) split by window: sum over placements with iota outside [k, N-k]
/// of (a_N^k(beta) - p^k(beta)) E[V^beta].
inline BoundaryDefect b_k_windows(long N, int k, double alpha, const DistributionSpec& dist,
                                  const SymbolicCaps& caps = {}) {
  detail::check_expansion_args(N, k, alpha);
  BoundaryDefect out;
  if (k == 0) return out;
  const auto& table = profile_table(k, hard_enumeration_cap);
  const int n = static_cast<int>(N);

  auto window = [&](int lo, int hi) {
    NeumaierSum sum;
    if (lo > hi) return 0.0;
    const auto poly = window_polynomial(n, k, lo, hi, caps);
    for (const auto& [monomial, coeff] : poly.terms) {
      sum.add(static_cast<double>(coeff) * monomial.expectation(alpha, dist));
    }
    for (const auto& [beta, p] : table) {
      if (beta.is_zero()) continue;
      const double moment = moment_of(beta, dist);
      if (moment == 0.0) continue;
      for (int iota = lo; iota <= hi; ++iota) {
        sum.add(-static_cast<double>(p) * detail::placed_expectation(beta, moment, iota, alpha));
      }
    }
    return sum.value();
  };
  out.left = window(1, k - 1);
  out.right = window(n - k + 1, n);
  return out;
}

inline double b_k(long N, int k, double alpha, const DistributionSpec& dist, const SymbolicCaps& caps = {}) {
  return b_k_windows(N, k, alpha, dist, caps).total();
}

/// D^k(N) = sum_beta p^k(beta) E[X^beta] sum_{i=1}^N (prod_h (i+h)^{-alpha beta_h} - i^{-alpha |beta|}).
inline double d_k(long N, int k, double alpha, const DistributionSpec& dist, int cap = default_enumeration_cap) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (N < 1) throw std::invalid_argument("d_k: N must be >= 1");
  NeumaierSum sum;
  for (const auto& [beta, p] : profile_table(k, cap)) {
    if (beta.is_zero() || beta.span() == 0) continue;  // single-site: no replacement error
    const double moment = moment_of(beta, dist);
    if (moment == 0.0) continue;
    const double weight = static_cast<double>(beta.weight());
    NeumaierSum inner;
    for (long i = N; i >= 1; --i) {
      inner.add(detail::placed_expectation(beta, 1.0, i, alpha) - std::pow(static_cast<double>(i), -alpha * weight));
    }
    sum.add(static_cast<double>(p) * moment * inner.value());
  }
  return sum.value();
}

/// Upper bound on |D^k| valid for every N.
inline double d_bound(int k, double alpha, const DistributionSpec& dist, int cap = default_enumeration_cap) {
  NeumaierSum sum;
  for (const auto& [beta, p] : profile_table(k, cap)) {
    if (beta.is_zero()) continue;
    NeumaierSum inner;
    for (int i = 1; i <= k; ++i) inner.add(std::pow(static_cast<double>(i), -alpha * beta.weight()));
    sum.add(static_cast<double>(p) * abs_moment_of(beta, dist) * inner.value());
  }
  return sum.value();
}

/// sum_{iota=1}^N sum_beta p^k(beta) E[V^beta placed at iota].
inline double placed_path_sum(long N, int k, double alpha, const DistributionSpec& dist,
                              int cap = default_enumeration_cap) {
  NeumaierSum sum;
  for (const auto& [beta, p] : profile_table(k, cap)) {
    if (beta.is_zero()) continue;
    const double moment = moment_of(beta, dist);
    if (moment == 0.0) continue;
    NeumaierSum inner;
    for (long iota = N; iota >= 1; --iota) inner.add(detail::placed_expectation(beta, 1.0, iota, alpha));
    sum.add(static_cast<double>(p) * moment * inner.value());
  }
  return sum.value();
}

/// E[Tr H^k] in O(N * #beta): the free part, the boundary defect from the
/// symbolic windows, and every placement of every path profile.
inline double exact_mean_trace_power(long N, int k, double alpha, const DistributionSpec& dist,
                                     const SymbolicCaps& caps = {}) {
  detail::check_expansion_args(N, k, alpha);
  if (k == 0) return static_cast<double>(N);
  const auto free = a_constants(k, caps.max_power);
  NeumaierSum sum;
  sum.add(static_cast<double>(free.leading) * static_cast<double>(N));
  sum.add(static_cast<double>(free.constant));
  sum.add(b_k(N, k, alpha, dist, caps));
  sum.add(placed_path_sum(N, k, alpha, dist, caps.max_power));
  return sum.value();
}

struct ExpansionReport {
  std::string subject;       // "x^k" or the series id
  std::optional<int> power;  // set for a single power
  long N = 0;
  double alpha = 0.0;
  std::string dist;
  double A1 = 0.0;  // coefficient of N
  double A0 = 0.0;
  std::map<int, double> C;  // j -> C_{j,k} or sum_l c_l C_{j,l}
  std::map<int, double> S;  // j -> S_j(N)
  double B = 0.0;
  double D = 0.0;
  int m = 0;
  std::map<int, double> leading;  // j = 0..m; j = 0 multiplies N
  double remainder = 0.0;         // C_N(f)
  double reconstructed_mean = 0.0;
  int truncation_degree = 0;
  double tail_bound = 0.0;
};

namespace detail {

inline void finish_report(ExpansionReport& r, const std::map<int, std::map<int, double>>& per_power_c,
                          const std::map<int, double>& c_of_power, double sum_c_a0) {
  r.m = leading_order(r.alpha);
  for (const auto& [j, value] : r.C) {
    if (!r.S.count(j)) r.S[j] = s_j(r.N, j, r.alpha);
  }
  r.leading[0] = r.A1;
  for (int j = 1; j <= r.m; ++j) r.leading[j] = r.C.count(j) ? r.C.at(j) : 0.0;

  NeumaierSum rem;
  rem.add(sum_c_a0);
  for (const auto& [l, cs] : per_power_c) {
    const double cl = c_of_power.at(l);
    for (const auto& [j, value] : cs) {
      if (j > r.m) rem.add(cl * value * r.S.at(j));
    }
  }
  rem.add(r.B);
  rem.add(r.D);
  r.remainder = rem.value();

  NeumaierSum mean;
  mean.add(r.A1 * static_cast<double>(r.N));
  mean.add(r.A0);
  mean.add(r.B);
  for (const auto& [j, value] : r.C) mean.add(value * r.S.at(j));
  mean.add(r.D);
  r.reconstructed_mean = mean.value();
}

}  // namespace detail

/// All constants of the E[Tr H^k] decomposition for one power.
inline ExpansionReport power_expansion(long N, int k, double alpha, const DistributionSpec& dist,
                                       const SymbolicCaps& caps = {}) {
  detail::check_expansion_args(N, k, alpha);
  ExpansionReport r;
  r.subject = "x^" + std::to_string(k);
  r.power = k;
  r.N = N;
  r.alpha = alpha;
  r.dist = dist.to_string();
  r.truncation_degree = k;
  const auto free = a_constants(k, caps.max_power);
  r.A1 = static_cast<double>(free.leading);
  r.A0 = static_cast<double>(free.constant);
  std::map<int, double> cs;
  for (int j = 1; j <= k; ++j) cs[j] = c_jk(k, j, dist, caps.max_power);
  r.C = cs;
  r.B = k == 0 ? 0.0 : b_k(N, k, alpha, dist, caps);
  r.D = d_k(N, k, alpha, dist, caps.max_power);
  detail::finish_report(r, {{k, cs}}, {{k, 1.0}}, r.A0);
  return r;
}

/// Aggregates the decomposition over f = sum_l c_l x^l, truncated at the
/// degree where N sum_{l>K} |c_l| (2 + C_X)^l <= tail_tol.
inline ExpansionReport analytic_expansion(const AnalyticSeries& f, long N, double alpha,
                                          const DistributionSpec& dist, double tail_tol = 1e-9,
                                          const SymbolicCaps& caps = {}) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  check_radius(f, dist.bound());
  const auto trunc = choose_truncation(f, 2.0 + dist.bound(), static_cast<double>(N), tail_tol, caps.max_power);
  detail::check_expansion_args(N, trunc.degree, alpha);

  ExpansionReport r;
  r.subject = f.id();
  r.N = N;
  r.alpha = alpha;
  r.dist = dist.to_string();
  r.truncation_degree = trunc.degree;
  r.tail_bound = trunc.tail_bound;

  std::map<int, std::map<int, double>> per_power;
  std::map<int, double> coeffs;
  NeumaierSum a1, a0, b, d, sum_c_a0;
  std::map<int, NeumaierSum> c_total;
  for (int l = 0; l <= trunc.degree; ++l) {
    const double cl = f.coefficient(l);
    if (cl == 0.0) continue;
    coeffs[l] = cl;
    const auto free = a_constants(l, caps.max_power);
    a1.add(cl * static_cast<double>(free.leading));
    a0.add(cl * static_cast<double>(free.constant));
    sum_c_a0.add(cl * static_cast<double>(free.constant));
    if (l > 0) {
      b.add(cl * b_k(N, l, alpha, dist, caps));
      d.add(cl * d_k(N, l, alpha, dist, caps.max_power));
    }
    for (int j = 1; j <= l; ++j) {
      const double c = c_jk(l, j, dist, caps.max_power);
      per_power[l][j] = c;
      c_total[j].add(cl * c);
    }
  }
  r.A1 = a1.value();
  r.A0 = a0.value();
  r.B = b.value();
  r.D = d.value();
  for (const auto& [j, sum] : c_total) r.C[j] = sum.value();
  detail::finish_report(r, per_power, coeffs, sum_c_a0.value());
  return r;
}

/// sum_l c_l E[Tr H^l] over the truncation chosen as in analytic_expansion.
inline double exact_mean_trace_f(const AnalyticSeries& f, long N, double alpha, const DistributionSpec& dist,
                                 double tail_tol = 1e-9, const SymbolicCaps& caps = {}) {
  const auto trunc = choose_truncation(f, 2.0 + dist.bound(), static_cast<double>(N), tail_tol, caps.max_power);
  NeumaierSum sum;
  for (int l = 0; l <= trunc.degree; ++l) {
    const double cl = f.coefficient(l);
    if (cl != 0.0) sum.add(cl * exact_mean_trace_power(N, l, alpha, dist, caps));
  }
  return sum.value();
}

}  // namespace rsfluct
