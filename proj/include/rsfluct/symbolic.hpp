#pragma once

// Exact expansion of Tr(H^k) and (H^k)_ii as integer polynomials in the
// formal site variables V(1..N), by placing closed lattice paths at every
// start site and keeping those that stay inside [1, N].

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rsfluct/combinatorics.hpp"
#include "rsfluct/distribution.hpp"
#include "rsfluct/multi_index.hpp"
#include "rsfluct/numeric.hpp"

namespace rsfluct {

struct SymbolicCaps {
  int max_power = 12;
  int max_sites = 64;
};

/// V^beta for a concretely placed multi-index: site -> exponent, sorted by site.
class SiteMonomial {
 public:
  using Entry = std::pair<int, unsigned>;

  SiteMonomial() = default;
  explicit SiteMonomial(std::vector<Entry> entries) : entries_(std::move(entries)) {}

  /// Places a canonical index with its minimal support point at site iota.
  static SiteMonomial place(const MultiIndex& beta, int iota) {
    std::vector<Entry> out;
    out.reserve(beta.entries().size());
    for (const auto& [offset, count] : beta.entries()) out.emplace_back(iota + offset, count);
    return SiteMonomial(std::move(out));
  }

  const std::vector<Entry>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  int iota() const { return entries_.front().first; }

  unsigned degree() const noexcept {
    unsigned d = 0;
    for (const auto& e : entries_) d += e.second;
    return d;
  }

  MultiIndex canonical() const {
    std::map<int, unsigned> levels(entries_.begin(), entries_.end());
    return MultiIndex::from_levels(levels);
  }

  /// E[V^beta] = E[X^beta] prod_n n^(-alpha e_n) for V(n) = X_n / n^alpha.
  double expectation(double alpha, const DistributionSpec& dist) const {
    double value = 1.0;
    for (const auto& [site, exponent] : entries_) {
      const double m = dist.moment(static_cast<int>(exponent));
      if (m == 0.0) return 0.0;
      value *= m * std::pow(static_cast<double>(site), -alpha * exponent);
    }
    return value;
  }

  friend bool operator==(const SiteMonomial&, const SiteMonomial&) = default;
  friend bool operator<(const SiteMonomial& a, const SiteMonomial& b) { return a.entries_ < b.entries_; }

 private:
  std::vector<Entry> entries_;
};

/// Tr(H^k) (or one diagonal entry) as constant + sum coeff * V^beta.
struct TracePolynomial {
  int N = 0;
  int k = 0;
  std::uint64_t constant = 0;
  std::map<SiteMonomial, std::uint64_t> terms;

  /// potential[n - 1] holds V(n).
  template <class T>
  T evaluate(std::span<const T> potential) const {
    if (potential.size() < static_cast<std::size_t>(N)) {
      throw std::invalid_argument("TracePolynomial::evaluate: potential shorter than N");
    }
    T total = static_cast<T>(constant);
    for (const auto& [monomial, coeff] : terms) {
      T product = static_cast<T>(coeff);
      for (const auto& [site, exponent] : monomial.entries()) {
        for (unsigned e = 0; e < exponent; ++e) product *= potential[static_cast<std::size_t>(site - 1)];
      }
      total += product;
    }
    return total;
  }

  TracePolynomial& operator+=(const TracePolynomial& other) {
    constant += other.constant;
    for (const auto& [monomial, coeff] : other.terms) terms[monomial] += coeff;
    return *this;
  }

  friend bool operator==(const TracePolynomial&, const TracePolynomial&) = default;
};

namespace detail {

inline void check_symbolic(int N, int k, const SymbolicCaps& caps, bool limit_sites) {
  if (N < 1) throw std::invalid_argument("symbolic expansion needs N >= 1");
  if (k < 0) throw std::invalid_argument("symbolic expansion needs k >= 0");
  if (k > caps.max_power) {
    throw cap_exceeded("symbolic expansion: power " + std::to_string(k) + " exceeds cap " +
                       std::to_string(caps.max_power));
  }
  if (limit_sites && N > caps.max_sites) {
    throw cap_exceeded("symbolic expansion: N = " + std::to_string(N) + " exceeds site cap " +
                       std::to_string(caps.max_sites));
  }
}

/// Adds the contributions of start site i. Only paths whose shifted levels
/// stay in [1, N] survive; their flat levels, shifted by i, give the monomial.
template <class Keep>
void add_start_site(TracePolynomial& poly, int i, Keep&& keep) {
  for (const auto& path : path_summaries(poly.k, hard_enumeration_cap)) {
    if (i + path.min_level < 1 || i + path.max_level > poly.N) continue;
    if (path.flats.empty()) {
      if (keep(std::optional<int>{})) poly.constant += path.multiplicity;
      continue;
    }
    std::vector<SiteMonomial::Entry> placed;
    placed.reserve(path.flats.size());
    for (const auto& [level, count] : path.flats) placed.emplace_back(i + level, count);
    if (!keep(std::optional<int>{placed.front().first})) continue;
    poly.terms[SiteMonomial(std::move(placed))] += path.multiplicity;
  }
}

}  // namespace detail

inline TracePolynomial trace_power_polynomial(int N, int k, const SymbolicCaps& caps = {}) {
  detail::check_symbolic(N, k, caps, true);
  TracePolynomial poly{N, k, 0, {}};
  for (int i = 1; i <= N; ++i) {
    detail::add_start_site(poly, i, [](std::optional<int>) { return true; });
  }
  return poly;
}

inline TracePolynomial diag_entry_polynomial(int N, int k, int i, const SymbolicCaps& caps = {}) {
  detail::check_symbolic(N, k, caps, true);
  if (i < 1 || i > N) throw std::invalid_argument("diagonal entry site out of [1, N]");
  TracePolynomial poly{N, k, 0, {}};
  detail::add_start_site(poly, i, [](std::optional<int>) { return true; });
  return poly;
}

/// The part of Tr(H^k) made of monomials whose minimal site lies in
/// [iota_lo, iota_hi]. Only start sites within k of the window are visited,
/// so the cost does not depend on N and the site cap does not apply.
inline TracePolynomial window_polynomial(int N, int k, int iota_lo, int iota_hi,
                                         const SymbolicCaps& caps = {}) {
  detail::check_symbolic(N, k, caps, false);
  TracePolynomial poly{N, k, 0, {}};
  const int first = std::max(1, iota_lo - k);
  const int last = std::min(N, iota_hi + k);
  for (int i = first; i <= last; ++i) {
    detail::add_start_site(poly, i, [&](std::optional<int> iota) {
      return iota.has_value() && *iota >= iota_lo && *iota <= iota_hi;
    });
  }
  return poly;
}

/// a_N^k(beta) for beta placed with its minimal support point at iota.
inline std::uint64_t coefficient(const TracePolynomial& poly, const MultiIndex& beta, int iota) {
  if (beta.is_zero()) return poly.constant;
  const auto it = poly.terms.find(SiteMonomial::place(beta, iota));
  return it == poly.terms.end() ? 0 : it->second;
}

struct IdentityViolation {
  MultiIndex beta;
  int iota = 0;
  std::uint64_t coefficient = 0;
  std::uint64_t expected = 0;
  bool boundary = false;

  std::string describe(int N, int k) const {
    return "k=" + std::to_string(k) + " N=" + std::to_string(N) + " beta=" + beta.to_string() +
           " iota=" + std::to_string(iota) + (boundary ? " (boundary)" : " (interior)") +
           ": coefficient " + std::to_string(coefficient) +
           (boundary ? " exceeds p^k(beta) = " : " != p^k(beta) = ") + std::to_string(expected);
  }
};

struct InteriorIdentityReport {
  int N = 0;
  int k = 0;
  std::size_t interior_checked = 0;
  std::size_t boundary_checked = 0;
  std::vector<IdentityViolation> violations;

  bool ok() const noexcept { return violations.empty(); }
};

/// Checks a_N^k(beta) == p^k(beta) for every placement with iota in
/// [k, N - k] and a_N^k(beta) <= p^k(beta) everywhere else.
inline InteriorIdentityReport check_interior_identity(const TracePolynomial& poly) {
  const int N = poly.N;
  const int k = poly.k;
  if (N <= 2 * k) {
    throw std::invalid_argument("interior identity needs N > 2k (N=" + std::to_string(N) +
                                ", k=" + std::to_string(k) + ")");
  }
  const auto& table = profile_table(k, hard_enumeration_cap);
  InteriorIdentityReport report{N, k, 0, 0, {}};

  // Every canonical index with p^k > 0 placed in the interior window must be
  // present with exactly that coefficient.
  for (int iota = k; iota <= N - k; ++iota) {
    for (const auto& [beta, p] : table) {
      if (beta.is_zero()) continue;
      ++report.interior_checked;
      const auto a = coefficient(poly, beta, iota);
      if (a != p) report.violations.push_back({beta, iota, a, p, false});
    }
  }
  // Interior monomials that do not correspond to any path profile.
  for (const auto& [monomial, a] : poly.terms) {
    const int iota = monomial.iota();
    const auto beta = monomial.canonical();
    const auto it = table.find(beta);
    const std::uint64_t p = it == table.end() ? 0 : it->second;
    if (iota >= k && iota <= N - k) {
      if (p == 0) report.violations.push_back({beta, iota, a, p, false});
      continue;
    }
    ++report.boundary_checked;
    if (a > p) report.violations.push_back({beta, iota, a, p, true});
  }
  return report;
}

inline InteriorIdentityReport verify_interior_identity(int N, int k, const SymbolicCaps& caps = {}) {
  if (N <= 2 * k) {
    throw std::invalid_argument("interior identity needs N > 2k (N=" + std::to_string(N) +
                                ", k=" + std::to_string(k) + ")");
  }
  return check_interior_identity(trace_power_polynomial(N, k, caps));
}

/// E[Tr H^k] from the full symbolic expansion (small-N oracle).
inline double expectation_of(const TracePolynomial& poly, double alpha, const DistributionSpec& dist) {
  NeumaierSum sum;
  sum.add(static_cast<double>(poly.constant));
  for (const auto& [monomial, coeff] : poly.terms) {
    sum.add(static_cast<double>(coeff) * monomial.expectation(alpha, dist));
  }
  return sum.value();
}

inline double exact_expectation_trace_power(int N, int k, double alpha, const DistributionSpec& dist,
                                            const SymbolicCaps& caps = {}) {
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  for (int m = 1; m <= k; ++m) {
    if (!dist.has_moment(m)) {
      throw std::invalid_argument("distribution lacks moment of order " + std::to_string(m));
    }
  }
  return expectation_of(trace_power_polynomial(N, k, caps), alpha, dist);
}

}  // namespace rsfluct
