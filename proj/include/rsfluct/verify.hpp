#pragma once

// Oracle identity suites: path counts against the symbolic expansion, and the
// assembled expectation decomposition against the symbolic expectation.

#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rsfluct/combinatorics.hpp"
#include "rsfluct/distribution.hpp"
#include "rsfluct/expansion.hpp"
#include "rsfluct/multi_index.hpp"
#include "rsfluct/symbolic.hpp"

namespace rsfluct {

enum class VerifyLevel { fast, full };

inline VerifyLevel parse_verify_level(std::string_view text) {
  if (text == "fast") return VerifyLevel::fast;
  if (text == "full") return VerifyLevel::full;
  throw std::invalid_argument("verify level must be 'fast' or 'full', got '" + std::string(text) + "'");
}

inline const char* to_string(VerifyLevel level) noexcept { return level == VerifyLevel::fast ? "fast" : "full"; }

/// Perturbs one coefficient of the expansion of Tr H^k at size N before the
/// checks run. Without beta, the first interior term is perturbed.
struct Fault {
  int k = 0;
  int N = 0;
  std::optional<MultiIndex> beta;
  std::int64_t delta = 1;
};

struct VerifyCheck {
  std::string suite;  // "identity" or "decomposition"
  int k = 0;
  int N = 0;
  std::optional<double> alpha;
  std::string dist;
  bool passed = true;
  std::string detail;
};

struct VerifyReport {
  VerifyLevel level = VerifyLevel::fast;
  std::vector<VerifyCheck> checks;
  double seconds = 0.0;

  std::size_t failures() const {
    std::size_t n = 0;
    for (const auto& c : checks) n += c.passed ? 0 : 1;
    return n;
  }
  bool ok() const { return failures() == 0; }
};

namespace detail {

inline void apply_fault(TracePolynomial& poly, const Fault& fault) {
  const int lo = poly.k;
  const int hi = poly.N - poly.k;
  for (auto& [monomial, coeff] : poly.terms) {
    if (monomial.iota() < lo || monomial.iota() > hi) continue;
    if (fault.beta && !(monomial.canonical() == *fault.beta)) continue;
    coeff = static_cast<std::uint64_t>(static_cast<std::int64_t>(coeff) + fault.delta);
    return;
  }
  throw std::invalid_argument("fault: no matching interior term in the expansion of Tr H^" + std::to_string(poly.k) +
                              " at N=" + std::to_string(poly.N));
}

}  // namespace detail

inline constexpr double decomposition_rel_tol = 1e-9;

/// fast: k <= 6, N <= 20; full: k <= 8, N <= 40.
inline VerifyReport run_verification(VerifyLevel level, const std::optional<Fault>& fault = std::nullopt) {
  const auto start = std::chrono::steady_clock::now();
  const int k_max = level == VerifyLevel::fast ? 6 : 8;
  const int n_max = level == VerifyLevel::fast ? 20 : 40;
  VerifyReport report;
  report.level = level;
  const std::vector<DistributionSpec> dists{DistributionSpec::rademacher(),
                                            DistributionSpec::uniform_symmetric(std::sqrt(3.0))};
  const std::vector<double> alphas{0.2, 0.35, 0.5, 0.8};

  for (int k = 1; k <= k_max; ++k) {
    std::vector<int> sizes{2 * k + 2};
    for (int N : {20, 30, 40}) {
      if (N <= n_max && N > 2 * k + 2) sizes.push_back(N);
    }
    for (int N : sizes) {
      auto poly = trace_power_polynomial(N, k);
      if (fault && fault->k == k && fault->N == N) detail::apply_fault(poly, *fault);

      VerifyCheck identity{"identity", k, N, std::nullopt, {}, true, {}};
      const auto result = check_interior_identity(poly);
      if (!result.ok()) {
        identity.passed = false;
        identity.detail = result.violations.front().describe(N, k);
        if (result.violations.size() > 1) {
          identity.detail += " (+" + std::to_string(result.violations.size() - 1) + " more)";
        }
      } else {
        identity.detail = std::to_string(result.interior_checked) + " interior, " +
                          std::to_string(result.boundary_checked) + " boundary placements";
      }
      report.checks.push_back(std::move(identity));

      for (const auto& dist : dists) {
        for (double alpha : alphas) {
          VerifyCheck c{"decomposition", k, N, alpha, dist.to_string(), true, {}};
          const double oracle = expectation_of(poly, alpha, dist);
          const double assembled = power_expansion(N, k, alpha, dist).reconstructed_mean;
          const double rel = std::fabs(assembled - oracle) / std::max(1.0, std::fabs(oracle));
          c.passed = rel <= decomposition_rel_tol;
          c.detail = "relative error " + std::to_string(rel);
          if (!c.passed) {
            c.detail = "k=" + std::to_string(k) + " N=" + std::to_string(N) + ": assembled mean " +
                       std::to_string(assembled) + " vs symbolic " + std::to_string(oracle) + ", " + c.detail;
          }
          report.checks.push_back(std::move(c));
        }
      }
    }
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace rsfluct
