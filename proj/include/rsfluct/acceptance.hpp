#pragma once

// The twelve acceptance criteria. Tolerances, grids and seeds are fixed here.

#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsfluct/analytic_series.hpp"
#include "rsfluct/combinatorics.hpp"
#include "rsfluct/distribution.hpp"
#include "rsfluct/expansion.hpp"
#include "rsfluct/montecarlo.hpp"
#include "rsfluct/potential.hpp"
#include "rsfluct/statistics.hpp"
#include "rsfluct/symbolic.hpp"
#include "rsfluct/tridiagonal.hpp"

namespace rsfluct {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

namespace acceptance {

inline constexpr double variance_band = 0.15;
inline constexpr double skew_limit = 0.15;
inline constexpr double kurtosis_limit = 0.30;
inline constexpr double degenerate_limit = 0.05;
inline constexpr double correlation_floor = 0.95;
inline constexpr double stabilization_band = 0.25;
inline constexpr double cancellation_ratio = 0.6;
inline constexpr double convergence_factor = 1.5;
inline constexpr double gap_shrink = 2.0;
inline constexpr int replicas = 1000;
inline constexpr int case_c_replicas = 500;
inline constexpr int convergence_replicas = 200;

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

/// a <= b sqrt(3) for integers a, b.
inline bool leq_b_sqrt3(const BigInt& a, const BigInt& b) {
  if (a <= 0 && b >= 0) return true;
  if (a > 0 && b <= 0) return false;
  if (a > 0) return a * a <= 3 * b * b;
  return a * a >= 3 * b * b;
}

/// sum_j sum_p(l, j) C^j <= (C + 2)^l for C = 1 (integer) and C = sqrt 3.
inline bool weighted_bound_holds(int l, bool sqrt3) {
  if (!sqrt3) {
    BigInt lhs = 0;
    for (int j = 0; j <= l; ++j) lhs += BigInt(sum_p_by_weight(l, j));
    return lhs <= boost::multiprecision::pow(BigInt(3), static_cast<unsigned>(l));
  }
  // lhs = P + Q sqrt3, rhs = (2 + sqrt3)^l = R + T sqrt3.
  BigInt P = 0, Q = 0, three_pow = 1;
  for (int j = 0; j <= l; ++j) {
    if (j > 0 && j % 2 == 0) three_pow *= 3;
    const BigInt s = sum_p_by_weight(l, j);
    if (j % 2 == 0) P += s * three_pow;
    else Q += s * three_pow;
  }
  BigInt R = 1, T = 0;
  for (int i = 0; i < l; ++i) {
    const BigInt r = 2 * R + 3 * T;
    T = R + 2 * T;
    R = r;
  }
  return leq_b_sqrt3(P - R, T - Q);
}

/// Enumeration-only sigma values, independent of the closed forms.
inline double brute_sigma_A(const std::vector<double>& c, double eta2) {
  double s = 0.0;
  for (std::size_t j = 1; j < c.size(); j += 2) {
    if (c[j] != 0.0) s += c[j] * static_cast<double>(count_p(static_cast<int>(j), MultiIndex::delta()));
  }
  return s * s * eta2;
}

inline double brute_sigma_B(const std::vector<double>& c, double eta2, double m4) {
  double diag = 0.0;
  for (std::size_t j = 2; j < c.size(); j += 2) {
    if (c[j] != 0.0) diag += c[j] * static_cast<double>(count_p(static_cast<int>(j), MultiIndex::single(2)));
  }
  double total = diag * diag * (m4 - eta2 * eta2);
  for (int s = 1; s < static_cast<int>(c.size()); ++s) {
    double pair = 0.0;
    for (std::size_t j = 2; j < c.size(); j += 2) {
      if (c[j] != 0.0) pair += c[j] * static_cast<double>(count_p(static_cast<int>(j), MultiIndex::delta_pair(s)));
    }
    total += pair * pair * eta2 * eta2;
  }
  return total;
}

inline std::string diagnostics(const Moments& m) {
  return "skew=" + fmt(m.skewness) + " exkurt=" + fmt(m.excess_kurtosis);
}

inline bool normal_enough(const Moments& m) {
  return std::fabs(m.skewness) <= skew_limit && std::fabs(m.excess_kurtosis) <= kurtosis_limit;
}

inline EnsembleConfig ensemble(double alpha, DistributionSpec dist, std::vector<AnalyticSeries> fs,
                               std::vector<long> grid, int m, std::uint64_t seed, int workers) {
  EnsembleConfig cfg;
  cfg.alpha = alpha;
  cfg.dist = std::move(dist);
  cfg.functions = std::move(fs);
  cfg.n_grid = std::move(grid);
  cfg.replicas = m;
  cfg.seed = seed;
  cfg.workers = workers;
  return cfg;
}

inline const DistributionSpec uniform3 = DistributionSpec::uniform_symmetric(std::sqrt(3.0));
inline const DistributionSpec rademacher = DistributionSpec::rademacher();

inline CriterionResult closed_forms() {
  CriterionResult r{1, "closed forms vs enumeration", true, {}, 0};
  int checked = 0;
  for (int k = 1; k <= 13; k += 2, ++checked) {
    if (BigInt(count_p(k, MultiIndex::delta())) != p_delta_closed(k)) {
      r.passed = false;
      r.detail += "p^" + std::to_string(k) + "(delta) mismatch; ";
    }
  }
  for (int j = 2; j <= 12; j += 2, ++checked) {
    if (BigInt(count_p(j, MultiIndex::single(2))) != p_twodelta_closed(j)) {
      r.passed = false;
      r.detail += "p^" + std::to_string(j) + "(2delta) mismatch; ";
    }
  }
  if (r.passed) r.detail = std::to_string(checked) + " counts equal";
  return r;
}

inline CriterionResult weight_bounds() {
  CriterionResult r{2, "weight bounds", true, {}, 0};
  int checked = 0;
  for (int l = 0; l <= 12; ++l) {
    for (int j = 0; j <= l; ++j, ++checked) {
      if (BigInt(sum_p_by_weight(l, j)) > weight_bound(l, j)) {
        r.passed = false;
        r.detail += "(l=" + std::to_string(l) + ",j=" + std::to_string(j) + ") ";
      }
    }
    for (bool sqrt3 : {false, true}) {
      ++checked;
      if (!weighted_bound_holds(l, sqrt3)) {
        r.passed = false;
        r.detail += "(l=" + std::to_string(l) + (sqrt3 ? ",C=sqrt3) " : ",C=1) ");
      }
    }
  }
  if (r.passed) r.detail = std::to_string(checked) + " inequalities hold";
  return r;
}

inline CriterionResult interior_identity() {
  CriterionResult r{3, "interior identity at N=20", true, {}, 0};
  std::size_t interior = 0, boundary = 0;
  for (int k = 1; k <= 8; ++k) {
    const auto report = verify_interior_identity(20, k);
    interior += report.interior_checked;
    boundary += report.boundary_checked;
    if (!report.ok()) {
      r.passed = false;
      r.detail += report.violations.front().describe(20, k) + "; ";
    }
  }
  if (r.passed) r.detail = std::to_string(interior) + " interior, " + std::to_string(boundary) + " boundary";
  return r;
}

inline CriterionResult decomposition_identity() {
  CriterionResult r{4, "decomposition identity", true, {}, 0};
  double worst = 0.0;
  int checked = 0;
  for (int k = 1; k <= 8; ++k) {
    for (int N : {2 * k + 2, 30, 40}) {
      for (double alpha : {0.2, 0.35, 0.5, 0.8}) {
        for (const auto& dist : {rademacher, uniform3}) {
          const double oracle = exact_expectation_trace_power(N, k, alpha, dist);
          const double value = power_expansion(N, k, alpha, dist).reconstructed_mean;
          const double rel = std::fabs(value - oracle) / std::max(1.0, std::fabs(oracle));
          worst = std::max(worst, rel);
          ++checked;
        }
      }
    }
  }
  r.passed = worst <= 1e-9;
  r.detail = std::to_string(checked) + " cases, max rel err " + fmt(worst);
  return r;
}

inline CriterionResult numeric_kernels() {
  CriterionResult r{5, "numeric kernels", true, {}, 0};
  const std::vector<double> zero(1000, 0.0);
  const auto ev = eigenvalues(zero);
  double eig_err = 0.0;
  for (int j = 1; j <= 1000; ++j) {
    const double exact = 2.0 * std::cos(j * std::numbers::pi / 1001.0);
    eig_err = std::max(eig_err, std::fabs(ev[static_cast<std::size_t>(1000 - j)] - exact));
  }
  bool traces_exact = true;
  for (int N : {4, 10, 1000}) {
    const auto t = trace_moments(std::vector<double>(static_cast<std::size_t>(N), 0.0), 4);
    traces_exact = traces_exact && t[2] == 2.0 * N - 2 && t[4] == 6.0 * N - 10;
  }
  const auto sample = sample_potential(500, 0.3, rademacher, 5005);
  const auto moments = trace_moments(sample, 10);
  const auto spec = eigenvalues(sample);
  double rel = 0.0;
  for (int k = 1; k <= 10; ++k) {
    NeumaierSum s;
    for (double l : spec) s.add(std::pow(l, k));
    rel = std::max(rel, std::fabs(s.value() - moments[static_cast<std::size_t>(k)]) /
                            std::max(1.0, std::fabs(moments[static_cast<std::size_t>(k)])));
  }
  r.passed = eig_err <= 1e-8 && traces_exact && rel <= 1e-8;
  r.detail = "eig err " + fmt(eig_err) + ", free traces " + (traces_exact ? "exact" : "WRONG") +
             ", power sums rel err " + fmt(rel);
  return r;
}

inline CriterionResult sigma_values() {
  CriterionResult r{6, "sigma evaluators", true, {}, 0};
  const double a3 = sigma_A(AnalyticSeries::polynomial({0, 0, 0, 1}), rademacher);
  const double b2 = sigma_B(AnalyticSeries::polynomial({0, 0, 1}), uniform3);
  const double b4 = sigma_B(AnalyticSeries::polynomial({0, 0, 0, 0, 1}), uniform3);
  const double m4 = uniform3.fourth_moment();
  const double ba3 = brute_sigma_A({0, 0, 0, 1}, 1.0);
  const double bb2 = brute_sigma_B({0, 0, 1}, uniform3.eta2(), m4);
  const double bb4 = brute_sigma_B({0, 0, 0, 0, 1}, uniform3.eta2(), m4);
  auto close = [](double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); };
  r.passed = close(a3, 36.0) && close(b2, 0.8) && close(b4, 67.2) && close(a3, ba3) && close(b2, bb2) &&
             close(b4, bb4);
  r.detail = "sigma_A(x^3)=" + fmt(a3) + " sigma_B(x^2)=" + fmt(b2) + " sigma_B(x^4)=" + fmt(b4) +
             " (brute " + fmt(ba3) + ", " + fmt(bb2) + ", " + fmt(bb4) + ")";
  return r;
}

inline CriterionResult case_a(int workers) {
  CriterionResult r{7, "case A CLT", true, {}, 0};
  struct Leg {
    const char* label;
    AnalyticSeries f;
    long N;
    double sigma2;
    std::uint64_t seed;
  };
  const std::vector<Leg> legs{{"x", AnalyticSeries::polynomial({0, 1}, "x"), 100000, 1.0, 7001},
                              {"x^3", AnalyticSeries::polynomial({0, 0, 0, 1}, "x^3"), 50000, 36.0, 7002}};
  for (const auto& leg : legs) {
    const auto res = run_ensemble(ensemble(0.3, rademacher, {leg.f}, {leg.N}, replicas, leg.seed, workers));
    const auto m = moments(res.at(0, 0).scaled);
    const double ratio = m.variance / leg.sigma2;
    const bool ok = std::fabs(ratio - 1.0) <= variance_band && normal_enough(m);
    r.passed = r.passed && ok;
    r.detail += std::string(leg.label) + ": var/sigma2=" + fmt(ratio) + " " + diagnostics(m) + "; ";
  }
  return r;
}

inline CriterionResult case_b(int workers) {
  CriterionResult r{8, "case B CLT", true, {}, 0};
  const auto f = AnalyticSeries::polynomial({0, 0, 1}, "x^2");
  const auto res = run_ensemble(ensemble(0.2, uniform3, {f}, {100000}, replicas, 8001, workers));
  const auto m = moments(res.at(0, 0).scaled);
  const double sigma2 = sigma_B(f, uniform3);
  const double ratio = m.variance / sigma2;
  const auto degenerate = run_ensemble(ensemble(0.2, rademacher, {f}, {100000}, replicas, 8002, workers));
  const double dvar = variance(degenerate.at(0, 0).scaled);
  r.passed = std::fabs(ratio - 1.0) <= variance_band && normal_enough(m) && dvar <= degenerate_limit;
  r.detail = "uniform: var/sigma2=" + fmt(ratio) + " " + diagnostics(m) + "; rademacher: var=" + fmt(dvar);
  return r;
}

inline CriterionResult joint_limit(int workers) {
  CriterionResult r{9, "joint limit correlation", true, {}, 0};
  const auto res = run_ensemble(ensemble(0.3, rademacher,
                                         {AnalyticSeries::polynomial({0, 1}, "x"),
                                          AnalyticSeries::polynomial({0, 0, 0, 1}, "x^3")},
                                         {50000}, replicas, 9001, workers));
  const auto corr = joint_correlation(res, 0);
  const auto rho = corr.values[0][1];
  r.passed = rho && *rho >= correlation_floor;
  r.detail = "corr(x, x^3)=" + (rho ? fmt(*rho) : std::string("undefined"));
  return r;
}

inline CriterionResult case_c(int workers) {
  CriterionResult r{10, "case C stabilization", true, {}, 0};
  const auto f = AnalyticSeries::polynomial({0, -6, 0, 1}, "x^3-6x").with_case(SeriesCase::C);
  const std::vector<long> grid{10000, 30000, 100000};
  const auto res = run_ensemble(ensemble(0.1, uniform3, {f}, grid, case_c_replicas, 10001, workers));
  const ScalingFunction naive(0.2);  // g_{2 alpha}
  std::vector<double> stable, cancelled;
  std::string text;
  bool normal = true;
  for (std::size_t n = 0; n < grid.size(); ++n) {
    const auto& s = res.at(0, n);
    const auto m = moments(s.scaled);
    stable.push_back(m.variance);
    cancelled.push_back(variance(s.centered) / naive(grid[n]));
    normal = normal && normal_enough(m);
    text += "N=" + std::to_string(grid[n]) + ": var=" + fmt(m.variance) + " g2a-var=" + fmt(cancelled.back()) +
            " " + diagnostics(m) + "; ";
  }
  const auto [lo, hi] = std::minmax_element(stable.begin(), stable.end());
  const double spread = *hi / *lo - 1.0;
  bool decreasing = true;
  for (std::size_t i = 1; i < cancelled.size(); ++i) decreasing = decreasing && cancelled[i] < cancelled[i - 1];
  const double drop = cancelled.back() / cancelled.front();
  r.passed = spread < stabilization_band && decreasing && drop <= cancellation_ratio;
  r.detail = text + "spread=" + fmt(spread) + " g2a drop=" + fmt(drop) + (normal ? "" : " (normality not asserted)");
  return r;
}

inline CriterionResult convergence(int workers) {
  CriterionResult r{11, "convergence regime", true, {}, 0};
  auto cfg = ensemble(0.8, rademacher, {AnalyticSeries::polynomial({0, 1}, "x")}, {20000, 100000},
                      convergence_replicas, 11001, workers);
  const auto report = convergence_check(run_ensemble(cfg));
  const auto& step = report.steps.front();
  const double bound = convergence_factor * rademacher.eta2() * zeta_tail(20000, 1.6);
  r.passed = report.converges && step.variance <= bound;
  r.detail = "Var(diff)=" + fmt(step.variance) + " bound=" + fmt(bound) + " ratio=" + fmt(step.variance / bound);
  return r;
}

inline CriterionResult remainder_cauchy() {
  CriterionResult r{12, "remainder convergence", true, {}, 0};
  const auto f = AnalyticSeries::polynomial({0, 0, 1, 0, 1}, "x^4+x^2");
  std::vector<double> values;
  for (long N : {1000L, 10000L, 100000L}) values.push_back(analytic_expansion(f, N, 0.26, rademacher).remainder);
  const double g1 = std::fabs(values[1] - values[0]);
  const double g2 = std::fabs(values[2] - values[1]);
  r.passed = g2 * gap_shrink <= g1;
  r.detail = "C_N=" + fmt(values[0]) + ", " + fmt(values[1]) + ", " + fmt(values[2]) + "; gaps " + fmt(g1) + ", " +
             fmt(g2) + " (shrink " + fmt(g1 / g2) + "x)";
  return r;
}

}  // namespace acceptance

inline constexpr int acceptance_count = 12;

/// Runs the selected criteria (all when empty), calling `report` after each.
inline std::vector<CriterionResult> run_acceptance(const std::set<int>& only = {}, int workers = 0,
                                                   const std::function<void(const CriterionResult&)>& report = {}) {
  using namespace acceptance;
  const std::vector<std::function<CriterionResult()>> criteria{
      closed_forms,
      weight_bounds,
      interior_identity,
      decomposition_identity,
      numeric_kernels,
      sigma_values,
      [workers] { return case_a(workers); },
      [workers] { return case_b(workers); },
      [workers] { return joint_limit(workers); },
      [workers] { return case_c(workers); },
      [workers] { return convergence(workers); },
      remainder_cauchy,
  };
  const std::vector<double> time_limits{60, 60, 300, 600, 600, 600, 900, 900, 900, 900, 900, 600};
  for (int id : only) {
    if (id < 1 || id > acceptance_count) throw std::invalid_argument("no acceptance criterion #" + std::to_string(id));
  }
  std::vector<CriterionResult> out;
  for (int id = 1; id <= acceptance_count; ++id) {
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    CriterionResult result;
    try {
      result = criteria[static_cast<std::size_t>(id - 1)]();
    } catch (const std::exception& e) {
      result = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0};
    }
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (result.seconds > time_limits[static_cast<std::size_t>(id - 1)]) {
      result.passed = false;
      result.detail += " (exceeded " + fmt(time_limits[static_cast<std::size_t>(id - 1)]) + " s)";
    }
    if (report) report(result);
    out.push_back(std::move(result));
  }
  return out;
}

inline std::string format_result(const CriterionResult& r) {
  return std::string(r.passed ? "PASS" : "FAIL") + " #" + std::to_string(r.id) + " " + r.name + ": " + r.detail +
         " [" + acceptance::fmt(r.seconds) + " s]";
}

}  // namespace rsfluct
