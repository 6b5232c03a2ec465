#pragma once

// Ensembles of Tr f(H_N) over independent potentials, their scaled
// fluctuations, and the limiting variances they are compared against.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "rsfluct/analytic_series.hpp"
#include "rsfluct/combinatorics.hpp"
#include "rsfluct/distribution.hpp"
#include "rsfluct/expansion.hpp"
#include "rsfluct/numeric.hpp"
#include "rsfluct/potential.hpp"
#include "rsfluct/statistics.hpp"
#include "rsfluct/tridiagonal.hpp"

namespace rsfluct {

/// g_t(N) = N^{1-t}/(1-t) for t < 1, log N for t = 1.
class ScalingFunction {
 public:
  explicit ScalingFunction(double t) : t_(t) {
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("scaling exponent t must lie in (0, 1]");
  }

  double t() const noexcept { return t_; }

  double operator()(long N) const {
    if (N < 2) throw std::invalid_argument("g_t(N) needs N >= 2");
    const double n = static_cast<double>(N);
    if (std::fabs(1.0 - t_) < 1e-12) return std::log(n);
    return std::pow(n, 1.0 - t_) / (1.0 - t_);
  }

 private:
  double t_;
};

/// Seed of replica r, shared by every N in the grid.
inline std::uint64_t replica_seed(std::uint64_t base, std::uint64_t replica) {
  return counter_bits(mix64(base), replica);
}

struct EnsembleConfig {
  double alpha = 0.3;
  DistributionSpec dist = DistributionSpec::rademacher();
  std::vector<AnalyticSeries> functions;
  std::vector<long> n_grid;
  int replicas = 0;
  std::uint64_t seed = 1;
  int workers = 0;  // 0 = hardware concurrency
  double tail_tol = 1e-9;
  bool coupled = true;  // same potential prefix for every N of a replica
};

struct SeriesSamples {
  std::string f_id;
  long N = 0;
  int degree = 0;
  double tail_bound = 0.0;
  double center = 0.0;  // exact E[Tr f(H_N)]
  double scale = 0.0;   // sqrt(g_t(N)); 0 when no scaling applies
  std::vector<double> raw;
  std::vector<double> centered;
  std::vector<double> scaled;  // empty unless alpha <= alpha_c
};

struct EnsembleResult {
  EnsembleConfig config;
  SeriesCase regime = SeriesCase::A;
  double alpha_c = 0.5;
  std::optional<double> t;  // alpha / alpha_c when scaling applies
  bool prefix_coupled = true;
  std::vector<SeriesSamples> series;  // function-major, then N in grid order

  const SeriesSamples& at(std::size_t f, std::size_t n) const {
    return series.at(f * config.n_grid.size() + n);
  }
};

namespace detail {

inline SeriesCase common_regime(const std::vector<AnalyticSeries>& functions) {
  if (functions.empty()) throw std::invalid_argument("ensemble needs at least one function");
  const SeriesCase first = functions.front().regime();
  for (const auto& f : functions) {
    if (f.regime() != first) {
      throw std::invalid_argument(std::string("case tags differ across functions: ") + to_string(first) + " (" +
                                  functions.front().id() + ") vs " + to_string(f.regime()) + " (" + f.id() + ")");
    }
  }
  return first;
}

inline int resolve_workers(int requested) {
  if (requested < 0) throw std::invalid_argument("workers must be >= 0");
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs body(i) for i in [0, count) on `workers` threads; rethrows the first error.
template <class Body>
void parallel_for(int count, int workers, Body body) {
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto run = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  const int n = std::min(workers, std::max(count, 1));
  std::vector<std::thread> threads;
  for (int w = 1; w < n; ++w) threads.emplace_back(run);
  run();
  for (auto& th : threads) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace detail

/// Samples Tr f(H_N) for every (f, N), centers at the exact mean and, when
/// alpha <= alpha_c, divides by sqrt(g_{alpha/alpha_c}(N)). Output does not
/// depend on the number of workers.
inline EnsembleResult run_ensemble(const EnsembleConfig& config) {
  if (!(config.alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (config.replicas < 0) throw std::invalid_argument("replicas must be >= 0");
  if (config.n_grid.empty()) throw std::invalid_argument("N grid is empty");
  for (long N : config.n_grid) {
    if (N < 2 || N > std::numeric_limits<int>::max()) throw std::invalid_argument("N must lie in [2, 2^31)");
  }
  EnsembleResult result;
  result.config = config;
  result.regime = detail::common_regime(config.functions);
  result.alpha_c = critical_alpha(result.regime);
  result.prefix_coupled = config.coupled;
  if (config.alpha <= result.alpha_c * (1.0 + 1e-12)) result.t = std::min(1.0, config.alpha / result.alpha_c);

  const std::size_t nf = config.functions.size();
  const std::size_t nn = config.n_grid.size();
  const auto M = static_cast<std::size_t>(config.replicas);
  result.series.resize(nf * nn);
  std::vector<int> max_degree(nn, 0);
  for (std::size_t f = 0; f < nf; ++f) {
    const auto& fn = config.functions[f];
    check_radius(fn, config.dist.bound());
    for (std::size_t n = 0; n < nn; ++n) {
      const long N = config.n_grid[n];
      const auto trunc = choose_truncation(fn, 2.0 + config.dist.bound(), static_cast<double>(N), config.tail_tol,
                                           default_max_series_degree);
      auto& s = result.series[f * nn + n];
      s.f_id = fn.id();
      s.N = N;
      s.degree = trunc.degree;
      s.tail_bound = trunc.tail_bound;
      s.center = exact_mean_trace_f(fn, N, config.alpha, config.dist, config.tail_tol);
      s.scale = result.t ? std::sqrt(ScalingFunction(*result.t)(N)) : 0.0;
      s.raw.assign(M, 0.0);
      max_degree[n] = std::max(max_degree[n], trunc.degree);
    }
  }

  const long n_max = *std::max_element(config.n_grid.begin(), config.n_grid.end());
  std::vector<double> weights(static_cast<std::size_t>(n_max));
  for (long n = 1; n <= n_max; ++n) {
    weights[static_cast<std::size_t>(n - 1)] = std::pow(static_cast<double>(n), -config.alpha);
  }

  detail::parallel_for(config.replicas, detail::resolve_workers(config.workers), [&](int r) {
    const std::uint64_t seed = replica_seed(config.seed, static_cast<std::uint64_t>(r));
    std::vector<double> potential;
    auto fill = [&](std::uint64_t key, long N) {
      potential.resize(static_cast<std::size_t>(N));
      for (long n = 1; n <= N; ++n) {
        potential[static_cast<std::size_t>(n - 1)] =
            site_variable(config.dist, key, n) * weights[static_cast<std::size_t>(n - 1)];
      }
    };
    if (config.coupled) fill(seed, n_max);
    for (std::size_t n = 0; n < nn; ++n) {
      const long N = config.n_grid[n];
      if (!config.coupled) fill(counter_bits(seed, static_cast<std::uint64_t>(N)), N);
      const auto traces =
          trace_moments(std::span<const double>(potential.data(), static_cast<std::size_t>(N)), max_degree[n]);
      for (std::size_t f = 0; f < nf; ++f) {
        auto& s = result.series[f * nn + n];
        s.raw[static_cast<std::size_t>(r)] = apply_series(config.functions[f], traces, s.degree);
      }
    }
  });

  for (auto& s : result.series) {
    s.centered.resize(M);
    for (std::size_t r = 0; r < M; ++r) s.centered[r] = s.raw[r] - s.center;
    if (result.t) {
      s.scaled.resize(M);
      for (std::size_t r = 0; r < M; ++r) s.scaled[r] = s.centered[r] / s.scale;
    }
  }
  return result;
}

inline constexpr double default_sigma_tol = 1e-12;

/// sigma_A(f)^2 = (sum_j c_{2j+1} p^{2j+1}(delta))^2 eta^2.
inline double sigma_A(const AnalyticSeries& f, const DistributionSpec& dist, double tol = default_sigma_tol) {
  const int last = f.scan_limit();
  NeumaierSum sum;
  double last_term = 0.0;
  for (int j = 1; j <= last; j += 2) {
    const double c = f.coefficient(j);
    if (c == 0.0) continue;
    last_term = c * p_delta_closed(j).convert_to<double>();
    sum.add(last_term);
  }
  if (!f.is_polynomial() && !(std::fabs(last_term) <= tol)) {
    throw std::invalid_argument("sigma_A: series '" + f.id() + "' terms c_j p^j(delta) do not decay to " +
                                std::to_string(tol) + " by order " + std::to_string(last));
  }
  const double s = sum.value();
  return s * s * dist.eta2();
}

/// Highest order whose term can matter in the case B sums.
inline int sigma_b_degree(const AnalyticSeries& f, double tol = default_sigma_tol) {
  if (f.is_polynomial()) return *f.degree();
  const int last = f.scan_limit();
  int K = 0;
  for (int j = 2; j <= last; j += 2) {
    const double c = f.coefficient(j);
    if (c != 0.0 && std::fabs(c) * j * std::pow(2.0, j) > tol) K = j;
  }
  if (K >= last - 1) {
    throw std::invalid_argument("sigma_B: series '" + f.id() + "' tail not summable at tolerance");
  }
  return K;
}

/// sigma_B(f)^2 = (sum_j c_j p^j(2 delta))^2 (E X^4 - eta^4)
///              + sum_{s>=1} (sum_j c_j p^j(delta + delta^s))^2 eta^4.
inline double sigma_B(const AnalyticSeries& f, const DistributionSpec& dist, std::optional<int> s_max = std::nullopt,
                      double tol = default_sigma_tol) {
  if (f.regime() != SeriesCase::B) {
    throw std::invalid_argument(std::string("sigma_B: series '") + f.id() + "' is case " + to_string(f.regime()) +
                                ", not B");
  }
  const int K = sigma_b_degree(f, tol);
  const int needed = std::max(1, (K - 2) / 2 + 1);
  const int smax = s_max.value_or(needed);
  if (smax < needed) {
    throw std::invalid_argument("sigma_B: s_max = " + std::to_string(smax) + " < " + std::to_string(needed) +
                                " required for truncation degree " + std::to_string(K));
  }
  NeumaierSum diag;
  for (int j = 2; j <= K; j += 2) {
    const double c = f.coefficient(j);
    if (c != 0.0) diag.add(c * p_twodelta_closed(j).convert_to<double>());
  }
  const double eta2 = dist.eta2();
  NeumaierSum total;
  total.add(diag.value() * diag.value() * (dist.fourth_moment() - eta2 * eta2));
  for (int s = 1; s <= smax; ++s) {
    NeumaierSum pair;
    for (int j = 2 * s + 2; j <= K; j += 2) {
      const double c = f.coefficient(j);
      if (c != 0.0) pair.add(c * count_two_flats(j, s).convert_to<double>());
    }
    total.add(pair.value() * pair.value() * eta2 * eta2);
  }
  return total.value();
}

/// sigma^2 of the declared regime, or nullopt for case C (no closed form).
inline std::optional<double> sigma_theory(const AnalyticSeries& f, const DistributionSpec& dist) {
  switch (f.regime()) {
    case SeriesCase::A: return sigma_A(f, dist);
    case SeriesCase::B: return sigma_B(f, dist);
    default: return std::nullopt;
  }
}

inline constexpr std::size_t min_clt_replicas = 100;
inline constexpr double degenerate_variance = 1e-12;

struct CltEntry {
  std::string f_id;
  long N = 0;
  double variance = 0.0;
  std::optional<double> sigma2;
  std::optional<double> ratio;  // variance / sigma2
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
  std::optional<double> ks;
  MomentIntervals intervals;
  bool degenerate = false;  // zero theoretical or empirical variance
};

struct CltReport {
  std::vector<CltEntry> entries;  // same order as EnsembleResult::series
};

/// Moment diagnostics of the scaled samples against the theoretical variance.
inline CltReport clt_check(const EnsembleResult& result, const std::map<std::string, double>& sigma2) {
  if (!result.t) throw std::invalid_argument("clt_check: alpha exceeds alpha_c, no scaled samples");
  if (static_cast<std::size_t>(result.config.replicas) < min_clt_replicas) {
    throw std::invalid_argument("clt_check needs at least " + std::to_string(min_clt_replicas) + " replicas");
  }
  CltReport report;
  for (const auto& s : result.series) {
    CltEntry e;
    e.f_id = s.f_id;
    e.N = s.N;
    const auto m = moments(s.scaled);
    e.variance = m.variance;
    e.skewness = m.skewness;
    e.excess_kurtosis = m.excess_kurtosis;
    e.intervals = bootstrap_moments(s.scaled);
    if (const auto it = sigma2.find(s.f_id); it != sigma2.end()) {
      e.sigma2 = it->second;
      if (it->second > 0.0) e.ratio = m.variance / it->second;
    }
    e.degenerate = m.variance <= degenerate_variance || (e.sigma2 && *e.sigma2 == 0.0);
    if (m.variance > 0.0) e.ks = ks_distance_normal(s.scaled, m.mean, std::sqrt(m.variance));
    report.entries.push_back(std::move(e));
  }
  return report;
}

struct CorrelationMatrix {
  long N = 0;
  std::vector<std::string> ids;
  std::vector<std::vector<std::optional<double>>> values;  // nullopt: zero-variance column
};

/// Pearson correlations of the scaled fluctuations at grid index n.
inline CorrelationMatrix joint_correlation(const EnsembleResult& result, std::size_t n) {
  const std::size_t nf = result.config.functions.size();
  if (nf < 2) throw std::invalid_argument("joint_correlation needs at least two functions");
  if (!result.t) throw std::invalid_argument("joint_correlation: alpha exceeds alpha_c, no scaled samples");
  if (result.config.replicas < 2) throw std::invalid_argument("joint_correlation needs at least two replicas");
  CorrelationMatrix out;
  out.N = result.config.n_grid.at(n);
  out.values.assign(nf, std::vector<std::optional<double>>(nf));
  for (std::size_t a = 0; a < nf; ++a) {
    out.ids.push_back(result.at(a, n).f_id);
    for (std::size_t b = a; b < nf; ++b) {
      const auto r = a == b ? (variance(result.at(a, n).scaled) > 0.0 ? std::optional<double>(1.0) : std::nullopt)
                            : pearson(result.at(a, n).scaled, result.at(b, n).scaled);
      out.values[a][b] = out.values[b][a] = r;
    }
  }
  return out;
}

/// sum_{n > N} n^{-s} by Euler-Maclaurin; infinite for s <= 1.
inline double zeta_tail(long N, double s) {
  if (s <= 1.0) return std::numeric_limits<double>::infinity();
  if (N < 1) throw std::invalid_argument("zeta_tail needs N >= 1");
  if (N < 64) {
    NeumaierSum head;
    for (long n = N + 1; n <= 64; ++n) head.add(std::pow(static_cast<double>(n), -s));
    return head.value() + zeta_tail(64, s);
  }
  const double n = static_cast<double>(N);
  return std::pow(n, 1.0 - s) / (s - 1.0) - 0.5 * std::pow(n, -s) + s * std::pow(n, -s - 1.0) / 12.0 -
         s * (s + 1.0) * (s + 2.0) * std::pow(n, -s - 3.0) / 720.0;
}

struct ConvergenceStep {
  long n_small = 0;
  long n_large = 0;
  double variance = 0.0;                // Var(T_large - T_small) over replicas
  double q50 = 0.0, q90 = 0.0, q99 = 0.0, max_abs = 0.0;  // quantiles of |T_large - T_small|
  std::optional<double> variance_bound;  // const * sum_{n > n_small} n^{-2 alpha}
  std::optional<double> absolute_bound;  // deterministic, linear f only
};

struct ConvergenceReport {
  std::string f_id;
  bool converges = false;  // alpha > alpha_c
  std::vector<ConvergenceStep> steps;  // consecutive grid pairs, then first -> last
};

/// Unscaled fluctuations T_N = Tr f - E Tr f along the coupled grid.
inline ConvergenceReport convergence_check(const EnsembleResult& result, std::size_t f = 0) {
  if (!result.prefix_coupled) {
    throw std::invalid_argument("convergence_check needs prefix-coupled samples (same seed across N)");
  }
  const auto& cfg = result.config;
  if (cfg.replicas < 2) throw std::invalid_argument("convergence_check needs at least two replicas");
  if (cfg.n_grid.size() < 2) throw std::invalid_argument("convergence_check needs at least two grid sizes");
  const auto& fn = cfg.functions.at(f);
  ConvergenceReport report;
  report.f_id = fn.id();
  report.converges = cfg.alpha > result.alpha_c;

  std::optional<double> bound_constant;
  if (result.regime == SeriesCase::A) bound_constant = sigma_A(fn, cfg.dist);
  const bool linear = fn.is_polynomial() && *fn.degree() <= 1;

  auto step = [&](std::size_t a, std::size_t b) {
    const auto& small = result.at(f, a);
    const auto& large = result.at(f, b);
    ConvergenceStep s;
    s.n_small = small.N;
    s.n_large = large.N;
    std::vector<double> diff(small.centered.size());
    for (std::size_t r = 0; r < diff.size(); ++r) diff[r] = large.centered[r] - small.centered[r];
    s.variance = variance(diff);
    std::vector<double> abs_diff(diff.size());
    std::transform(diff.begin(), diff.end(), abs_diff.begin(), [](double v) { return std::fabs(v); });
    std::sort(abs_diff.begin(), abs_diff.end());
    auto quantile = [&](double q) {
      return abs_diff[static_cast<std::size_t>(std::floor(q * static_cast<double>(abs_diff.size() - 1)))];
    };
    s.q50 = quantile(0.5);
    s.q90 = quantile(0.9);
    s.q99 = quantile(0.99);
    s.max_abs = abs_diff.back();
    if (bound_constant) s.variance_bound = *bound_constant * zeta_tail(small.N, 2.0 * cfg.alpha);
    if (linear) {
      NeumaierSum tail;
      for (long n = large.N; n > small.N; --n) tail.add(std::pow(static_cast<double>(n), -cfg.alpha));
      s.absolute_bound = std::fabs(fn.coefficient(1)) * cfg.dist.bound() * tail.value();
    }
    return s;
  };
  const std::size_t nn = cfg.n_grid.size();
  for (std::size_t i = 0; i + 1 < nn; ++i) report.steps.push_back(step(i, i + 1));
  if (nn > 2) report.steps.push_back(step(0, nn - 1));
  return report;
}

}  // namespace rsfluct
