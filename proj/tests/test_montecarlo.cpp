#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "rsfluct/montecarlo.hpp"
#include "rsfluct/potential.hpp"

using namespace rsfluct;

namespace {

const auto rademacher = DistributionSpec::rademacher();
const auto uniform3 = DistributionSpec::uniform_symmetric(std::sqrt(3.0));

EnsembleConfig config(double alpha, std::vector<AnalyticSeries> fs, std::vector<long> grid, int M,
                      const DistributionSpec& dist = uniform3) {
  EnsembleConfig c;
  c.alpha = alpha;
  c.dist = dist;
  c.functions = std::move(fs);
  c.n_grid = std::move(grid);
  c.replicas = M;
  c.seed = 31;
  c.workers = 2;
  return c;
}

std::uint64_t raw_count(int k, const MultiIndex& beta) {
  const auto counts = oracle::profile_counts(k);
  const auto it = counts.find(beta);
  return it == counts.end() ? 0 : it->second;
}

// Test-side reference built from raw step strings.
double brute_sigma_A(const std::vector<double>& c, double eta2) {
  double s = 0.0;
  for (std::size_t j = 1; j < c.size(); j += 2) s += c[j] * static_cast<double>(raw_count(static_cast<int>(j), MultiIndex::delta()));
  return s * s * eta2;
}

double brute_sigma_B(const std::vector<double>& c, double eta2, double m4) {
  double diag = 0.0;
  for (std::size_t j = 2; j < c.size(); j += 2) diag += c[j] * static_cast<double>(raw_count(static_cast<int>(j), MultiIndex::single(2)));
  double total = diag * diag * (m4 - eta2 * eta2);
  for (int s = 1; s < static_cast<int>(c.size()); ++s) {
    double pair = 0.0;
    for (std::size_t j = 2; j < c.size(); j += 2) pair += c[j] * static_cast<double>(raw_count(static_cast<int>(j), MultiIndex::delta_pair(s)));
    total += pair * pair * eta2 * eta2;
  }
  return total;
}

}  // namespace

TEST(Scaling, Values) {
  EXPECT_NEAR(ScalingFunction(1.0)(1000), std::log(1000.0), 1e-14);
  EXPECT_NEAR(ScalingFunction(0.5)(100), 20.0, 1e-12);
  EXPECT_THROW(ScalingFunction(0.0), std::invalid_argument);
  EXPECT_THROW(ScalingFunction(1.5), std::invalid_argument);
  EXPECT_THROW(ScalingFunction(0.5)(1), std::invalid_argument);
}

TEST(Ensemble, ZeroReplicasIsValid) {
  const auto r = run_ensemble(config(0.3, {AnalyticSeries::polynomial({0, 1})}, {10, 20}, 0));
  ASSERT_EQ(r.series.size(), 2u);
  EXPECT_TRUE(r.series[0].raw.empty());
  EXPECT_TRUE(r.series[1].scaled.empty());
}

TEST(Ensemble, LinearFunctionIsExact) {
  const double alpha = 0.3;
  const auto r = run_ensemble(config(alpha, {AnalyticSeries::polynomial({0, 1})}, {100, 1000}, 50));
  ASSERT_TRUE(r.t);
  EXPECT_NEAR(*r.t, 0.6, 1e-15);
  const double g = std::pow(1000.0, 0.4) / 0.4;
  for (int i = 0; i < 50; ++i) {
    const auto s = sample_potential(1000, alpha, uniform3, replica_seed(31, static_cast<std::uint64_t>(i)));
    double sum = 0.0;
    for (double v : s.values) sum += v;
    const auto& samples = r.at(0, 1);
    EXPECT_NEAR(samples.raw[static_cast<std::size_t>(i)], sum, 1e-12);
    EXPECT_EQ(samples.center, 0.0);
    EXPECT_NEAR(samples.scaled[static_cast<std::size_t>(i)], sum / std::sqrt(g), 1e-12);
  }
}

TEST(Ensemble, PrefixCoupling) {
  const auto r = run_ensemble(config(0.4, {AnalyticSeries::polynomial({0, 1})}, {100, 1000}, 20));
  for (int i = 0; i < 20; ++i) {
    const auto s = sample_potential(100, 0.4, uniform3, replica_seed(31, static_cast<std::uint64_t>(i)));
    double sum = 0.0;
    for (double v : s.values) sum += v;
    EXPECT_NEAR(r.at(0, 0).raw[static_cast<std::size_t>(i)], sum, 1e-12);
  }
  auto uncoupled = config(0.4, {AnalyticSeries::polynomial({0, 1})}, {100, 1000}, 20);
  uncoupled.coupled = false;
  const auto u = run_ensemble(uncoupled);
  EXPECT_FALSE(u.prefix_coupled);
  EXPECT_NE(u.at(0, 0).raw, r.at(0, 0).raw);
  EXPECT_THROW(convergence_check(u), std::invalid_argument);
}

TEST(Ensemble, IndependentOfWorkerCount) {
  auto c = config(0.3, {AnalyticSeries::polynomial({0, 0, 1, 0, 1}), AnalyticSeries::polynomial({1, 0, 0.5, 0, 0, 0, 0.1})},
                  {50, 200}, 40);
  c.workers = 1;
  const auto one = run_ensemble(c);
  c.workers = 3;
  const auto three = run_ensemble(c);
  for (std::size_t i = 0; i < one.series.size(); ++i) EXPECT_EQ(one.series[i].raw, three.series[i].raw);
}

TEST(Ensemble, MixedRegimesRejected) {
  EXPECT_THROW(run_ensemble(config(0.3, {AnalyticSeries::polynomial({0, 1}), AnalyticSeries::polynomial({0, 0, 1})},
                                   {50}, 10)),
               std::invalid_argument);
}

TEST(Ensemble, NoScalingAboveCriticalExponent) {
  const auto r = run_ensemble(config(0.7, {AnalyticSeries::polynomial({0, 1})}, {50}, 10));
  EXPECT_FALSE(r.t);
  EXPECT_TRUE(r.series[0].scaled.empty());
  EXPECT_EQ(r.series[0].centered.size(), 10u);
}

TEST(Sigma, CaseAExamples) {
  EXPECT_NEAR(sigma_A(AnalyticSeries::polynomial({0, 1}), uniform3), 1.0, 1e-15);
  EXPECT_NEAR(sigma_A(AnalyticSeries::polynomial({0, 0, 0, 1}), uniform3), 36.0, 1e-13);
  EXPECT_EQ(sigma_A(AnalyticSeries::polynomial({0, -6, 0, 1}), uniform3), 0.0);
}

TEST(Sigma, CaseBExamples) {
  EXPECT_NEAR(sigma_B(AnalyticSeries::polynomial({0, 0, 1}), uniform3), 0.8, 1e-14);
  EXPECT_EQ(sigma_B(AnalyticSeries::polynomial({0, 0, 1}), rademacher), 0.0);
  EXPECT_NEAR(sigma_B(AnalyticSeries::polynomial({0, 0, 0, 0, 1}), uniform3), 67.2, 1e-12);
  EXPECT_THROW(sigma_B(AnalyticSeries::polynomial({0, 1}), uniform3), std::invalid_argument);
  EXPECT_THROW(sigma_B(AnalyticSeries::polynomial({0, 0, 0, 0, 0, 0, 0, 0, 1}), uniform3, 2), std::invalid_argument);
}

TEST(Sigma, AgreesWithRawPathCounts) {
  for (int j = 1; j <= 11; j += 2) {
    std::vector<double> c(static_cast<std::size_t>(j + 1), 0.0);
    c.back() = 1.0;
    c[1] = 0.5;
    EXPECT_NEAR(sigma_A(AnalyticSeries::polynomial(c), uniform3), brute_sigma_A(c, 1.0), 1e-9 * brute_sigma_A(c, 1.0));
  }
  for (int j = 2; j <= 12; j += 2) {
    std::vector<double> c(static_cast<std::size_t>(j + 1), 0.0);
    c.back() = 1.0;
    c[2] = -0.25;
    const auto f = AnalyticSeries::polynomial(c);
    if (f.regime() != SeriesCase::B) continue;
    const double expected = brute_sigma_B(c, 1.0, 1.8);
    EXPECT_NEAR(sigma_B(f, uniform3), expected, 1e-9 * expected) << j;
  }
}

TEST(Sigma, NonDecayingSeriesRejected) {
  const auto f = AnalyticSeries::from_generator([](int j) { return j % 2 ? 1.0 / j : 0.0; }, 1e300, "slow");
  EXPECT_THROW(sigma_A(f, uniform3), std::invalid_argument);
}

TEST(Clt, NormalSelfTest) {
  EnsembleResult r;
  r.config = config(0.3, {AnalyticSeries::polynomial({0, 1})}, {10}, 10000);
  r.t = 0.6;
  SeriesSamples s;
  s.f_id = "z";
  s.N = 10;
  s.scaled = oracle::normals(10000, 4);
  r.series.push_back(s);
  const auto report = clt_check(r, {{"z", 1.0}});
  ASSERT_EQ(report.entries.size(), 1u);
  const auto& e = report.entries[0];
  EXPECT_NEAR(*e.ratio, 1.0, 0.05);
  EXPECT_LT(std::fabs(e.skewness), 0.08);
  EXPECT_LT(std::fabs(e.excess_kurtosis), 0.15);
  EXPECT_LT(*e.ks, 0.02);
  EXPECT_TRUE(e.intervals.variance.contains(e.variance));
  EXPECT_FALSE(e.degenerate);
}

TEST(Clt, DegenerateAndGuards) {
  const auto r = run_ensemble(config(0.2, {AnalyticSeries::polynomial({0, 0, 1})}, {100}, 120, rademacher));
  const auto report = clt_check(r, {{r.series[0].f_id, 0.0}});
  EXPECT_TRUE(report.entries[0].degenerate);
  EXPECT_FALSE(report.entries[0].ratio);

  const auto small = run_ensemble(config(0.2, {AnalyticSeries::polynomial({0, 1})}, {100}, 50));
  EXPECT_THROW(clt_check(small, {}), std::invalid_argument);
  const auto high = run_ensemble(config(0.8, {AnalyticSeries::polynomial({0, 1})}, {100}, 200));
  EXPECT_THROW(clt_check(high, {}), std::invalid_argument);
}

TEST(Correlation, ScaledCopyAndZeroVariance) {
  const auto r = run_ensemble(config(0.3, {AnalyticSeries::polynomial({0, 1}), AnalyticSeries::polynomial({0, 2})},
                                     {200}, 100));
  const auto m = joint_correlation(r, 0);
  EXPECT_NEAR(*m.values[0][1], 1.0, 1e-12);
  EXPECT_EQ(*m.values[0][0], 1.0);

  EnsembleResult flat = r;
  flat.series[1].scaled.assign(100, 0.5);
  const auto z = joint_correlation(flat, 0);
  EXPECT_FALSE(z.values[0][1]);
  EXPECT_FALSE(z.values[1][1]);
  EXPECT_THROW(joint_correlation(run_ensemble(config(0.3, {AnalyticSeries::polynomial({0, 1})}, {200}, 10)), 0),
               std::invalid_argument);
}

TEST(Convergence, ZetaTail) {
  EXPECT_NEAR(zeta_tail(10, 2.0), 0.095166335681685746, 1e-12);
  EXPECT_NEAR(zeta_tail(1000, 1.6), 0.026406964188246826, 1e-13);
  EXPECT_NEAR(zeta_tail(70, 1.04), 21.086878347013264, 1e-9);
  EXPECT_TRUE(std::isinf(zeta_tail(10, 1.0)));
}

TEST(Convergence, DeterministicBoundForLinearF) {
  const auto r = run_ensemble(config(2.0, {AnalyticSeries::polynomial({0, 1})}, {10, 100, 1000}, 200));
  const auto report = convergence_check(r);
  EXPECT_TRUE(report.converges);
  ASSERT_EQ(report.steps.size(), 3u);
  for (const auto& s : report.steps) {
    ASSERT_TRUE(s.absolute_bound);
    EXPECT_LE(s.max_abs, *s.absolute_bound);
    EXPECT_LE(s.q50, s.q90);
    EXPECT_LE(s.q99, s.max_abs);
  }
  EXPECT_EQ(report.steps[2].n_small, 10);
  EXPECT_EQ(report.steps[2].n_large, 1000);
}

TEST(Convergence, VarianceBound) {
  const auto r = run_ensemble(config(0.8, {AnalyticSeries::polynomial({0, 1})}, {20000, 100000}, 300));
  const auto report = convergence_check(r);
  ASSERT_TRUE(report.steps[0].variance_bound);
  EXPECT_NEAR(*report.steps[0].variance_bound, zeta_tail(20000, 1.6), 1e-15);
  EXPECT_LE(report.steps[0].variance, 1.5 * *report.steps[0].variance_bound);
  EXPECT_GT(report.steps[0].variance, 0.5 * *report.steps[0].variance_bound);
}

TEST(Convergence, FlagsDivergentRegime) {
  const auto r = run_ensemble(config(0.4, {AnalyticSeries::polynomial({0, 1})}, {10, 1000}, 100));
  const auto report = convergence_check(r);
  EXPECT_FALSE(report.converges);
  EXPECT_TRUE(std::isinf(*report.steps[0].variance_bound));
}

TEST(Statistics, Basics) {
  const std::vector<double> x{1, 2, 3, 4};
  EXPECT_EQ(mean(x), 2.5);
  EXPECT_NEAR(variance(x), 5.0 / 3.0, 1e-15);
  const auto m = moments(x);
  EXPECT_NEAR(m.skewness, 0.0, 1e-15);
  EXPECT_NEAR(m.excess_kurtosis, 1.64 - 3.0, 1e-14);
  EXPECT_NEAR(normal_cdf(0.0), 0.5, 1e-16);
  EXPECT_EQ(bootstrap_moments(x, 50).variance.lo, bootstrap_moments(x, 50).variance.lo);
  EXPECT_THROW(ks_distance_normal(x, 0.0, 0.0), std::invalid_argument);
}
