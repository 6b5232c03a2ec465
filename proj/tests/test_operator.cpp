#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "rsfluct/analytic_series.hpp"
#include "rsfluct/potential.hpp"
#include "rsfluct/tridiagonal.hpp"

using namespace rsfluct;

namespace {
const auto rademacher = DistributionSpec::rademacher();
const auto uniform3 = DistributionSpec::uniform_symmetric(std::sqrt(3.0));
}  // namespace

TEST(Distribution, ParseAndMoments) {
  EXPECT_EQ(DistributionSpec::parse("rademacher").kind(), DistributionSpec::Kind::rademacher);
  const auto u = DistributionSpec::parse("uniform:sqrt3");
  EXPECT_NEAR(u.eta2(), 1.0, 1e-15);
  EXPECT_NEAR(u.fourth_moment(), 1.8, 1e-14);
  EXPECT_NEAR(DistributionSpec::parse("uniform:2").eta2(), 4.0 / 3.0, 1e-15);
  const auto tp = DistributionSpec::parse("twopoint:-1,2");
  EXPECT_NEAR(tp.moment(1), 0.0, 1e-15);
  EXPECT_NEAR(tp.eta2(), 2.0, 1e-14);
  EXPECT_THROW(DistributionSpec::parse("gauss"), std::invalid_argument);
  EXPECT_THROW(DistributionSpec::parse("uniform:-1"), std::invalid_argument);
  EXPECT_THROW(DistributionSpec::parse("uniform:x"), std::invalid_argument);
}

TEST(Potential, RademacherSupport) {
  const auto s = sample_potential(200, 0.3, rademacher, 42);
  for (int n = 1; n <= 200; ++n) {
    EXPECT_DOUBLE_EQ(std::fabs(s.values[static_cast<std::size_t>(n - 1)]), std::pow(n, -0.3));
  }
}

TEST(Potential, PrefixStable) {
  const auto small = sample_potential(100, 0.4, uniform3, 9);
  const auto large = sample_potential(1000, 0.4, uniform3, 9);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(small.values[i], large.values[i]);
  const auto other = sample_potential(100, 0.4, uniform3, 10);
  EXPECT_NE(small.values, other.values);
}

TEST(Potential, UniformMoments) {
  const int n = 1000000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 1; i <= n; ++i) {
    const double x = site_variable(uniform3, 77, i);
    EXPECT_LE(std::fabs(x), std::sqrt(3.0));
    m1 += x;
    m2 += x * x;
  }
  EXPECT_NEAR(m1 / n, 0.0, 0.005);
  EXPECT_NEAR(m2 / n, 1.0, 0.01);
}

TEST(Potential, RejectsBadArguments) {
  EXPECT_THROW(sample_potential(0, 0.3, rademacher, 1), std::invalid_argument);
  EXPECT_THROW(sample_potential(10, -0.3, rademacher, 1), std::invalid_argument);
}

TEST(TraceMoments, FreeLaplacian) {
  const auto t = trace_moments(std::vector<double>(10, 0.0), 4);
  EXPECT_EQ(t[0], 10.0);
  EXPECT_EQ(t[1], 0.0);
  EXPECT_EQ(t[2], 18.0);
  EXPECT_EQ(t[3], 0.0);
  EXPECT_EQ(t[4], 50.0);
}

TEST(TraceMoments, SingleSite) {
  const std::vector<double> v{0.7};
  const auto t = trace_moments(v, 6);
  for (int j = 0; j <= 6; ++j) EXPECT_NEAR(t[static_cast<std::size_t>(j)], std::pow(0.7, j), 1e-15);
}

TEST(TraceMoments, MatchDensePowers) {
  for (int N : {2, 5, 13, 30}) {
    const auto s = sample_potential(N, 0.25, uniform3, 3);
    const auto dense = oracle::dense_traces(s.values, 12);
    const auto banded = trace_moments(s, 12);
    for (int k = 0; k <= 12; ++k) {
      EXPECT_NEAR(banded[static_cast<std::size_t>(k)], dense[static_cast<std::size_t>(k)],
                  1e-11 * std::max(1.0, std::fabs(dense[static_cast<std::size_t>(k)])))
          << "N=" << N << " k=" << k;
    }
  }
}

TEST(TraceMoments, MatchEigenvaluePowerSums) {
  const auto s = sample_potential(500, 0.3, rademacher, 11);
  const auto t = trace_moments(s, 10);
  const auto ev = eigenvalues(s);
  for (int k = 1; k <= 10; ++k) {
    NeumaierSum sum;
    for (double l : ev) sum.add(std::pow(l, k));
    EXPECT_NEAR(sum.value(), t[static_cast<std::size_t>(k)], 1e-8 * std::max(1.0, std::fabs(t[k])));
  }
}

TEST(TraceMoments, OverflowGuard) {
  const std::vector<double> huge(20, 1e40);
  EXPECT_THROW(trace_moments(huge, 9), std::overflow_error);
  EXPECT_THROW(trace_moments(huge, -1), std::invalid_argument);
}

TEST(Eigenvalues, FreeSpectrum) {
  const int N = 1000;
  const auto ev = eigenvalues(std::vector<double>(N, 0.0));
  for (int j = 1; j <= N; ++j) {
    EXPECT_NEAR(ev[static_cast<std::size_t>(N - j)], 2.0 * std::cos(j * std::numbers::pi / (N + 1)), 1e-8);
  }
}

TEST(Eigenvalues, SingleSiteAndInclusion) {
  EXPECT_EQ(eigenvalues(std::vector<double>{-0.25}), std::vector<double>{-0.25});
  for (const auto& dist : {rademacher, uniform3}) {
    const auto s = sample_potential(300, 0.1, dist, 5);
    const auto ev = eigenvalues(s);
    EXPECT_TRUE(std::is_sorted(ev.begin(), ev.end()));
    EXPECT_GE(ev.front(), -2.0 - dist.bound());
    EXPECT_LE(ev.back(), 2.0 + dist.bound());
  }
}

TEST(Eigenvalues, SturmCountsAreMonotone) {
  const auto s = sample_potential(50, 0.5, uniform3, 8);
  std::size_t last = 0;
  for (double x = -5.0; x <= 5.0; x += 0.25) {
    const auto c = sturm_count(s.values, x);
    EXPECT_GE(c, last);
    last = c;
  }
  EXPECT_EQ(last, 50u);
}

TEST(Series, ClassifiesCases) {
  EXPECT_EQ(AnalyticSeries::polynomial({0, 1}).case_tag(), SeriesCase::A);
  EXPECT_EQ(AnalyticSeries::polynomial({0, 0, 0, 1}).case_tag(), SeriesCase::A);
  EXPECT_EQ(AnalyticSeries::polynomial({0, 0, 1, 0, 1}).case_tag(), SeriesCase::B);
  EXPECT_EQ(AnalyticSeries::polynomial({0, -6, 0, 1}).case_tag(), SeriesCase::C);
  EXPECT_EQ(AnalyticSeries::exponential(0.5).case_tag(), SeriesCase::A);
  // x^5 normal form: p^3(delta) = 6, p^5(delta) = 30
  EXPECT_EQ(AnalyticSeries::polynomial({0, -36, 0, 1, 0, 1}).case_tag(), SeriesCase::C);
}

TEST(Series, DeclaredCaseIsValidated) {
  const auto odd = AnalyticSeries::polynomial({0, -6, 0, 1});
  EXPECT_EQ(odd.with_case(SeriesCase::C).case_tag(), SeriesCase::C);
  EXPECT_THROW(AnalyticSeries::polynomial({0, -5, 0, 1}).with_case(SeriesCase::C), std::invalid_argument);
  EXPECT_THROW(AnalyticSeries::polynomial({1, -6, 0, 1}).with_case(SeriesCase::C), std::invalid_argument);
  EXPECT_THROW(AnalyticSeries::polynomial({0, 1, 1}).with_case(SeriesCase::B), std::invalid_argument);
  EXPECT_THROW(AnalyticSeries::exponential(1.0).with_case(SeriesCase::polynomial), std::invalid_argument);
}

TEST(Series, Parse) {
  const auto f = parse_series("poly:0,-6,0,1");
  EXPECT_EQ(f.degree(), 3);
  EXPECT_EQ(f.coefficient(1), -6.0);
  EXPECT_EQ(f.id(), "poly:0,-6,0,1");
  EXPECT_NEAR(parse_series("exp:0.5").coefficient(3), 0.125 / 6.0, 1e-17);
  for (const char* bad : {"x^2", "poly:", "poly:1,,2", "poly:1,a", "sin:1"}) {
    EXPECT_THROW(parse_series(bad), std::invalid_argument) << bad;
  }
  EXPECT_EQ(parse_series_case("C"), SeriesCase::C);
  EXPECT_THROW(parse_series_case("D"), std::invalid_argument);
}

TEST(Series, TruncationPolicy) {
  const auto poly = AnalyticSeries::polynomial({1, 2, 3});
  EXPECT_EQ(choose_truncation(poly, 3.0, 100.0, 1e-9, 64).degree, 2);
  EXPECT_EQ(choose_truncation(poly, 3.0, 100.0, 1e-9, 64).tail_bound, 0.0);
  const auto e = AnalyticSeries::exponential(0.125);
  const auto t = choose_truncation(e, 3.0, 100.0, 1e-9, 64);
  EXPECT_LE(t.tail_bound, 1e-9);
  EXPECT_GT(choose_truncation(e, 3.0, 100.0, 1e-6, 64).degree, 0);
  EXPECT_THROW(choose_truncation(AnalyticSeries::exponential(40.0), 3.0, 100.0, 1e-9, 64), std::invalid_argument);
  const auto geometric = AnalyticSeries::from_generator([](int j) { return std::pow(0.5, j); }, 2.0, "geo");
  EXPECT_THROW(check_radius(geometric, 1.0), std::invalid_argument);
}

TEST(TraceF, LinearAndFree) {
  const auto s = sample_potential(64, 0.3, uniform3, 21);
  double sum = 0.0;
  for (double v : s.values) sum += v;
  EXPECT_NEAR(trace_f(s, AnalyticSeries::polynomial({0, 1})).value, sum, 1e-13);

  PotentialSample zero{10, 0.3, 0, rademacher, std::vector<double>(10, 0.0)};
  EXPECT_EQ(trace_f(zero, AnalyticSeries::polynomial({0, -6, 0, 1})).value, 0.0);
}

TEST(TraceF, ExponentialMatchesSpectrum) {
  const auto s = sample_potential(100, 0.3, rademacher, 4);
  const auto f = AnalyticSeries::exponential(0.125);
  const auto result = trace_f(s, f, 1e-9);
  NeumaierSum expected;
  for (double l : eigenvalues(s)) expected.add(std::exp(l / 8.0));
  EXPECT_NEAR(result.value, expected.value(), 1e-7);
  EXPECT_LE(result.tail_bound, 1e-9);
}

TEST(TraceF, RadiusViolation) {
  const auto s = sample_potential(10, 0.3, rademacher, 4);
  const auto geometric = AnalyticSeries::from_generator([](int j) { return std::pow(1.0 / 2.5, j); }, 2.5, "geo");
  EXPECT_THROW(trace_f(s, geometric), std::invalid_argument);
}
