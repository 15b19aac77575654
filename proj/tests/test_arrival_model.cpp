#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <gtest/gtest.h>

#include "ctbpq/arrivals.hpp"
#include "ctbpq/compensated_sum.hpp"
#include "ctbpq/errors.hpp"
#include "ctbpq/piecewise_pdf.hpp"
#include "ctbpq/simulator.hpp"

using namespace ctbpq;

namespace {

// 1 / sum_n 10 n^2 e^{-n/4}, summed independently of the library.
double benchmark_gamma() {
  long double s = 0.0L;
  for (int n = 1; n <= 30; ++n) s += 10.0L * n * n * std::exp(-0.25L * n);
  return static_cast<double>(1.0L / s);
}

double rel(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

}  // namespace

TEST(PiecewisePdf, RejectsMalformedShapes) {
  EXPECT_THROW(PiecewisePdf({0.0}, {}), ConfigError);
  EXPECT_THROW(PiecewisePdf({1.0, 2.0}, {1.0}), ConfigError);
  EXPECT_THROW(PiecewisePdf({0.0, 1.0, 1.0}, {0.5, 0.5}), ConfigError);
  EXPECT_THROW(PiecewisePdf({0.0, 1.0}, {1.0, 1.0}), ConfigError);
  EXPECT_THROW(PiecewisePdf({0.0, 1.0, 2.0}, {0.0, 1.0}), ConfigError);
  EXPECT_THROW(PiecewisePdf({0.0, 1.0, 2.0}, {1.0, -0.1}), ConfigError);
  EXPECT_THROW(PiecewisePdf({0.0, 2.0}, {0.6}), ConfigError);
}

TEST(PiecewisePdf, RescalesNearlyNormalizedLevels) {
  const PiecewisePdf pdf({0.0, 1.0, 3.0}, {0.5000001, 0.25});
  EXPECT_NEAR(pdf.cdf(3.0), 1.0, 1e-15);
  CompensatedSum<double> mass;
  for (std::size_t n = 1; n <= pdf.intervals(); ++n) mass += pdf.level(n) * pdf.width(n);
  EXPECT_NEAR(mass.value(), 1.0, 1e-12);
}

TEST(PiecewisePdf, ZeroLevelIntervalsAllowedAfterFirst) {
  const PiecewisePdf pdf({0.0, 1.0, 2.0, 3.0}, {0.5, 0.0, 0.5});
  EXPECT_DOUBLE_EQ(pdf.cdf_segment(1.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(pdf.cdf(2.0), 0.5);
}

TEST(PiecewisePdf, IntervalsAreHalfOpenOnTheLeft) {
  const PiecewisePdf pdf = benchmark_pdf();
  EXPECT_EQ(pdf.interval_of(0.0), 0u);
  EXPECT_EQ(pdf.interval_of(10.0), 1u);
  EXPECT_EQ(pdf.interval_of(10.0000001), 2u);
  EXPECT_EQ(pdf.interval_of(300.0), 30u);
  EXPECT_EQ(pdf.interval_of(300.5), 31u);
}

TEST(CdfSegment, EmptyIntervalIsZero) {
  const PiecewisePdf pdf = benchmark_pdf();
  EXPECT_EQ(pdf.cdf_segment(0.0, 0.0), 0.0);
  EXPECT_EQ(pdf.cdf_segment(50.0, 50.0), 0.0);
  EXPECT_EQ(pdf.cdf_segment(60.0, 50.0), 0.0);
}

TEST(CdfSegment, BenchmarkDensityIntegratesToOne) { EXPECT_EQ(benchmark_pdf().cdf_segment(0.0, 300.0), 1.0); }

TEST(CdfSegment, BenchmarkDensityFirstInterval) {
  EXPECT_LT(rel(benchmark_pdf().cdf_segment(0.0, 10.0), benchmark_gamma() * 10.0 * std::exp(-0.25)), 1e-14);
}

TEST(CdfSegment, MonotoneAndSaturating) {
  const PiecewisePdf pdf = benchmark_pdf();
  double prev = 0.0;
  for (double t = 0.0; t <= 320.0; t += 0.7) {
    const double F = pdf.cdf(t);
    EXPECT_GE(F, prev);
    prev = F;
  }
  EXPECT_EQ(pdf.cdf(300.0), 1.0);
  EXPECT_EQ(pdf.cdf(1e6), 1.0);
}

TEST(CdfSegment, PartialOverlapMatchesHandSum) {
  const PiecewisePdf pdf({0.0, 1.0, 3.0}, {0.5, 0.25});
  EXPECT_DOUBLE_EQ(pdf.cdf_segment(0.5, 2.0), 0.25 + 0.25);
}

TEST(CumulativeIntensity, Examples) {
  const PiecewisePdf pdf = benchmark_pdf();
  EXPECT_DOUBLE_EQ(cumulative_intensity(pdf, 1000.0, 0.0, 300.0), 1000.0);
  EXPECT_EQ(cumulative_intensity(pdf, 1000.0, 77.0, 77.0), 0.0);
  EXPECT_LT(rel(cumulative_intensity(pdf, 1000.0, 0.0, 10.0), 1000.0 * benchmark_gamma() * 10.0 * std::exp(-0.25)), 1e-14);
  EXPECT_EQ(cumulative_intensity(pdf, 1000.0, 310.0, 300.0), 0.0);
}

TEST(CtbpCountPmf, SingleCustomer) {
  const PiecewisePdf pdf = benchmark_pdf();
  EXPECT_NEAR(ctbp_count_pmf(pdf, 1, 100.0, 1), pdf.cdf(100.0), 1e-15);
}

TEST(CtbpCountPmf, SymmetricBinomial) {
  const PiecewisePdf pdf = PiecewisePdf::uniform(2.0);
  EXPECT_NEAR(ctbp_count_pmf(pdf, 2, 1.0, 1), 0.5, 1e-15);
}

TEST(CtbpCountPmf, BenchmarkScaleMatchesExtendedLogGamma) {
  using Big = boost::multiprecision::cpp_bin_float_50;
  const PiecewisePdf pdf = benchmark_pdf();
  const double p = pdf.cdf(100.0);
  const Big P(p);
  const Big lv = lgamma(Big(1001)) - lgamma(Big(401)) - lgamma(Big(601)) + 400 * log(P) + 600 * log1p(-P);
  EXPECT_LT(rel(ctbp_count_pmf(pdf, 1000, 100.0, 400), static_cast<double>(exp(lv))), 1e-12);
}

TEST(CtbpCountPmf, NormalizedOnGrid) {
  const PiecewisePdf pdf = benchmark_pdf();
  for (double t = 5.0; t <= 300.0; t += 25.0) {
    CompensatedSum<double> s;
    for (std::size_t k = 0; k <= 1000; ++k) s += ctbp_count_pmf(pdf, 1000, t, k);
    EXPECT_NEAR(s.value(), 1.0, 1e-12) << "t=" << t;
  }
}

TEST(CtbpCountPmf, DomainErrors) {
  EXPECT_THROW(ctbp_count_pmf(benchmark_pdf(), 3, 10.0, 4), DomainError);
}

TEST(ConditionalPmf, ConditioningEventItselfHasProbabilityOne) {
  const PiecewisePdf pdf = benchmark_pdf();
  const std::vector<double> times{120.0};
  const std::vector<std::size_t> counts{3};
  EXPECT_NEAR(ctbp_conditional_joint_pmf(pdf, 5, 120.0, times, counts, 3), 1.0, 1e-14);
  EXPECT_NEAR(nhpp_conditional_joint_pmf(pdf, 7.0, 5, 120.0, times, counts, 3), 1.0, 1e-14);
}

TEST(ConditionalPmf, NonMonotoneCountsAreImpossible) {
  const PiecewisePdf pdf = benchmark_pdf();
  const std::vector<double> times{50.0, 80.0};
  const std::vector<std::size_t> counts{2, 1};
  EXPECT_EQ(ctbp_conditional_joint_pmf(pdf, 4, 100.0, times, counts, 3), 0.0);
  EXPECT_EQ(nhpp_conditional_joint_pmf(pdf, 4.0, 4, 100.0, times, counts, 3), 0.0);
  const std::vector<double> one{50.0};
  const std::vector<std::size_t> too_many{4};
  EXPECT_EQ(nhpp_conditional_joint_pmf(pdf, 4.0, 4, 100.0, one, too_many, 3), 0.0);
}

TEST(ConditionalPmf, DomainErrors) {
  const PiecewisePdf pdf = benchmark_pdf();
  const std::vector<double> times{50.0};
  const std::vector<std::size_t> counts{1};
  EXPECT_THROW(ctbp_conditional_joint_pmf(pdf, 3, 300.0, times, counts, 2), DomainError);
  EXPECT_THROW(ctbp_conditional_joint_pmf(pdf, 3, 40.0, times, counts, 2), DomainError);
  EXPECT_THROW(ctbp_conditional_joint_pmf(pdf, 3, 100.0, times, counts, 4), DomainError);
  EXPECT_THROW(nhpp_conditional_joint_pmf(pdf, 0.0, 3, 100.0, times, counts, 2), DomainError);
}

TEST(ConditionalPmf, CtbpAndNhppFormsAgreeOnRandomInstances) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int inst = 0; inst < 500; ++inst) {
    const std::size_t N = 1 + rng() % 4;
    std::vector<double> bp{0.0};
    std::vector<double> w;
    for (std::size_t n = 0; n < N; ++n) {
      // Rational breakpoints: multiples of 1/8.
      bp.push_back(bp.back() + static_cast<double>(1 + rng() % 16) / 8.0);
      w.push_back(n == 0 ? 0.5 + unit(rng) : unit(rng));
    }
    const PiecewisePdf pdf = PiecewisePdf::from_weights(bp, w);
    const std::size_t K = 1 + rng() % 5;
    const std::size_t m = 1 + rng() % 3;
    const bool at_end = rng() % 4 == 0;
    const double t = at_end ? pdf.horizon() + (rng() % 2 ? 1.0 : 0.0) : pdf.horizon() * static_cast<double>(1 + rng() % 15) / 16.0;
    const std::size_t k = at_end ? K : rng() % (K + 1);
    std::vector<double> times;
    for (std::size_t i = 0; i < m; ++i) times.push_back(t * static_cast<double>(rng() % 17) / 16.0);
    std::vector<std::size_t> counts;
    for (std::size_t i = 0; i < m; ++i) counts.push_back(rng() % (k + 1));
    std::vector<std::size_t> order(m);
    for (std::size_t i = 0; i < m; ++i) order[i] = i;
    std::sort(counts.begin(), counts.end());
    std::sort(times.begin(), times.end());
    const double ctbp = ctbp_conditional_joint_pmf(pdf, K, t, times, counts, k);
    for (const double alpha : {1.0, static_cast<double>(K), 10.0 * static_cast<double>(K), 0.37}) {
      EXPECT_NEAR(nhpp_conditional_joint_pmf(pdf, alpha, K, t, times, counts, k), ctbp, 1e-12) << "instance " << inst;
    }
  }
}

TEST(Sampler, SortedLengthAndRange) {
  const PiecewisePdf pdf = benchmark_pdf();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto times = sample_arrival_times(pdf, 5, seed);
    ASSERT_EQ(times.size(), 5u);
    EXPECT_TRUE(std::is_sorted(times.begin(), times.end()));
    for (const double x : times) {
      EXPECT_GT(x, 0.0);
      EXPECT_LE(x, 300.0);
    }
  }
}

TEST(Sampler, DeterministicPerSeed) {
  const PiecewisePdf pdf = benchmark_pdf();
  EXPECT_EQ(sample_arrival_times(pdf, 40, 123u), sample_arrival_times(pdf, 40, 123u));
  EXPECT_NE(sample_arrival_times(pdf, 40, 123u), sample_arrival_times(pdf, 40, 124u));
}

TEST(Sampler, UniformSingleCustomerMean) {
  const double T = 300.0;
  const PiecewisePdf pdf = PiecewisePdf::uniform(T);
  const std::size_t reps = 100000;
  CompensatedSum<double> s;
  for (std::size_t r = 0; r < reps; ++r) {
    Rng rng = substream(5, r);
    s += sample_arrival_times(pdf, 1, rng).front();
  }
  const double mean = s.value() / static_cast<double>(reps);
  const double sigma = T / std::sqrt(12.0) / std::sqrt(static_cast<double>(reps));
  EXPECT_NEAR(mean, T / 2.0, 3.0 * sigma);
}

TEST(Sampler, PooledDrawsWithinDkwBand) {
  const PiecewisePdf pdf = benchmark_pdf();
  const std::size_t n = 100000;
  Rng rng = substream(11, 0);
  const auto draws = sample_arrival_times(pdf, n, rng);
  // 99% DKW band: sqrt(ln(2/0.01) / (2n)).
  const double band = std::sqrt(std::log(2.0 / 0.01) / (2.0 * static_cast<double>(n)));
  for (std::size_t k = 1; k <= pdf.intervals(); ++k) {
    const double Tn = pdf.breakpoint(k);
    const double emp = static_cast<double>(count_up_to(draws, Tn)) / static_cast<double>(n);
    EXPECT_LE(std::abs(emp - pdf.cdf(Tn)), band) << "T_n=" << Tn;
  }
}

namespace {

// Pr[X_(1) <= a, X_(2) <= b] for K i.i.d. draws, a <= b, by summing the
// multinomial law of the counts in (0,a], (a,b], (b,T].
double first_two_order_stats_cdf(const PiecewisePdf& pdf, std::size_t K, double a, double b) {
  const double p1 = pdf.cdf(a);
  const double p2 = pdf.cdf_segment(a, b);
  const double p3 = 1.0 - p1 - p2;
  double total = 0.0;
  for (std::size_t i = 1; i <= K; ++i) {
    for (std::size_t j = 0; i + j <= K; ++j) {
      if (i + j < 2) continue;
      const std::size_t r = K - i - j;
      const double lc = std::lgamma(K + 1.0) - std::lgamma(i + 1.0) - std::lgamma(j + 1.0) - std::lgamma(r + 1.0);
      total += std::exp(lc) * std::pow(p1, i) * std::pow(p2, j) * std::pow(p3, r);
    }
  }
  return total;
}

}  // namespace

TEST(Sampler, ConditionedPoissonOrderStatisticsMatchBinomialProcess) {
  const PiecewisePdf pdf = benchmark_pdf();
  const std::size_t K = 3;
  const std::vector<std::pair<double, double>> grid = {{60.0, 90.0}, {60.0, 150.0}, {100.0, 120.0}, {100.0, 200.0}};
  std::vector<std::size_t> hits_nhpp(grid.size(), 0);
  std::vector<std::size_t> hits_ctbp(grid.size(), 0);
  std::size_t kept = 0;
  const std::size_t target = 40000;
  for (std::uint64_t r = 0; kept < target; ++r) {
    Rng rng = substream(77, r);
    const auto times = sample_nhpp_arrival_times(pdf, 2.5, rng);
    if (times.size() != K) continue;
    ++kept;
    Rng rng2 = substream(78, kept);
    const auto ctbp = sample_arrival_times(pdf, K, rng2);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      if (times[0] <= grid[g].first && times[1] <= grid[g].second) ++hits_nhpp[g];
      if (ctbp[0] <= grid[g].first && ctbp[1] <= grid[g].second) ++hits_ctbp[g];
    }
  }
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const double p = first_two_order_stats_cdf(pdf, K, grid[g].first, grid[g].second);
    const double sigma = std::sqrt(p * (1.0 - p) / static_cast<double>(target));
    EXPECT_NEAR(static_cast<double>(hits_nhpp[g]) / target, p, 3.0 * sigma) << "grid " << g;
    EXPECT_NEAR(static_cast<double>(hits_ctbp[g]) / target, p, 3.0 * sigma) << "grid " << g;
  }
}
