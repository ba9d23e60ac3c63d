#include "acps/errors.hpp"
#include "acps/inference.hpp"
#include "acps/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace acps {
namespace {

std::vector<double> normal_draws(std::size_t n, double mean, double sd, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::vector<double> out(n);
  for (auto &x : out)
    x = mean + sd * draw_normal(rng);
  return out;
}

TEST(LossDifferential, SignConventions) {
  const std::vector<double> a = {2.0, 2.0};
  const std::vector<double> b = {1.0, 1.0};
  EXPECT_EQ(loss_differential(a, b, Orientation::Positive).values, (std::vector<double>{-1.0, -1.0}));
  EXPECT_EQ(loss_differential(a, b, Orientation::Negative).values, (std::vector<double>{1.0, 1.0}));
  EXPECT_EQ(loss_differential(a, a, Orientation::Positive).values, (std::vector<double>{0.0, 0.0}));
}

TEST(LossDifferential, Errors) {
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {1.0, 2.0};
  EXPECT_THROW(loss_differential(a, b, Orientation::Positive), DomainError);
  EXPECT_THROW(loss_differential(std::vector<double>{1.0}, std::vector<double>{1.0}, Orientation::Positive),
               DomainError);
  const std::vector<double> c = {1.0, NAN, 3.0};
  EXPECT_THROW(loss_differential(a, c, Orientation::Positive), DomainError);
}

TEST(SpectralDensity, AutoBandwidth) {
  EXPECT_EQ(auto_bandwidth(100), 5);
  EXPECT_EQ(auto_bandwidth(1000), 12);
  EXPECT_EQ(auto_bandwidth(2), 1);
}

TEST(SpectralDensity, BartlettByHand) {
  // d = (1, -1, 1, -1): mean 0, gamma0 = 1, gamma1 = -3/4, K = 1.
  const LossDifferentialSeries s{{1.0, -1.0, 1.0, -1.0}};
  const auto lrv = spectral_density_zero(s, 1);
  EXPECT_NEAR(lrv.value, 1.0 + 2.0 * 0.5 * (-0.75), 1e-15);
  EXPECT_FALSE(lrv.floored);
  EXPECT_EQ(lrv.bandwidth, 1);
  EXPECT_NEAR(spectral_density_zero(s, 0).value, 1.0, 1e-15);
}

TEST(SpectralDensity, WhiteNoiseNearUnitVariance) {
  const auto s = LossDifferentialSeries{normal_draws(100'000, 0.0, 1.0, 7)};
  EXPECT_NEAR(spectral_density_zero(s).value, 1.0, 0.05);
}

TEST(SpectralDensity, Ar1LongRunVariance) {
  // sigma^2 / (1 - rho)^2 = 1 / 0.25.
  Rng rng = make_rng(99);
  std::vector<double> x(100'000);
  double prev = 0.0;
  for (auto &v : x) {
    prev = 0.5 * prev + draw_normal(rng);
    v = prev;
  }
  // A fixed K large enough to cover the geometric autocorrelation decay.
  const auto lrv = spectral_density_zero(LossDifferentialSeries{x}, 200);
  EXPECT_NEAR(lrv.value, 4.0, 0.4);
}

TEST(SpectralDensity, ConstantSeriesIsDegenerate) {
  const auto lrv = spectral_density_zero(LossDifferentialSeries{{3.0, 3.0, 3.0, 3.0}});
  EXPECT_TRUE(lrv.degenerate);
  EXPECT_EQ(lrv.value, 0.0);
  EXPECT_THROW(spectral_density_zero(LossDifferentialSeries{{1.0}}), DomainError);
}

TEST(SpectralDensity, BartlettEstimateIsNonNegative) {
  // Bartlett weights give a positive semi-definite estimate, so the floor stays unused.
  const LossDifferentialSeries s{{1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, 1.0, -1.0, -1.0}};
  for (int k = 0; k <= 11; ++k) {
    const auto lrv = spectral_density_zero(s, k);
    EXPECT_GE(lrv.value, 0.0) << k;
    EXPECT_FALSE(lrv.floored) << k;
  }
  EXPECT_THROW(spectral_density_zero(s, -1), DomainError);
}

TEST(DmTest, IdenticalSeries) {
  const auto a = normal_draws(50, 0.0, 1.0, 1);
  const auto r = dm_test(a, a, Orientation::Negative);
  EXPECT_EQ(r.statistic, 0.0);
  EXPECT_EQ(r.p_value, 1.0);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(significance_stars(r.p_value), "");
}

TEST(DmTest, ConstantNonZeroDifferentialIsInfinite) {
  const std::vector<double> a(20, 1.0);
  const std::vector<double> b(20, 2.0);
  const auto r = dm_test(a, b, Orientation::Negative);
  EXPECT_TRUE(r.degenerate);
  EXPECT_EQ(r.statistic, -INFINITY);
  EXPECT_EQ(r.p_value, 0.0);
  EXPECT_EQ(dm_test(b, a, Orientation::Negative).statistic, INFINITY);
}

TEST(DmTest, TooShort) {
  const std::vector<double> a(9, 1.0);
  EXPECT_THROW(dm_test(a, a, Orientation::Negative), DomainError);
}

TEST(DmTest, StatisticNearTenForHalfSdShift) {
  const auto d = normal_draws(400, 0.5, 1.0, 2024);
  const std::vector<double> zero(400, 0.0);
  const auto r = dm_test(d, zero, Orientation::Negative);
  EXPECT_NEAR(r.statistic, 10.0, 1.5);
  EXPECT_LT(r.p_value, 1e-10);
  EXPECT_EQ(significance_stars(r.p_value), "***");
}

TEST(DmTest, PValueMatchesNormalTail) {
  const auto a = normal_draws(60, 0.1, 1.0, 3);
  const auto b = normal_draws(60, 0.0, 1.0, 4);
  const auto r = dm_test(a, b, Orientation::Negative);
  EXPECT_NEAR(r.p_value, 2.0 * (1.0 - standard_normal_cdf(std::abs(r.statistic))), 1e-12);
  EXPECT_GE(r.p_value, 0.0);
  EXPECT_LE(r.p_value, 1.0);
}

TEST(DmTest, Antisymmetric) {
  const auto a = normal_draws(200, 0.2, 1.0, 5);
  const auto b = normal_draws(200, 0.0, 1.3, 6);
  for (const auto o : {Orientation::Positive, Orientation::Negative}) {
    const auto ab = dm_test(a, b, o);
    const auto ba = dm_test(b, a, o);
    EXPECT_EQ(ab.statistic, -ba.statistic);
    EXPECT_EQ(ab.p_value, ba.p_value);
  }
}

TEST(DmTest, InvariantToCommonShift) {
  const auto a = normal_draws(200, 0.2, 1.0, 8);
  const auto b = normal_draws(200, 0.0, 1.0, 9);
  std::vector<double> a2 = a, b2 = b;
  for (auto &x : a2)
    x += 5.0;
  for (auto &x : b2)
    x += 5.0;
  const auto r1 = dm_test(a, b, Orientation::Negative);
  const auto r2 = dm_test(a2, b2, Orientation::Negative);
  EXPECT_NEAR(r1.statistic, r2.statistic, 1e-10);
  EXPECT_NEAR(r1.p_value, r2.p_value, 1e-12);
  EXPECT_NEAR(r1.lrv, r2.lrv, 1e-12);
}

TEST(DmTest, SizeUnderNull) {
  int rejections = 0;
  const int reps = 2000;
  const std::vector<double> zero(500, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto d = normal_draws(500, 0.0, 1.0, derive_seed(77, r, 0));
    if (dm_test(d, zero, Orientation::Negative).p_value < 0.05)
      ++rejections;
  }
  const double rate = static_cast<double>(rejections) / reps;
  EXPECT_GE(rate, 0.035);
  EXPECT_LE(rate, 0.065);
}

TEST(DmTest, PowerAgainstShift) {
  int rejections = 0;
  const int reps = 300;
  const std::vector<double> zero(500, 0.0);
  for (int r = 0; r < reps; ++r) {
    const auto d = normal_draws(500, 0.3, 1.0, derive_seed(78, r, 0));
    if (dm_test(d, zero, Orientation::Negative).p_value < 0.05)
      ++rejections;
  }
  // Power of a two-sided 5% z-test at sqrt(500)*0.3 = 6.7 is essentially 1.
  EXPECT_GT(rejections, reps * 99 / 100);
}

TEST(Stars, Mapping) {
  EXPECT_EQ(significance_stars(0.005), "***");
  EXPECT_EQ(significance_stars(0.01), "**");
  EXPECT_EQ(significance_stars(0.049), "**");
  EXPECT_EQ(significance_stars(0.05), "*");
  EXPECT_EQ(significance_stars(0.099), "*");
  EXPECT_EQ(significance_stars(0.10), "");
  EXPECT_EQ(significance_stars(1.0), "");
}

TEST(Pit, Examples) {
  EXPECT_DOUBLE_EQ(pit(AnalyticDistribution::normal(0, 1), 0.0), 0.5);
  EXPECT_EQ(pit(EmpiricalCdf({1.0, 2.0, 3.0}), 0.5), 0.0);
  EXPECT_EQ(pit(EmpiricalCdf({1.0, 2.0, 3.0}), 3.0), 1.0);
}

TEST(Pit, UniformUnderCorrectForecast) {
  const PredictiveDistribution f = AnalyticDistribution::normal(1.0, 4.0);
  const auto y = normal_draws(100'000, 1.0, 2.0, 31);
  std::vector<double> pits(y.size());
  std::transform(y.begin(), y.end(), pits.begin(), [&](double v) { return pit(f, v); });
  EXPECT_LT(ks_distance_uniform(pits), 0.01);
}

TEST(Pit, MisspecifiedForecastIsDetected) {
  const PredictiveDistribution f = AnalyticDistribution::normal(0.0, 1.0);
  const auto y = normal_draws(10'000, 0.5, 1.0, 32);
  std::vector<double> pits(y.size());
  std::transform(y.begin(), y.end(), pits.begin(), [&](double v) { return pit(f, v); });
  EXPECT_GT(ks_distance_uniform(pits), 0.1);
}

TEST(Pit, Histogram) {
  const std::vector<double> p = {0.0, 0.05, 0.1, 0.55, 0.99, 1.0};
  const auto h = pit_histogram(p, 10);
  ASSERT_EQ(h.size(), 10u);
  EXPECT_EQ(h[0].count, 2u);
  EXPECT_EQ(h[1].count, 1u);
  EXPECT_EQ(h[5].count, 1u);
  EXPECT_EQ(h[9].count, 2u);
  EXPECT_NEAR(h[0].frequency, 2.0 / 6.0, 1e-15);
  EXPECT_DOUBLE_EQ(h[9].upper, 1.0);
  std::size_t total = 0;
  for (const auto &b : h)
    total += b.count;
  EXPECT_EQ(total, p.size());
  EXPECT_THROW(pit_histogram(std::vector<double>{1.5}), DomainError);
  EXPECT_THROW(pit_histogram(p, 0), DomainError);
}

TEST(Pit, KsDistanceByHand) {
  // Sorted (0.25, 0.75): max(0.5 - 0.25, 1 - 0.75, 0.25 - 0, 0.75 - 0.5) = 0.25.
  EXPECT_NEAR(ks_distance_uniform(std::vector<double>{0.75, 0.25}), 0.25, 1e-15);
  EXPECT_NEAR(ks_distance_uniform(std::vector<double>{0.0}), 1.0, 1e-15);
}

} // namespace
} // namespace acps
