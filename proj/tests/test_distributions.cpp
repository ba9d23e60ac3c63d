#include "acps/distributions.hpp"
#include "acps/errors.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace acps {
namespace {

std::vector<AnalyticDistribution> all_families() {
  return {AnalyticDistribution::normal(0.0, 1.0),     AnalyticDistribution::normal(2.0, 4.0),
          AnalyticDistribution::student_t(0.0, 1.0, 5.0), AnalyticDistribution::student_t(-3.0, 1.0, 3.0),
          AnalyticDistribution::gamma(2.0, 1.0),      AnalyticDistribution::gamma(1.5, 1.5),
          AnalyticDistribution::beta(1.0, 2.0),       AnalyticDistribution::beta(5.0, 5.0)};
}

TEST(Distributions, CdfExamples) {
  EXPECT_DOUBLE_EQ(cdf_eval(AnalyticDistribution::normal(0, 1), 0.0), 0.5);
  EXPECT_NEAR(cdf_eval(EmpiricalCdf({1.0, 2.0, 3.0}), 2.0), 2.0 / 3.0, 1e-15);
  // Erlang(2,1): 1 - (1 + x) e^-x.
  EXPECT_NEAR(cdf_eval(AnalyticDistribution::gamma(2, 1), 2.0), 1.0 - 3.0 * std::exp(-2.0), 1e-14);
}

// Student-t density written out from its definition, integrated by Simpson's rule.
double t_cdf_by_simpson(double z, double nu) {
  const auto pdf = [nu](double x) {
    return std::exp(std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu) - 0.5 * std::log(nu * std::numbers::pi) -
                    0.5 * (nu + 1) * std::log1p(x * x / nu));
  };
  const int n = 20000;
  const double h = z / n;
  double s = pdf(0.0) + pdf(z);
  for (int i = 1; i < n; ++i)
    s += (i % 2 == 1 ? 4.0 : 2.0) * pdf(i * h);
  return 0.5 + s * h / 3.0;
}

TEST(Distributions, IntegerDofStudentTCdf) {
  for (const double nu : {1.0, 2.0, 3.0, 4.0, 5.0, 15.0, 30.0})
    for (const double z : {-6.0, -1.7, -0.2, 0.0, 0.4, 2.5, 9.0}) {
      const auto t = AnalyticDistribution::student_t(0.0, 1.0, nu);
      EXPECT_NEAR(t.cdf(z), t_cdf_by_simpson(z, nu), 1e-12) << nu << " " << z;
      // Non-integer dof take the incomplete-beta path; the two agree in the limit.
      EXPECT_NEAR(t.cdf(z), AnalyticDistribution::student_t(0.0, 1.0, nu + 1e-9).cdf(z), 1e-9) << nu << " " << z;
    }
}

TEST(Distributions, GammaCdfAgreesWithMonteCarlo) {
  const auto g = AnalyticDistribution::gamma(2, 1);
  const auto draws = g.sample(1'000'000, 11);
  const double frac =
      static_cast<double>(std::count_if(draws.begin(), draws.end(), [](double x) { return x <= 2.0; })) / 1e6;
  // binomial standard error ~ 4.9e-4
  EXPECT_NEAR(frac, g.cdf(2.0), 2.5e-3);
}

TEST(Distributions, QuantileExamples) {
  EXPECT_NEAR(quantile(AnalyticDistribution::normal(0, 1), 0.5), 0.0, 1e-15);
  EXPECT_DOUBLE_EQ(quantile(EmpiricalCdf({1.0, 2.0, 3.0}), 0.5), 2.0);
  // CDF of Be(1,2) is 1 - (1-x)^2.
  EXPECT_NEAR(quantile(AnalyticDistribution::beta(1, 2), 0.75), 0.5, 1e-14);
}

TEST(Distributions, PdfExamples) {
  EXPECT_NEAR(pdf_eval(AnalyticDistribution::normal(0, 1), 0.0), 1.0 / std::sqrt(2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(pdf_eval(AnalyticDistribution::beta(1, 1), 0.3), 1.0, 1e-14);
  const double t5 = std::tgamma(3.0) / (std::sqrt(5.0 * std::numbers::pi) * std::tgamma(2.5));
  EXPECT_NEAR(pdf_eval(AnalyticDistribution::student_t(0, 1, 5), 0.0), t5, 1e-14);
  EXPECT_NEAR(t5, 0.37961, 1e-5);
}

TEST(Distributions, PdfOfEmpiricalIsUnsupported) {
  EXPECT_THROW(pdf_eval(EmpiricalCdf({1.0, 2.0}), 1.5), UnsupportedOperation);
}

TEST(Distributions, DomainErrors) {
  EXPECT_THROW(AnalyticDistribution::normal(0, 0), DomainError);
  EXPECT_THROW(AnalyticDistribution::student_t(0, 1, -1), DomainError);
  EXPECT_THROW(AnalyticDistribution::gamma(0, 1), DomainError);
  EXPECT_THROW(AnalyticDistribution::beta(1, -2), DomainError);
  EXPECT_THROW(EmpiricalCdf({}), DomainError);
  const PredictiveDistribution n = AnalyticDistribution::normal(0, 1);
  EXPECT_THROW(n.cdf(std::numeric_limits<double>::quiet_NaN()), DomainError);
  EXPECT_THROW(n.cdf(std::numeric_limits<double>::infinity()), DomainError);
  EXPECT_THROW(n.quantile(0.0), DomainError);
  EXPECT_THROW(n.quantile(1.0), DomainError);
  EXPECT_THROW(EmpiricalCdf({1.0}).quantile(1.5), DomainError);
}

TEST(Distributions, SampleMoments) {
  const auto n = AnalyticDistribution::normal(0, 1).sample(1'000'000, 5);
  const double mean = std::accumulate(n.begin(), n.end(), 0.0) / 1e6;
  EXPECT_NEAR(mean, 0.0, 0.01);

  const auto u = AnalyticDistribution::beta(1, 1).sample(1'000'000, 6);
  const double m = std::accumulate(u.begin(), u.end(), 0.0) / 1e6;
  double var = 0.0;
  for (const double x : u)
    var += (x - m) * (x - m);
  var /= 1e6 - 1.0;
  EXPECT_NEAR(var, 1.0 / 12.0, 1e-3);
}

TEST(Distributions, SamplingIsDeterministic) {
  for (const auto &d : all_families()) {
    const auto a = d.sample(1000, 42);
    const auto b = d.sample(1000, 42);
    EXPECT_EQ(a, b) << d.label();
    EXPECT_NE(a, d.sample(1000, 43)) << d.label();
  }
}

TEST(Distributions, SampledMomentsMatchFamilies) {
  // Mean of each family from its parameters.
  const std::vector<std::pair<AnalyticDistribution, double>> cases = {
      {AnalyticDistribution::student_t(1.0, 2.0, 5.0), 1.0},
      {AnalyticDistribution::gamma(1.5, 1.5), 1.0},
      {AnalyticDistribution::beta(1.0, 5.0), 1.0 / 6.0},
  };
  for (const auto &[d, expected] : cases) {
    const auto x = d.sample(400'000, 3);
    EXPECT_NEAR(std::accumulate(x.begin(), x.end(), 0.0) / x.size(), expected, 0.01) << d.label();
  }
}

// cdf nondecreasing and quantile(cdf(x)) == x on 100 interior support points.
TEST(DistributionProperties, QuantileInvertsCdf) {
  for (const auto &d : all_families()) {
    const double lo = d.quantile(0.001);
    const double hi = d.quantile(0.999);
    double prev = -1.0;
    for (int i = 0; i < 100; ++i) {
      const double x = lo + (hi - lo) * i / 99.0;
      const double p = d.cdf(x);
      EXPECT_GE(p, prev) << d.label();
      prev = p;
      EXPECT_NEAR(d.quantile(p), x, 1e-8) << d.label() << " at " << x;
    }
  }
}

TEST(DistributionProperties, PdfIntegratesToOne) {
  for (const auto &d : all_families()) {
    const Support s = d.support();
    const double lo = std::isfinite(s.lower) ? s.lower : d.quantile(1e-12);
    const double hi = std::isfinite(s.upper) ? s.upper : d.quantile(1.0 - 1e-12);
    const int n = 2'000'000;
    const double h = (hi - lo) / n;
    double sum = 0.5 * (d.pdf(lo) + d.pdf(hi));
    for (int i = 1; i < n; ++i)
      sum += d.pdf(lo + i * h);
    EXPECT_NEAR(sum * h, 1.0, 1e-6) << d.label();
  }
}

// Sup-norm distance between the empirical and analytic CDF stays within the
// 99% Dvoretzky-Kiefer-Wolfowitz band.
TEST(DistributionProperties, EmpiricalCdfConvergesWithinDkwBand) {
  for (const auto &d : all_families()) {
    for (const std::size_t n : {1000u, 10000u}) {
      const EmpiricalCdf e(d.sample(n, 1234 + n));
      const double bound = 2.0 * std::sqrt(std::log(2.0 / 0.01) / (2.0 * n));
      double sup = 0.0;
      const double lo = d.quantile(0.0005);
      const double hi = d.quantile(0.9995);
      for (int i = 0; i <= 2000; ++i) {
        const double x = lo + (hi - lo) * i / 2000.0;
        sup = std::max(sup, std::abs(e.cdf(x) - d.cdf(x)));
      }
      EXPECT_LT(sup, bound) << d.label() << " n=" << n;
    }
  }
}

TEST(EmpiricalCdf, StepConventions) {
  const EmpiricalCdf e({3.0, 1.0, 2.0, 2.0});
  EXPECT_EQ(e.cdf(0.5), 0.0);
  EXPECT_EQ(e.cdf(1.0), 0.25);
  EXPECT_EQ(e.cdf(2.0), 0.75);
  EXPECT_EQ(e.cdf(2.999), 0.75);
  EXPECT_EQ(e.cdf(3.0), 1.0);
  EXPECT_EQ(e.cdf(1e9), 1.0);
  EXPECT_EQ(e.quantile(0.25), 1.0);
  EXPECT_EQ(e.quantile(0.2500001), 2.0);
  EXPECT_EQ(e.quantile(0.9999), 3.0);
  EXPECT_EQ(e.min(), 1.0);
  EXPECT_EQ(e.max(), 3.0);
}

TEST(EmpiricalCdf, ResampleDrawsFromStoredValues) {
  const EmpiricalCdf e({1.0, 5.0, 9.0});
  const PredictiveDistribution p = e;
  const auto r = p.sample(500, 1);
  EXPECT_EQ(r, p.sample(500, 1));
  for (const double x : r)
    EXPECT_TRUE(x == 1.0 || x == 5.0 || x == 9.0);
}

TEST(Distributions, ParseAnalytic) {
  EXPECT_EQ(parse_analytic("normal:0,16").label(), "N(0,16)");
  EXPECT_EQ(parse_analytic("t:-3,1,3").label(), "t(-3,1,3)");
  EXPECT_EQ(parse_analytic("gamma:2,1").label(), "Ga(2,1)");
  EXPECT_EQ(parse_analytic("beta:1,2").label(), "Be(1,2)");
  EXPECT_THROW(parse_analytic("normal:0"), DomainError);
  EXPECT_THROW(parse_analytic("cauchy:0,1"), DomainError);
  EXPECT_THROW(parse_analytic("normal:0,x"), DomainError);
  EXPECT_THROW(parse_analytic("normal"), DomainError);
}

TEST(Distributions, SupportBounds) {
  EXPECT_EQ(AnalyticDistribution::gamma(2, 1).support().lower, 0.0);
  EXPECT_EQ(AnalyticDistribution::beta(2, 1).support().upper, 1.0);
  EXPECT_FALSE(std::isfinite(AnalyticDistribution::normal(0, 1).support().upper));
  EXPECT_EQ(AnalyticDistribution::gamma(2, 1).cdf(-1.0), 0.0);
  EXPECT_EQ(AnalyticDistribution::beta(2, 2).cdf(1.5), 1.0);
  EXPECT_EQ(AnalyticDistribution::beta(2, 2).pdf(-0.5), 0.0);
}

} // namespace
} // namespace acps
