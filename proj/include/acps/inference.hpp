#pragma once

#include "acps/distributions.hpp"
#include "acps/scoring.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace acps {

/// Per-period loss differences d*_t = S*(y_t, P_1t) - S*(y_t, P_2t), where
/// S* is the score turned into a loss (negated if positively oriented).
/// Negative values mean model 1 did better.
struct LossDifferentialSeries {
  std::vector<double> values;
  std::size_t size() const { return values.size(); }
};

LossDifferentialSeries loss_differential(std::span<const double> scores_1, std::span<const double> scores_2,
                                         Orientation orientation);

/// Long-run variance 2*pi*f(0) of a series.
struct LongRunVariance {
  double value = 0.0;
  int bandwidth = 0;
  /// Zero sample variance.
  bool degenerate = false;
  /// The kernel estimate came out negative and was floored at gamma_0 * 1e-8.
  bool floored = false;
};

/// floor(1.2 * T^(1/3)).
int auto_bandwidth(std::size_t t);

/// Bartlett-kernel (Newey-West) estimate
/// gamma_0 + 2 sum_{k=1..K} (1 - k/(K+1)) gamma_k, with autocovariances
/// normalized by T. Requires T >= 2.
LongRunVariance spectral_density_zero(const LossDifferentialSeries &series, std::optional<int> bandwidth = std::nullopt);

struct DmResult {
  std::size_t t = 0;
  double mean_diff = 0.0;
  double lrv = 0.0;
  int bandwidth = 0;
  double statistic = 0.0;
  double p_value = 1.0;
  /// Zero long-run variance; statistic is 0 (equal means) or +-infinity.
  bool degenerate = false;
  bool lrv_floored = false;
};

/// Diebold-Mariano test of H0: E[d*_t] = 0 with statistic sqrt(T) mean / sqrt(lrv)
/// and a two-sided standard normal p-value. Requires T >= 10.
DmResult dm_test(std::span<const double> scores_1, std::span<const double> scores_2, Orientation orientation,
                 std::optional<int> bandwidth = std::nullopt);
DmResult dm_test(const LossDifferentialSeries &series, std::optional<int> bandwidth = std::nullopt);

/// "***" below 1%, "**" below 5%, "*" below 10%, otherwise empty.
std::string significance_stars(double p_value);

double standard_normal_cdf(double x);

/// Probability integral transform P(y).
double pit(const PredictiveDistribution &forecast, double y);

struct HistogramBin {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t count = 0;
  double frequency = 0.0;
};

/// Equal-width histogram of PIT values on [0,1]; the last bin is closed.
std::vector<HistogramBin> pit_histogram(std::span<const double> pits, int bins = 10);

/// Kolmogorov-Smirnov distance between the sample and U(0,1).
double ks_distance_uniform(std::span<const double> sample);

} // namespace acps
