#include "acps/inference.hpp"

#include "acps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace acps {

LossDifferentialSeries loss_differential(std::span<const double> scores_1, std::span<const double> scores_2,
                                         Orientation orientation) {
  if (scores_1.size() != scores_2.size())
    throw DomainError("loss_differential: score series have different lengths (" + std::to_string(scores_1.size()) +
                      " vs " + std::to_string(scores_2.size()) + ")");
  if (scores_1.size() < 2)
    throw DomainError("loss_differential: need at least 2 periods");
  LossDifferentialSeries out;
  out.values.resize(scores_1.size());
  for (std::size_t t = 0; t < scores_1.size(); ++t) {
    const double d = orientation == Orientation::Positive ? scores_2[t] - scores_1[t] : scores_1[t] - scores_2[t];
    if (!std::isfinite(d))
      throw DomainError("loss_differential: non-finite score at period " + std::to_string(t));
    out.values[t] = d;
  }
  return out;
}

int auto_bandwidth(std::size_t t) {
  return static_cast<int>(std::floor(1.2 * std::cbrt(static_cast<double>(t))));
}

LongRunVariance spectral_density_zero(const LossDifferentialSeries &series, std::optional<int> bandwidth) {
  const auto &d = series.values;
  const std::size_t n = d.size();
  if (n < 2)
    throw DomainError("spectral_density_zero: need at least 2 observations");
  LongRunVariance out;
  out.bandwidth = bandwidth.value_or(auto_bandwidth(n));
  if (out.bandwidth < 0)
    throw DomainError("spectral_density_zero: bandwidth must be non-negative");
  out.bandwidth = std::min<int>(out.bandwidth, static_cast<int>(n) - 1);

  const double mean = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
  const auto autocov = [&](int lag) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(lag); t < n; ++t)
      s += (d[t] - mean) * (d[t - lag] - mean);
    return s / static_cast<double>(n);
  };
  const double gamma0 = autocov(0);
  if (gamma0 <= 0.0) {
    out.degenerate = true;
    out.value = 0.0;
    return out;
  }
  double lrv = gamma0;
  for (int k = 1; k <= out.bandwidth; ++k)
    lrv += 2.0 * (1.0 - static_cast<double>(k) / (out.bandwidth + 1.0)) * autocov(k);
  if (lrv <= 0.0) {
    lrv = gamma0 * 1e-8;
    out.floored = true;
  }
  out.value = lrv;
  return out;
}

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

DmResult dm_test(const LossDifferentialSeries &series, std::optional<int> bandwidth) {
  const std::size_t n = series.size();
  if (n < 10)
    throw DomainError("dm_test: need at least 10 periods, got " + std::to_string(n));
  DmResult out;
  out.t = n;
  out.mean_diff = std::accumulate(series.values.begin(), series.values.end(), 0.0) / static_cast<double>(n);
  const LongRunVariance lrv = spectral_density_zero(series, bandwidth);
  out.lrv = lrv.value;
  out.bandwidth = lrv.bandwidth;
  out.lrv_floored = lrv.floored;
  if (lrv.degenerate) {
    out.degenerate = true;
    if (out.mean_diff == 0.0) {
      out.statistic = 0.0;
      out.p_value = 1.0;
    } else {
      out.statistic = std::copysign(std::numeric_limits<double>::infinity(), out.mean_diff);
      out.p_value = 0.0;
    }
    return out;
  }
  out.statistic = std::sqrt(static_cast<double>(n)) * out.mean_diff / std::sqrt(out.lrv);
  // 2 (1 - Phi(|z|)) written with erfc to keep precision in the far tail.
  out.p_value = std::erfc(std::abs(out.statistic) / std::numbers::sqrt2);
  return out;
}

DmResult dm_test(std::span<const double> scores_1, std::span<const double> scores_2, Orientation orientation,
                 std::optional<int> bandwidth) {
  if (scores_1.size() != scores_2.size())
    throw DomainError("dm_test: score series have different lengths");
  if (scores_1.size() < 10)
    throw DomainError("dm_test: need at least 10 periods, got " + std::to_string(scores_1.size()));
  return dm_test(loss_differential(scores_1, scores_2, orientation), bandwidth);
}

std::string significance_stars(double p_value) {
  if (p_value < 0.01)
    return "***";
  if (p_value < 0.05)
    return "**";
  if (p_value < 0.10)
    return "*";
  return "";
}

double pit(const PredictiveDistribution &forecast, double y) { return forecast.cdf(y); }

std::vector<HistogramBin> pit_histogram(std::span<const double> pits, int bins) {
  if (bins < 1)
    throw DomainError("pit_histogram: need at least one bin");
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int b = 0; b < bins; ++b) {
    out[b].lower = static_cast<double>(b) / bins;
    out[b].upper = static_cast<double>(b + 1) / bins;
  }
  for (const double p : pits) {
    if (!(p >= 0.0 && p <= 1.0))
      throw DomainError("pit_histogram: PIT value outside [0,1]");
    const int b = std::min(bins - 1, static_cast<int>(p * bins));
    ++out[b].count;
  }
  for (auto &bin : out)
    bin.frequency = pits.empty() ? 0.0 : static_cast<double>(bin.count) / static_cast<double>(pits.size());
  return out;
}

double ks_distance_uniform(std::span<const double> sample) {
  if (sample.empty())
    throw DomainError("ks_distance_uniform: empty sample");
  std::vector<double> s(sample.begin(), sample.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double u = std::clamp(s[i], 0.0, 1.0);
    d = std::max({d, (i + 1) / n - u, u - i / n});
  }
  return d;
}

} // namespace acps
