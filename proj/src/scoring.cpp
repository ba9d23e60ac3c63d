#include "acps/scoring.hpp"

#include "acps/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <tuple>

namespace acps {
namespace {

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Outcome-domain form of the quantile-weighted CRPS. Integrating the quantile
// score 2(1{y <= q} - a)(q - y) v(a) by parts over q = P^-1(a) gives
//   int_{u<y} H_left(P(u)) du + int_{u>=y} H_right(P(u)) du
// with H_left(F) = int_0^F 2 s v(s) ds and H_right(F) = int_F^1 2 (1-s) v(s) ds.
double qcrps_kernel(WeightScheme scheme, Side side, double f) {
  const double g = 1.0 - f;
  switch (scheme) {
  case WeightScheme::Uniform:
    return side == Side::LeftOfY ? f * f : g * g;
  case WeightScheme::Center: {
    const double x = side == Side::LeftOfY ? f : g;
    return 2.0 * x * x * x / 3.0 - 0.5 * x * x * x * x;
  }
  case WeightScheme::Tails: {
    const double x = side == Side::LeftOfY ? f : g;
    return 2.0 * x * x * x * x - 8.0 * x * x * x / 3.0 + x * x;
  }
  case WeightScheme::RightTail:
    if (side == Side::LeftOfY)
      return 0.5 * f * f * f * f;
    return 1.0 / 6.0 - 2.0 * f * f * f / 3.0 + 0.5 * f * f * f * f;
  case WeightScheme::LeftTail:
    if (side == Side::RightOfY)
      return 0.5 * g * g * g * g;
    return 1.0 / 6.0 - 2.0 * g * g * g / 3.0 + 0.5 * g * g * g * g;
  }
  return 0.0;
}

double pointwise(const ScoreSpec &spec, Side side, double p, double u) {
  double value = 0.0;
  if (spec.family == ScoreFamily::Acps) {
    value = acps_integrand(p, side, spec.c);
    if (spec.weighting == Weighting::Quantile)
      value *= quantile_weight(spec.scheme, p);
  } else if (spec.weighting == Weighting::Quantile) {
    value = qcrps_kernel(spec.scheme, side, p);
  } else {
    value = side == Side::LeftOfY ? p * p : (1.0 - p) * (1.0 - p);
  }
  if (spec.weighting == Weighting::Threshold)
    value *= threshold_weight(spec.scheme, u);
  return value;
}

// One Gauss-Legendre panel with the forecast CDF evaluated at its nodes.
struct Panel {
  double a;
  double b;
  int n;
  std::vector<double> u;
  std::vector<double> w;
  std::vector<double> p;
};

// Caches panels for one forecast so that specs sharing a panel (CRPS and
// ACPS(0.5), or the side without the pivot) evaluate the CDF once.
class PanelCache {
public:
  explicit PanelCache(const PredictiveDistribution &forecast) : forecast_(forecast) {}

  const Panel &get(double a, double b, int n) {
    const auto key = std::make_tuple(a, b, n);
    if (const auto it = panels_.find(key); it != panels_.end())
      return it->second;
    const QuadratureRule &ref = reference_gauss_legendre(n);
    Panel panel{a, b, n, {}, {}, {}};
    panel.u.resize(n);
    panel.w.resize(n);
    panel.p.resize(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int i = 0; i < n; ++i) {
      panel.u[i] = mid + half * ref.nodes[i];
      panel.w[i] = half * ref.weights[i];
      panel.p[i] = forecast_.cdf(panel.u[i]);
    }
    return panels_.emplace(key, std::move(panel)).first->second;
  }

private:
  const PredictiveDistribution &forecast_;
  std::map<std::tuple<double, double, int>, Panel> panels_;
};

// Break points where the integrand loses smoothness. Analytic forecasts break
// at the support bounds and, for ACPS with c != 0.5, at the pivot quantile
// P^-1(c) where the normalizing bracket switches. Empirical forecasts break at
// every draw, so each panel sees a constant CDF.
std::vector<double> kink_points(const PredictiveDistribution &forecast, const ScoreSpec &spec) {
  if (!forecast.is_analytic()) {
    const auto draws = forecast.empirical().draws();
    return {draws.begin(), draws.end()};
  }
  std::vector<double> out;
  const Support s = forecast.support();
  if (std::isfinite(s.lower))
    out.push_back(s.lower);
  if (std::isfinite(s.upper))
    out.push_back(s.upper);
  if (spec.family == ScoreFamily::Acps && spec.c != 0.5)
    out.push_back(forecast.quantile(spec.c));
  return out;
}

// Gauss-Legendre order for one panel. Analytic panels use N nodes. On an
// empirical panel the integrand is constant unless a threshold weight varies
// with u, so one node is exact; weighted panels get their share of the N
// nodes of the side, at least two.
int panel_nodes(bool analytic, const ScoreSpec &spec, double width, double side_length) {
  const int n = spec.grid.nodes_per_side;
  if (analytic)
    return n;
  if (spec.weighting != Weighting::Threshold || spec.scheme == WeightScheme::Uniform)
    return 1;
  return std::clamp(static_cast<int>(std::ceil(n * width / side_length)), 2, n);
}

double integrate_side(PanelCache &cache, const ScoreSpec &spec, Side side, double a, double b,
                      const std::vector<double> &kinks, bool analytic) {
  if (!(a < b))
    return 0.0;
  std::vector<double> cuts{a, b};
  for (const double k : kinks)
    if (k > a && k < b)
      cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const int n = panel_nodes(analytic, spec, cuts[j + 1] - cuts[j], b - a);
    const Panel &panel = cache.get(cuts[j], cuts[j + 1], n);
    double sum = 0.0;
    for (int i = 0; i < panel.n; ++i)
      sum += panel.w[i] * pointwise(spec, side, panel.p[i], panel.u[i]);
    total += sum;
  }
  return total;
}

ScoreValue score_with_cache(PanelCache &cache, const PredictiveDistribution &forecast, double y,
                            const ScoreSpec &spec) {
  spec.validate();
  if (!std::isfinite(y))
    throw DomainError("observation must be finite");
  const auto &g = spec.grid;
  const double split = std::clamp(y, g.u_min, g.u_max);
  const auto kinks = kink_points(forecast, spec);
  ScoreValue out;
  out.orientation = spec.orientation();
  out.truncated = y < g.u_min || y > g.u_max;
  out.value = integrate_side(cache, spec, Side::LeftOfY, g.u_min, split, kinks, forecast.is_analytic()) +
              integrate_side(cache, spec, Side::RightOfY, split, g.u_max, kinks, forecast.is_analytic());
  return out;
}

std::string lower(std::string_view text) {
  std::string s(text);
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

} // namespace

// ---------------------------------------------------------------------------
// Enum text forms

std::string to_string(ScoreFamily family) { return family == ScoreFamily::Acps ? "acps" : "crps"; }

std::string to_string(Weighting weighting) {
  switch (weighting) {
  case Weighting::None:
    return "none";
  case Weighting::Threshold:
    return "threshold";
  case Weighting::Quantile:
    return "quantile";
  }
  return "none";
}

std::string to_string(WeightScheme scheme) {
  switch (scheme) {
  case WeightScheme::Uniform:
    return "uniform";
  case WeightScheme::Center:
    return "center";
  case WeightScheme::Tails:
    return "tails";
  case WeightScheme::RightTail:
    return "right-tail";
  case WeightScheme::LeftTail:
    return "left-tail";
  }
  return "uniform";
}

std::string to_string(Orientation orientation) {
  return orientation == Orientation::Positive ? "positive" : "negative";
}

ScoreFamily parse_family(std::string_view text) {
  const auto s = lower(text);
  if (s == "acps")
    return ScoreFamily::Acps;
  if (s == "crps")
    return ScoreFamily::Crps;
  throw DomainError("unknown score family '" + std::string(text) + "' (expected acps or crps)");
}

Weighting parse_weighting(std::string_view text) {
  const auto s = lower(text);
  if (s == "none")
    return Weighting::None;
  if (s == "threshold")
    return Weighting::Threshold;
  if (s == "quantile")
    return Weighting::Quantile;
  throw DomainError("unknown weighting '" + std::string(text) + "' (expected none, threshold or quantile)");
}

WeightScheme parse_scheme(std::string_view text) {
  const auto s = lower(text);
  if (s == "uniform")
    return WeightScheme::Uniform;
  if (s == "center")
    return WeightScheme::Center;
  if (s == "tails")
    return WeightScheme::Tails;
  if (s == "right-tail" || s == "right_tail" || s == "right")
    return WeightScheme::RightTail;
  if (s == "left-tail" || s == "left_tail" || s == "left")
    return WeightScheme::LeftTail;
  throw DomainError("unknown weight scheme '" + std::string(text) + "'");
}

Orientation parse_orientation(std::string_view text) {
  const auto s = lower(text);
  if (s == "positive")
    return Orientation::Positive;
  if (s == "negative")
    return Orientation::Negative;
  throw DomainError("unknown orientation '" + std::string(text) + "'");
}

void ScoreSpec::validate() const {
  if (family == ScoreFamily::Acps && !(c > 0.0 && c < 1.0))
    throw DomainError("asymmetry level c must lie in (0,1)");
  grid.validate();
}

std::vector<double> default_c_values() { return {0.05, 0.275, 0.5, 0.725, 0.95}; }

std::string ScoreSpec::label() const {
  std::ostringstream os;
  if (weighting == Weighting::Threshold)
    os << 't';
  else if (weighting == Weighting::Quantile)
    os << 'q';
  if (family == ScoreFamily::Crps) {
    os << "CRPS";
  } else {
    os << "ACPS(" << c << ")";
  }
  if (weighting != Weighting::None)
    os << ' ' << to_string(scheme);
  return os.str();
}

// ---------------------------------------------------------------------------
// Pointwise pieces

double acps_integrand(double p, Side side, double c) {
  const double bracket = p > c ? 1.0 / ((1.0 - c) * (1.0 - c)) : 1.0 / (c * c);
  if (side == Side::LeftOfY)
    return (c * c - p * p) * bracket;
  const double q = 1.0 - p;
  return ((1.0 - c) * (1.0 - c) - q * q) * bracket;
}

double threshold_weight(WeightScheme scheme, double x) {
  switch (scheme) {
  case WeightScheme::Uniform:
    return 1.0;
  case WeightScheme::Center:
    return std_normal_pdf(x);
  case WeightScheme::Tails:
    return 1.0 - std_normal_pdf(x) / std_normal_pdf(0.0);
  case WeightScheme::RightTail:
    return std_normal_cdf(x);
  case WeightScheme::LeftTail:
    return 1.0 - std_normal_cdf(x);
  }
  return 1.0;
}

double quantile_weight(WeightScheme scheme, double alpha) {
  switch (scheme) {
  case WeightScheme::Uniform:
    return 1.0;
  case WeightScheme::Center:
    return alpha * (1.0 - alpha);
  case WeightScheme::Tails:
    return (2.0 * alpha - 1.0) * (2.0 * alpha - 1.0);
  case WeightScheme::RightTail:
    return alpha * alpha;
  case WeightScheme::LeftTail:
    return (1.0 - alpha) * (1.0 - alpha);
  }
  return 1.0;
}

// ---------------------------------------------------------------------------
// Scores

ScoreValue score(const PredictiveDistribution &forecast, double y, const ScoreSpec &spec) {
  PanelCache cache(forecast);
  return score_with_cache(cache, forecast, y, spec);
}

ScoreValue weighted_score(const PredictiveDistribution &forecast, double y, const ScoreSpec &spec) {
  return score(forecast, y, spec);
}

ScoreValue acps(const PredictiveDistribution &forecast, double y, double c, const QuadratureGrid &grid) {
  return score(forecast, y, ScoreSpec::acps(c, grid));
}

ScoreValue crps(const PredictiveDistribution &forecast, double y, const QuadratureGrid &grid) {
  return score(forecast, y, ScoreSpec::crps(grid));
}

std::vector<ScoreValue> score_batch(const PredictiveDistribution &forecast, double y,
                                    std::span<const ScoreSpec> specs) {
  PanelCache cache(forecast);
  std::vector<ScoreValue> out;
  out.reserve(specs.size());
  for (const auto &spec : specs)
    out.push_back(score_with_cache(cache, forecast, y, spec));
  return out;
}

ScoreValue average_score(std::span<const PredictiveDistribution> forecasts, std::span<const double> ys,
                         const ScoreSpec &spec) {
  if (ys.empty())
    throw DomainError("average_score needs at least one observation");
  if (forecasts.size() != 1 && forecasts.size() != ys.size())
    throw DomainError("average_score: " + std::to_string(forecasts.size()) + " forecasts for " +
                      std::to_string(ys.size()) + " observations");
  ScoreValue out;
  out.orientation = spec.orientation();
  double sum = 0.0;
  for (std::size_t t = 0; t < ys.size(); ++t) {
    const auto &f = forecasts.size() == 1 ? forecasts[0] : forecasts[t];
    const ScoreValue s = score(f, ys[t], spec);
    sum += s.value;
    out.truncated = out.truncated || s.truncated;
  }
  out.value = sum / static_cast<double>(ys.size());
  return out;
}

std::vector<ModelRank> rank_models(std::span<const std::pair<std::string, ScoreValue>> avg_scores) {
  if (avg_scores.empty())
    return {};
  const Orientation orientation = avg_scores.front().second.orientation;
  for (const auto &[id, v] : avg_scores)
    if (v.orientation != orientation)
      throw DomainError("rank_models: mixed score orientations");
  std::vector<std::size_t> order(avg_scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const double a = avg_scores[i].second.value;
    const double b = avg_scores[j].second.value;
    return orientation == Orientation::Positive ? a > b : a < b;
  });
  std::vector<ModelRank> out(avg_scores.size());
  for (std::size_t r = 0; r < order.size(); ++r)
    out[order[r]] = {avg_scores[order[r]].first, static_cast<int>(r + 1)};
  return out;
}

// ---------------------------------------------------------------------------
// Grids

namespace {

QuadratureGrid grid_from_range(double q_lo, double q_hi, double y_lo, double y_hi, int nodes) {
  double margin = 0.5 * (q_hi - q_lo);
  if (!(margin > 0.0))
    margin = 0.5 * std::max(1.0, std::abs(q_lo));
  QuadratureGrid g;
  g.u_min = std::min(q_lo, y_lo) - margin;
  g.u_max = std::max(q_hi, y_hi) + margin;
  g.nodes_per_side = nodes;
  g.validate();
  return g;
}

} // namespace

QuadratureGrid default_grid(const PredictiveDistribution &forecast, double y, int nodes_per_side) {
  if (!std::isfinite(y))
    throw DomainError("observation must be finite");
  return grid_from_range(forecast.quantile(0.001), forecast.quantile(0.999), y, y, nodes_per_side);
}

QuadratureGrid shared_grid(std::span<const PredictiveDistribution> forecasts, std::span<const double> ys,
                           int nodes_per_side) {
  if (forecasts.empty())
    throw DomainError("shared_grid needs at least one forecast");
  double q_lo = std::numeric_limits<double>::infinity();
  double q_hi = -q_lo;
  for (const auto &f : forecasts) {
    q_lo = std::min(q_lo, f.quantile(0.001));
    q_hi = std::max(q_hi, f.quantile(0.999));
  }
  double y_lo = q_lo;
  double y_hi = q_hi;
  for (const double y : ys) {
    if (!std::isfinite(y))
      throw DomainError("observation must be finite");
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  }
  return grid_from_range(q_lo, q_hi, y_lo, y_hi, nodes_per_side);
}

} // namespace acps
