#pragma once

#include "acps/distributions.hpp"
#include "acps/quadrature.hpp"

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acps {

enum class ScoreFamily { Acps, Crps };
enum class Weighting { None, Threshold, Quantile };
enum class WeightScheme { Uniform, Center, Tails, RightTail, LeftTail };
/// Positive: larger is better (ACPS). Negative: smaller is better (CRPS).
enum class Orientation { Positive, Negative };
enum class Side { LeftOfY, RightOfY };

std::string to_string(ScoreFamily family);
std::string to_string(Weighting weighting);
std::string to_string(WeightScheme scheme);
std::string to_string(Orientation orientation);
ScoreFamily parse_family(std::string_view text);
Weighting parse_weighting(std::string_view text);
WeightScheme parse_scheme(std::string_view text);
Orientation parse_orientation(std::string_view text);

/// Which score to compute and on which grid.
struct ScoreSpec {
  ScoreFamily family = ScoreFamily::Acps;
  /// Asymmetry pivot in (0,1); unused by the CRPS family.
  double c = 0.5;
  Weighting weighting = Weighting::None;
  WeightScheme scheme = WeightScheme::Uniform;
  QuadratureGrid grid;

  static ScoreSpec acps(double c, QuadratureGrid grid = {}) { return {ScoreFamily::Acps, c, Weighting::None, WeightScheme::Uniform, grid}; }
  static ScoreSpec crps(QuadratureGrid grid = {}) { return {ScoreFamily::Crps, 0.5, Weighting::None, WeightScheme::Uniform, grid}; }

  ScoreSpec with_grid(const QuadratureGrid &g) const {
    ScoreSpec out = *this;
    out.grid = g;
    return out;
  }

  /// Throws DomainError for c outside (0,1) or an invalid grid.
  void validate() const;
  Orientation orientation() const {
    return family == ScoreFamily::Acps ? Orientation::Positive : Orientation::Negative;
  }
  /// "CRPS", "ACPS(0.05)", "tACPS(0.95) right-tail", "qCRPS center", ...
  std::string label() const;
};

/// The asymmetry levels evaluated by default: 0.05, 0.275, 0.5, 0.725, 0.95.
std::vector<double> default_c_values();

struct ScoreValue {
  double value = 0.0;
  Orientation orientation = Orientation::Positive;
  /// The observation fell outside [u_min, u_max]; the empty side contributed 0.
  bool truncated = false;
};

/// Pointwise ACPS integrand at P(u) = p, before any domain weighting.
double acps_integrand(double p, Side side, double c);

/// Domain weight w(x) over the outcome axis.
double threshold_weight(WeightScheme scheme, double x);
/// Weight v(alpha) over the probability axis, alpha in [0,1].
double quantile_weight(WeightScheme scheme, double alpha);

/// Asymmetric continuous probability score, positively oriented. Computed by
/// Gauss-Legendre quadrature on [u_min, y] and [y, u_max].
ScoreValue acps(const PredictiveDistribution &forecast, double y, double c, const QuadratureGrid &grid);

/// Classical CRPS, the integral of (P(u) - 1{y <= u})^2, negatively oriented.
ScoreValue crps(const PredictiveDistribution &forecast, double y, const QuadratureGrid &grid);

/// Any family/weighting combination. Threshold weighting multiplies the
/// integrand by w(u). Quantile-weighted ACPS is evaluated in the outcome
/// domain through alpha = P(u), which removes the 1/p(P^-1(alpha)) factor and
/// so also works for empirical forecasts. Quantile-weighted CRPS uses the
/// equivalent outcome-domain form of the quantile-score integral.
ScoreValue weighted_score(const PredictiveDistribution &forecast, double y, const ScoreSpec &spec);

/// Same as weighted_score; the name used by generic callers.
ScoreValue score(const PredictiveDistribution &forecast, double y, const ScoreSpec &spec);

/// Evaluates several specs for one (forecast, y) pair, reusing CDF
/// evaluations on the quadrature segments the specs have in common.
std::vector<ScoreValue> score_batch(const PredictiveDistribution &forecast, double y, std::span<const ScoreSpec> specs);

/// Mean score over observations. `forecasts` holds one forecast per
/// observation or a single forecast applied to all of them.
ScoreValue average_score(std::span<const PredictiveDistribution> forecasts, std::span<const double> ys,
                         const ScoreSpec &spec);

struct ModelRank {
  std::string model_id;
  int rank = 0;
};

/// Rank 1 is the best model under the shared orientation; exact ties keep
/// listing order. Throws DomainError on mixed orientations.
std::vector<ModelRank> rank_models(std::span<const std::pair<std::string, ScoreValue>> avg_scores);

/// Truncation bounds for one forecast and observation:
/// [min(y, q(0.001)) - m, max(y, q(0.999)) + m] with m = (q(0.999) - q(0.001)) / 2.
QuadratureGrid default_grid(const PredictiveDistribution &forecast, double y, int nodes_per_side = 128);

/// One grid covering the quantile ranges of all forecasts and all
/// observations, for comparisons between models.
QuadratureGrid shared_grid(std::span<const PredictiveDistribution> forecasts, std::span<const double> ys,
                           int nodes_per_side = 128);

} // namespace acps
