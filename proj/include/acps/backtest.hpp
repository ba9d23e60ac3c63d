#pragma once

#include "acps/errors.hpp"
#include "acps/inference.hpp"
#include "acps/models.hpp"
#include "acps/scoring.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acps {

/// A univariate series with one label per observation (ISO-8601 date or
/// integer index).
struct Series {
  std::vector<std::string> timestamps;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
};

struct BacktestConfig {
  int window = 0;
  std::vector<int> horizons{1};
  std::vector<ModelSpec> models;
  /// Score templates; grids are resolved per (vintage, horizon).
  std::vector<ScoreSpec> score_specs;
  std::string benchmark;
  int draws = 500;
  std::uint64_t seed = 1;
  /// Evaluate only the last n admissible vintages; all when unset.
  std::optional<int> vintages;
  /// One grid for every vintage instead of the pooled per-vintage grid.
  std::optional<QuadratureGrid> fixed_grid;
  int nodes_per_side = 128;

  /// Every violated constraint, empty when the configuration is usable on a
  /// series of the given length.
  std::vector<std::string> validation_errors(std::size_t series_length) const;
  /// Throws ConfigError listing every violation.
  void validate(std::size_t series_length) const;
  int max_horizon() const;
};

/// Configuration rejected by validation; what() joins all violations.
class ConfigError : public DomainError {
public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string> &violations() const { return violations_; }

private:
  std::vector<std::string> violations_;
};

/// Scores of one model for one (vintage, horizon). The vintage is the index
/// of the last observation in the estimation window.
struct VintageRecord {
  int vintage = 0;
  int horizon = 0;
  std::string model_id;
  std::string target_timestamp;
  double realized = 0.0;
  QuadratureGrid grid;
  bool failed = false;
  std::string error;
  /// One per score spec; empty when failed.
  std::vector<ScoreValue> scores;
};

struct VintageTable {
  std::vector<std::string> model_ids;
  std::vector<ScoreSpec> score_specs;
  std::vector<int> horizons;
  std::vector<int> vintages;
  /// Ordered by horizon, then vintage, then model listing order.
  std::vector<VintageRecord> records;

  const VintageRecord &at(int horizon, int vintage, const std::string &model_id) const;
};

/// Index range of admissible vintages [first, last] for a series of length n.
std::pair<int, int> vintage_range(const BacktestConfig &cfg, std::size_t n);

/// Refits every model on every rolling window, draws h-step predictive
/// samples and scores them on a grid shared by all models of the
/// (vintage, horizon). A model that fails on a window has its cell marked
/// failed; the run continues.
VintageTable run_backtest(const Series &series, const BacktestConfig &cfg);

enum class DmStatus { Computed, Benchmark, TooFewVintages };

std::string to_string(DmStatus status);

struct ModelSummary {
  std::string model_id;
  /// Mean over the model's successful vintages; NaN when there are none.
  double average = 0.0;
  std::size_t n_scored = 0;
  /// 0 when the model has no successful vintage.
  int rank = 0;
  DmStatus dm_status = DmStatus::TooFewVintages;
  /// Model (first) against the benchmark (second) on common vintages.
  DmResult dm;
  std::string stars;
};

struct RankingRow {
  int horizon = 0;
  std::size_t spec_index = 0;
  ScoreSpec spec;
  std::vector<ModelSummary> models;
};

struct RankingReport {
  std::string benchmark;
  std::vector<std::string> model_ids;
  std::vector<RankingRow> rows;
};

/// Averages, ranks and Diebold-Mariano tests against the benchmark for
/// every (horizon, score spec). DM cells need at least 10 common vintages.
RankingReport ranking_report(const VintageTable &table, const std::string &benchmark);

struct TraceEntry {
  int vintage = 0;
  std::string target_timestamp;
  std::string model_id;
};

/// Best model per vintage under one score spec; ties go to the first listed
/// model and failed cells are skipped.
std::vector<TraceEntry> best_model_trace(const VintageTable &table, int horizon, std::size_t spec_index);

/// Relative frequency of each model in the trace, in the order of
/// `model_ids` (models never best get 0). Without ids, order of first
/// appearance.
std::vector<std::pair<std::string, double>> best_model_frequency(const std::vector<TraceEntry> &trace,
                                                                 const std::vector<std::string> &model_ids = {});

} // namespace acps
