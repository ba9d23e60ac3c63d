#include "acps/backtest.hpp"

#include "acps/errors.hpp"
#include "acps/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace acps {

namespace {

std::string join_violations(const std::vector<std::string> &violations) {
  std::ostringstream os;
  os << "invalid configuration:";
  for (const auto &v : violations)
    os << "\n  - " << v;
  return os.str();
}

bool better(double a, double b, Orientation o) { return o == Orientation::Positive ? a > b : a < b; }

} // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : DomainError(join_violations(violations)), violations_(std::move(violations)) {}

int BacktestConfig::max_horizon() const {
  return horizons.empty() ? 0 : *std::max_element(horizons.begin(), horizons.end());
}

std::vector<std::string> BacktestConfig::validation_errors(std::size_t series_length) const {
  std::vector<std::string> errs;
  if (window < 1)
    errs.push_back("window must be a positive integer, got " + std::to_string(window));
  if (horizons.empty())
    errs.push_back("at least one horizon is required");
  std::set<int> seen_h;
  for (int h : horizons) {
    if (h < 1)
      errs.push_back("horizons must be positive, got " + std::to_string(h));
    else if (!seen_h.insert(h).second)
      errs.push_back("duplicate horizon " + std::to_string(h));
  }
  if (models.empty())
    errs.push_back("at least one model is required");
  std::set<std::string> ids;
  for (const auto &m : models) {
    if (m.id.empty()) {
      errs.push_back("model id must not be empty");
    } else if (!ids.insert(m.id).second) {
      errs.push_back("duplicate model id '" + m.id + "'");
    }
    try {
      m.validate();
    } catch (const std::exception &e) {
      errs.push_back("model '" + m.id + "': " + e.what());
    }
  }
  if (benchmark.empty())
    errs.push_back("benchmark model is required");
  else if (!ids.contains(benchmark))
    errs.push_back("benchmark '" + benchmark + "' is not among the models");
  if (score_specs.empty())
    errs.push_back("at least one score spec is required");
  for (const auto &s : score_specs) {
    try {
      s.validate();
    } catch (const std::exception &e) {
      errs.push_back("score '" + s.label() + "': " + e.what());
    }
  }
  if (draws < 1)
    errs.push_back("draws must be a positive integer, got " + std::to_string(draws));
  if (nodes_per_side < 8)
    errs.push_back("nodes_per_side must be at least 8, got " + std::to_string(nodes_per_side));
  if (fixed_grid) {
    try {
      fixed_grid->validate();
    } catch (const std::exception &e) {
      errs.push_back(std::string("grid: ") + e.what());
    }
  }
  const long long n = static_cast<long long>(series_length);
  const long long max_h = max_horizon();
  if (window >= 1 && max_h >= 1) {
    if (window >= n - max_h) {
      errs.push_back("window " + std::to_string(window) + " must be smaller than the series length " +
                     std::to_string(n) + " minus the largest horizon " + std::to_string(max_h));
    } else if (vintages) {
      const long long available = n - max_h - window + 1;
      if (*vintages < 1 || *vintages > available)
        errs.push_back("vintages must be between 1 and " + std::to_string(available) + ", got " +
                       std::to_string(*vintages));
    }
  } else if (vintages && *vintages < 1) {
    errs.push_back("vintages must be positive, got " + std::to_string(*vintages));
  }
  return errs;
}

void BacktestConfig::validate(std::size_t series_length) const {
  auto errs = validation_errors(series_length);
  if (!errs.empty())
    throw ConfigError(std::move(errs));
}

const VintageRecord &VintageTable::at(int horizon, int vintage, const std::string &model_id) const {
  const auto hi = std::find(horizons.begin(), horizons.end(), horizon);
  const auto vi = std::find(vintages.begin(), vintages.end(), vintage);
  const auto mi = std::find(model_ids.begin(), model_ids.end(), model_id);
  if (hi == horizons.end() || vi == vintages.end() || mi == model_ids.end())
    throw DomainError("no vintage table cell for horizon " + std::to_string(horizon) + ", vintage " +
                      std::to_string(vintage) + ", model '" + model_id + "'");
  const std::size_t idx =
      (static_cast<std::size_t>(hi - horizons.begin()) * vintages.size() + (vi - vintages.begin())) *
          model_ids.size() +
      (mi - model_ids.begin());
  return records.at(idx);
}

std::pair<int, int> vintage_range(const BacktestConfig &cfg, std::size_t n) {
  int first = cfg.window - 1;
  const int last = static_cast<int>(n) - 1 - cfg.max_horizon();
  if (cfg.vintages)
    first = std::max(first, last - *cfg.vintages + 1);
  return {first, last};
}

VintageTable run_backtest(const Series &series, const BacktestConfig &cfg) {
  cfg.validate(series.size());
  for (std::size_t i = 0; i < series.size(); ++i)
    if (!std::isfinite(series.values[i]))
      throw DomainError("series value at position " + std::to_string(i) + " is not finite");

  VintageTable table;
  for (const auto &m : cfg.models)
    table.model_ids.push_back(m.id);
  table.score_specs = cfg.score_specs;
  table.horizons = cfg.horizons;
  const auto [first, last] = vintage_range(cfg, series.size());
  for (int t = first; t <= last; ++t)
    table.vintages.push_back(t);

  const std::size_t n_m = cfg.models.size();
  const std::size_t n_v = table.vintages.size();
  table.records.resize(cfg.horizons.size() * n_v * n_m);

  std::vector<ScoreSpec> specs = cfg.score_specs;
  for (std::size_t vi = 0; vi < n_v; ++vi) {
    const int t = table.vintages[vi];
    const std::span<const double> window(series.values.data() + (t - cfg.window + 1), cfg.window);

    std::vector<std::optional<Posterior>> fits(n_m);
    std::vector<std::uint64_t> fit_seeds(n_m);
    std::vector<std::string> fit_errors(n_m);
    for (std::size_t mi = 0; mi < n_m; ++mi) {
      const auto &model = cfg.models[mi];
      fit_seeds[mi] = derive_seed(cfg.seed, static_cast<std::uint64_t>(t), hash_key(model.id));
      try {
        fits[mi] = fit_model(model, window, fit_seeds[mi]);
      } catch (const std::exception &e) {
        fit_errors[mi] = std::string("fit failed: ") + e.what();
      }
    }

    for (std::size_t hi = 0; hi < cfg.horizons.size(); ++hi) {
      const int h = cfg.horizons[hi];
      const double y = series.values[t + h];
      std::vector<std::optional<PredictiveDistribution>> forecasts(n_m);
      std::vector<std::string> errors = fit_errors;
      for (std::size_t mi = 0; mi < n_m; ++mi) {
        if (!fits[mi])
          continue;
        try {
          auto draws = predictive_draws(*fits[mi], window, h, cfg.draws, derive_seed(fit_seeds[mi], h));
          if (!std::all_of(draws.begin(), draws.end(), [](double x) { return std::isfinite(x); }))
            throw NumericalError("non-finite predictive draw");
          forecasts[mi] = PredictiveDistribution(EmpiricalCdf(std::move(draws)));
        } catch (const std::exception &e) {
          errors[mi] = std::string("forecast failed: ") + e.what();
        }
      }

      QuadratureGrid grid;
      if (cfg.fixed_grid) {
        grid = *cfg.fixed_grid;
      } else {
        std::vector<PredictiveDistribution> pooled;
        for (const auto &f : forecasts)
          if (f)
            pooled.push_back(*f);
        if (!pooled.empty()) {
          const double ys[] = {y};
          grid = shared_grid(pooled, ys, cfg.nodes_per_side);
        } else {
          grid = QuadratureGrid{y - 1.0, y + 1.0, cfg.nodes_per_side};
        }
      }
      for (auto &s : specs)
        s.grid = grid;

      for (std::size_t mi = 0; mi < n_m; ++mi) {
        VintageRecord &rec = table.records[(hi * n_v + vi) * n_m + mi];
        rec.vintage = t;
        rec.horizon = h;
        rec.model_id = cfg.models[mi].id;
        if (!series.timestamps.empty())
          rec.target_timestamp = series.timestamps[t + h];
        rec.realized = y;
        rec.grid = grid;
        if (forecasts[mi]) {
          try {
            rec.scores = score_batch(*forecasts[mi], y, specs);
          } catch (const std::exception &e) {
            errors[mi] = std::string("scoring failed: ") + e.what();
          }
        }
        if (!errors[mi].empty()) {
          rec.failed = true;
          rec.error = errors[mi];
          rec.scores.clear();
        }
      }
    }
  }
  return table;
}

std::string to_string(DmStatus status) {
  switch (status) {
  case DmStatus::Computed:
    return "computed";
  case DmStatus::Benchmark:
    return "benchmark";
  case DmStatus::TooFewVintages:
    return "not-computed";
  }
  throw DomainError("unknown DM status");
}

RankingReport ranking_report(const VintageTable &table, const std::string &benchmark) {
  const auto bench_it = std::find(table.model_ids.begin(), table.model_ids.end(), benchmark);
  if (bench_it == table.model_ids.end())
    throw DomainError("benchmark '" + benchmark + "' is not in the vintage table");
  const std::size_t bench = bench_it - table.model_ids.begin();
  const std::size_t n_m = table.model_ids.size();
  const std::size_t n_v = table.vintages.size();

  RankingReport report;
  report.benchmark = benchmark;
  report.model_ids = table.model_ids;
  for (std::size_t hi = 0; hi < table.horizons.size(); ++hi) {
    for (std::size_t si = 0; si < table.score_specs.size(); ++si) {
      RankingRow row;
      row.horizon = table.horizons[hi];
      row.spec_index = si;
      row.spec = table.score_specs[si];
      const Orientation orientation = row.spec.orientation();
      auto cell = [&](std::size_t vi, std::size_t mi) -> const VintageRecord & {
        return table.records[(hi * n_v + vi) * n_m + mi];
      };

      std::vector<std::pair<std::string, ScoreValue>> averages;
      std::vector<std::size_t> ranked;
      for (std::size_t mi = 0; mi < n_m; ++mi) {
        ModelSummary s;
        s.model_id = table.model_ids[mi];
        double sum = 0.0;
        for (std::size_t vi = 0; vi < n_v; ++vi) {
          const auto &rec = cell(vi, mi);
          if (!rec.failed) {
            sum += rec.scores[si].value;
            ++s.n_scored;
          }
        }
        s.average = s.n_scored > 0 ? sum / static_cast<double>(s.n_scored) : std::numeric_limits<double>::quiet_NaN();
        if (s.n_scored > 0) {
          averages.emplace_back(s.model_id, ScoreValue{s.average, orientation, false});
          ranked.push_back(mi);
        }

        if (mi == bench) {
          s.dm_status = DmStatus::Benchmark;
        } else {
          std::vector<double> own, base;
          for (std::size_t vi = 0; vi < n_v; ++vi) {
            const auto &a = cell(vi, mi);
            const auto &b = cell(vi, bench);
            if (!a.failed && !b.failed) {
              own.push_back(a.scores[si].value);
              base.push_back(b.scores[si].value);
            }
          }
          if (own.size() >= 10) {
            s.dm = dm_test(own, base, orientation);
            s.dm_status = DmStatus::Computed;
            s.stars = significance_stars(s.dm.p_value);
          }
        }
        row.models.push_back(std::move(s));
      }
      if (!averages.empty()) {
        const auto ranks = rank_models(averages);
        for (std::size_t k = 0; k < ranked.size(); ++k)
          row.models[ranked[k]].rank = ranks[k].rank;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

std::vector<TraceEntry> best_model_trace(const VintageTable &table, int horizon, std::size_t spec_index) {
  const auto hi_it = std::find(table.horizons.begin(), table.horizons.end(), horizon);
  if (hi_it == table.horizons.end())
    throw DomainError("horizon " + std::to_string(horizon) + " is not in the vintage table");
  if (spec_index >= table.score_specs.size())
    throw DomainError("score spec index out of range");
  const std::size_t hi = hi_it - table.horizons.begin();
  const std::size_t n_m = table.model_ids.size();
  const std::size_t n_v = table.vintages.size();
  const Orientation orientation = table.score_specs[spec_index].orientation();

  std::vector<TraceEntry> trace;
  for (std::size_t vi = 0; vi < n_v; ++vi) {
    const VintageRecord *best = nullptr;
    for (std::size_t mi = 0; mi < n_m; ++mi) {
      const auto &rec = table.records[(hi * n_v + vi) * n_m + mi];
      if (rec.failed)
        continue;
      if (!best || better(rec.scores[spec_index].value, best->scores[spec_index].value, orientation))
        best = &rec;
    }
    if (best)
      trace.push_back({best->vintage, best->target_timestamp, best->model_id});
  }
  return trace;
}

std::vector<std::pair<std::string, double>> best_model_frequency(const std::vector<TraceEntry> &trace,
                                                                 const std::vector<std::string> &model_ids) {
  if (trace.empty())
    throw DomainError("best-model trace is empty");
  std::vector<std::string> order = model_ids;
  for (const auto &e : trace)
    if (std::find(order.begin(), order.end(), e.model_id) == order.end())
      order.push_back(e.model_id);
  std::vector<std::pair<std::string, double>> out;
  for (const auto &id : order) {
    const auto count = std::count_if(trace.begin(), trace.end(), [&](const TraceEntry &e) { return e.model_id == id; });
    out.emplace_back(id, static_cast<double>(count) / static_cast<double>(trace.size()));
  }
  return out;
}

} // namespace acps
