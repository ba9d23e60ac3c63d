#include "acps/backtest.hpp"
#include "acps/errors.hpp"
#include "acps/random.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

namespace acps {
namespace {

Series ar1_series(std::size_t n, double beta, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  Series s;
  double y = 0.0;
  for (int i = 0; i < 100; ++i)
    y = beta * y + draw_normal(rng);
  for (std::size_t t = 0; t < n; ++t) {
    y = beta * y + draw_normal(rng);
    s.timestamps.push_back(std::to_string(t));
    s.values.push_back(y);
  }
  return s;
}

ModelSpec ar_model(const std::string &id, std::vector<int> lags) {
  ModelSpec m;
  m.id = id;
  m.kind = ModelKind::Ar;
  m.ar.lags = std::move(lags);
  m.mcmc.burn = 100;
  m.mcmc.keep = 300;
  return m;
}

BacktestConfig small_config() {
  BacktestConfig cfg;
  cfg.window = 80;
  cfg.horizons = {1};
  cfg.models = {ar_model("ar1", {1}), ar_model("wn", {})};
  cfg.score_specs = {ScoreSpec::crps(), ScoreSpec::acps(0.05), ScoreSpec::acps(0.5), ScoreSpec::acps(0.95)};
  cfg.benchmark = "wn";
  cfg.draws = 300;
  cfg.seed = 11;
  cfg.vintages = 20;
  return cfg;
}

TEST(BacktestConfig, ListsEveryViolation) {
  BacktestConfig cfg = small_config();
  cfg.window = 0;
  cfg.horizons = {1, 0};
  cfg.benchmark = "missing";
  cfg.draws = 0;
  const auto errs = cfg.validation_errors(200);
  EXPECT_EQ(errs.size(), 4u);
  try {
    cfg.validate(200);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError &e) {
    EXPECT_EQ(e.violations().size(), 4u);
    EXPECT_NE(std::string(e.what()).find("benchmark 'missing'"), std::string::npos);
  }
}

TEST(BacktestConfig, WindowMustLeaveRoomForHorizons) {
  BacktestConfig cfg = small_config();
  cfg.vintages.reset();
  cfg.horizons = {1, 5};
  EXPECT_TRUE(cfg.validation_errors(86).empty());
  EXPECT_FALSE(cfg.validation_errors(85).empty());
  cfg.vintages = 3;
  EXPECT_FALSE(cfg.validation_errors(86).empty());
  cfg.models.push_back(ar_model("ar1", {1}));
  EXPECT_FALSE(cfg.validation_errors(200).empty());
}

TEST(RunBacktest, OneModelOneVintageShape) {
  const Series s = ar1_series(120, 0.5, 1);
  BacktestConfig cfg = small_config();
  cfg.models = {ar_model("ar1", {1})};
  cfg.benchmark = "ar1";
  cfg.vintages = 1;
  const auto table = run_backtest(s, cfg);
  ASSERT_EQ(table.records.size(), 1u);
  EXPECT_EQ(table.records[0].scores.size(), cfg.score_specs.size());
  EXPECT_FALSE(table.records[0].failed);
}

TEST(RunBacktest, VintagesWindowsAndRealizations) {
  const Series s = ar1_series(120, 0.5, 2);
  BacktestConfig cfg = small_config();
  cfg.horizons = {1, 3};
  cfg.vintages.reset();
  const auto [first, last] = vintage_range(cfg, s.size());
  EXPECT_EQ(first, 79);
  EXPECT_EQ(last, 116);
  const auto table = run_backtest(s, cfg);
  EXPECT_EQ(table.vintages.size(), 38u);
  EXPECT_EQ(table.records.size(), 2u * 38u * 2u);
  for (const auto &r : table.records) {
    EXPECT_EQ(r.realized, s.values[r.vintage + r.horizon]);
    EXPECT_EQ(r.target_timestamp, s.timestamps[r.vintage + r.horizon]);
    EXPECT_LE(r.grid.u_min, r.realized);
    EXPECT_GE(r.grid.u_max, r.realized);
  }
  const auto &a = table.at(3, 100, "ar1");
  EXPECT_EQ(a.horizon, 3);
  EXPECT_EQ(a.vintage, 100);
  EXPECT_EQ(a.model_id, "ar1");
  EXPECT_THROW(table.at(2, 100, "ar1"), DomainError);
}

TEST(RunBacktest, SharedGridWithinVintage) {
  const Series s = ar1_series(120, 0.5, 3);
  const auto table = run_backtest(s, small_config());
  for (int t : table.vintages)
    EXPECT_EQ(table.at(1, t, "ar1").grid, table.at(1, t, "wn").grid);
}

TEST(RunBacktest, Deterministic) {
  const Series s = ar1_series(150, 0.6, 4);
  const auto a = run_backtest(s, small_config());
  const auto b = run_backtest(s, small_config());
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].grid, b.records[i].grid);
    for (std::size_t k = 0; k < a.records[i].scores.size(); ++k)
      EXPECT_EQ(a.records[i].scores[k].value, b.records[i].scores[k].value);
  }
  BacktestConfig other = small_config();
  other.seed = 12;
  const auto c = run_backtest(s, other);
  EXPECT_NE(a.records[0].scores[0].value, c.records[0].scores[0].value);
}

TEST(RunBacktest, FailureIsolation) {
  const Series s = ar1_series(150, 0.6, 5);
  const auto base = run_backtest(s, small_config());
  BacktestConfig cfg = small_config();
  // 75 lags leave too few observations in an 80-point window.
  std::vector<int> many(75);
  for (int i = 0; i < 75; ++i)
    many[i] = i + 1;
  cfg.models.insert(cfg.models.begin() + 1, ar_model("broken", many));
  const auto with_failure = run_backtest(s, cfg);
  for (int t : base.vintages) {
    const auto &f = with_failure.at(1, t, "broken");
    EXPECT_TRUE(f.failed);
    EXPECT_FALSE(f.error.empty());
    EXPECT_TRUE(f.scores.empty());
    for (const std::string id : {"ar1", "wn"}) {
      const auto &x = base.at(1, t, id);
      const auto &y = with_failure.at(1, t, id);
      EXPECT_FALSE(y.failed);
      EXPECT_EQ(x.grid, y.grid);
      for (std::size_t k = 0; k < x.scores.size(); ++k)
        EXPECT_EQ(x.scores[k].value, y.scores[k].value);
    }
  }
  const auto report = ranking_report(with_failure, "wn");
  for (const auto &row : report.rows) {
    EXPECT_EQ(row.models[1].rank, 0);
    EXPECT_EQ(row.models[1].n_scored, 0u);
    EXPECT_TRUE(std::isnan(row.models[1].average));
  }
}

TEST(RunBacktest, MonotoneWindowWithFixedGrid) {
  const Series s = ar1_series(150, 0.6, 6);
  BacktestConfig full = small_config();
  full.fixed_grid = QuadratureGrid{-12.0, 12.0, 128};
  full.models.push_back(ar_model("ar2", {1, 2}));
  BacktestConfig reduced = full;
  reduced.models.pop_back();
  const auto a = run_backtest(s, full);
  const auto b = run_backtest(s, reduced);
  for (int t : b.vintages)
    for (const std::string id : {"ar1", "wn"})
      for (std::size_t k = 0; k < full.score_specs.size(); ++k)
        EXPECT_EQ(a.at(1, t, id).scores[k].value, b.at(1, t, id).scores[k].value);
}

TEST(RankingReport, IdenticalModelsGiveUnitPValue) {
  const Series s = ar1_series(150, 0.6, 7);
  BacktestConfig cfg = small_config();
  cfg.models = {ar_model("a", {1})};
  cfg.benchmark = "a";
  auto table = run_backtest(s, cfg);
  // Duplicate every cell under a second id.
  VintageTable twin = table;
  twin.model_ids = {"a", "b"};
  twin.records.clear();
  for (const auto &r : table.records) {
    twin.records.push_back(r);
    VintageRecord copy = r;
    copy.model_id = "b";
    twin.records.push_back(copy);
  }
  const auto report = ranking_report(twin, "a");
  for (const auto &row : report.rows) {
    EXPECT_EQ(row.models[0].average, row.models[1].average);
    EXPECT_EQ(row.models[0].dm_status, DmStatus::Benchmark);
    ASSERT_EQ(row.models[1].dm_status, DmStatus::Computed);
    EXPECT_EQ(row.models[1].dm.p_value, 1.0);
    EXPECT_EQ(row.models[1].stars, "");
    EXPECT_EQ(row.models[0].rank, 1);
    EXPECT_EQ(row.models[1].rank, 2);
  }
}

TEST(RankingReport, TooFewVintagesSkipsDm) {
  const Series s = ar1_series(150, 0.6, 8);
  BacktestConfig cfg = small_config();
  cfg.vintages = 9;
  const auto report = ranking_report(run_backtest(s, cfg), "wn");
  for (const auto &row : report.rows) {
    EXPECT_EQ(row.models[0].dm_status, DmStatus::TooFewVintages);
    EXPECT_EQ(row.models[0].stars, "");
  }
  EXPECT_THROW(ranking_report(run_backtest(s, cfg), "nope"), DomainError);
}

TEST(RankingReport, AcpsHalfMatchesCrps) {
  const Series s = ar1_series(200, 0.7, 9);
  BacktestConfig cfg = small_config();
  cfg.models.push_back(ar_model("ar2", {1, 2}));
  cfg.vintages = 40;
  const auto table = run_backtest(s, cfg);
  const auto report = ranking_report(table, "wn");
  const auto &crps_row = report.rows[0];
  const auto &half_row = report.rows[2];
  ASSERT_EQ(half_row.spec.c, 0.5);
  for (std::size_t m = 0; m < crps_row.models.size(); ++m) {
    EXPECT_EQ(crps_row.models[m].rank, half_row.models[m].rank);
    EXPECT_NEAR(half_row.models[m].dm.statistic, crps_row.models[m].dm.statistic, 1e-6);
  }
  const auto t0 = best_model_trace(table, 1, 0);
  const auto t2 = best_model_trace(table, 1, 2);
  ASSERT_EQ(t0.size(), t2.size());
  for (std::size_t i = 0; i < t0.size(); ++i)
    EXPECT_EQ(t0[i].model_id, t2[i].model_id);
  for (const auto &row : report.rows) {
    EXPECT_EQ(std::count_if(row.models.begin(), row.models.end(), [](const auto &m) { return m.rank == 1; }), 1);
  }
}

TEST(RunBacktest, TrueModelBeatsWhiteNoise) {
  const Series s = ar1_series(300, 0.8, 10);
  BacktestConfig cfg = small_config();
  cfg.window = 150;
  cfg.vintages = 100;
  const auto table = run_backtest(s, cfg);
  const auto report = ranking_report(table, "wn");
  for (const auto &row : report.rows) {
    EXPECT_EQ(row.models[0].rank, 1) << row.spec.label();
    EXPECT_EQ(row.models[0].dm_status, DmStatus::Computed);
  }
  const auto &crps_row = report.rows[0];
  EXPECT_LT(crps_row.models[0].dm.statistic, 0.0);
  EXPECT_EQ(crps_row.models[0].stars, "***");
  const auto trace = best_model_trace(table, 1, 0);
  const auto freq = best_model_frequency(trace, table.model_ids);
  EXPECT_EQ(freq[0].first, "ar1");
  EXPECT_GT(freq[0].second, 0.5);
}

VintageTable synthetic_table(const std::vector<std::vector<double>> &scores_by_model) {
  VintageTable t;
  t.horizons = {1};
  t.score_specs = {ScoreSpec::crps()};
  const std::size_t n_v = scores_by_model[0].size();
  for (std::size_t m = 0; m < scores_by_model.size(); ++m)
    t.model_ids.push_back("m" + std::to_string(m));
  for (std::size_t v = 0; v < n_v; ++v) {
    t.vintages.push_back(static_cast<int>(v));
    for (std::size_t m = 0; m < scores_by_model.size(); ++m) {
      VintageRecord r;
      r.vintage = static_cast<int>(v);
      r.horizon = 1;
      r.model_id = t.model_ids[m];
      r.scores = {ScoreValue{scores_by_model[m][v], Orientation::Negative, false}};
      t.records.push_back(r);
    }
  }
  return t;
}

TEST(BestModelTrace, Examples) {
  const auto single = best_model_trace(synthetic_table({{1.0, 2.0, 3.0}}), 1, 0);
  ASSERT_EQ(single.size(), 3u);
  for (const auto &e : single)
    EXPECT_EQ(e.model_id, "m0");

  const auto dominant = best_model_trace(synthetic_table({{2.0, 2.0, 2.0}, {1.0, 1.5, 0.5}}), 1, 0);
  for (const auto &e : dominant)
    EXPECT_EQ(e.model_id, "m1");

  const auto tie = best_model_trace(synthetic_table({{1.0}, {1.0}}), 1, 0);
  EXPECT_EQ(tie[0].model_id, "m0");
  EXPECT_THROW(best_model_trace(synthetic_table({{1.0}}), 2, 0), DomainError);
}

TEST(BestModelFrequency, Examples) {
  const std::vector<TraceEntry> constant = {{0, "", "a"}, {1, "", "a"}};
  const auto f1 = best_model_frequency(constant, {"a", "b"});
  EXPECT_EQ(f1[0].second, 1.0);
  EXPECT_EQ(f1[1].second, 0.0);

  const std::vector<TraceEntry> alternating = {{0, "", "a"}, {1, "", "b"}, {2, "", "a"}, {3, "", "b"}};
  const auto f2 = best_model_frequency(alternating);
  EXPECT_EQ(f2[0].second, 0.5);
  EXPECT_EQ(f2[1].second, 0.5);

  std::vector<TraceEntry> mixed;
  for (int i = 0; i < 37; ++i)
    mixed.push_back({i, "", std::string(1, static_cast<char>('a' + (i * i) % 5))});
  double total = 0.0;
  for (const auto &[id, f] : best_model_frequency(mixed))
    total += f;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW(best_model_frequency({}), DomainError);
}

} // namespace
} // namespace acps
