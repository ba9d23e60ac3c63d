#include "acps/cli.hpp"

#include "acps/backtest.hpp"
#include "acps/config.hpp"
#include "acps/inference.hpp"
#include "acps/io.hpp"
#include "acps/simulation.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

namespace acps {

namespace {

struct CommonOptions {
  std::uint64_t seed = 1;
  std::string format = "csv";
  std::string output;
};

void add_common(CLI::App *cmd, CommonOptions &o) {
  cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  cmd->add_option("--format", o.format, "Output format: csv or json")->capture_default_str();
  cmd->add_option("--output,-o", o.output, "Output file (default: standard output)");
}

/// Writes through `out` or to the file named by `path`.
template <class F>
void emit(const std::string &path, std::ostream &out, F &&write) {
  if (path.empty()) {
    write(out);
    return;
  }
  std::ofstream file(path);
  if (!file)
    throw InputError("cannot open '" + path + "' for writing");
  write(file);
  if (!file)
    throw std::runtime_error("failed writing '" + path + "'");
}

struct ForecastSource {
  std::string draws_file;
  std::string draws_dir;
  std::string analytic;

  void add(CLI::App *cmd) {
    cmd->add_option("--forecast-draws", draws_file, "Single-column draw file used for every period");
    cmd->add_option("--forecast-dir", draws_dir, "Directory with one draw file per period, in name order");
    cmd->add_option("--analytic", analytic, "Analytic forecast, e.g. normal:0,1 or t:0,1,5");
  }

  /// One forecast per realization, or a single forecast for all of them.
  std::vector<PredictiveDistribution> load(std::size_t n_realizations) const {
    const int given = !draws_file.empty() + !draws_dir.empty() + !analytic.empty();
    if (given != 1)
      throw DomainError("exactly one of --forecast-draws, --forecast-dir or --analytic is required");
    if (!analytic.empty())
      return {PredictiveDistribution(parse_analytic(analytic))};
    if (!draws_file.empty())
      return {PredictiveDistribution(EmpiricalCdf(read_values(draws_file)))};
    auto sets = read_draw_directory(draws_dir);
    if (sets.size() != n_realizations)
      throw DomainError("'" + draws_dir + "' holds " + std::to_string(sets.size()) + " draw files but there are " +
                        std::to_string(n_realizations) + " realizations");
    std::vector<PredictiveDistribution> out;
    for (auto &s : sets)
      out.emplace_back(EmpiricalCdf(std::move(s)));
    return out;
  }
};

const PredictiveDistribution &forecast_for(const std::vector<PredictiveDistribution> &f, std::size_t i) {
  return f.size() == 1 ? f[0] : f[i];
}

// ---------------------------------------------------------------------------
// score

struct ScoreOptions {
  CommonOptions common;
  ForecastSource source;
  std::string realizations;
  std::string family = "acps";
  std::vector<double> c;
  std::string weighting = "none";
  std::string scheme = "uniform";
  std::optional<double> u_min;
  std::optional<double> u_max;
  int nodes = 128;
  std::string model_id = "forecast";
};

int cmd_score(const ScoreOptions &o, std::ostream &out) {
  const OutputFormat format = parse_output_format(o.common.format);
  ScoreSpec base;
  base.family = parse_family(o.family);
  base.weighting = parse_weighting(o.weighting);
  base.scheme = parse_scheme(o.scheme);
  if (o.u_min.has_value() != o.u_max.has_value())
    throw DomainError("--umin and --umax must be given together");
  std::optional<QuadratureGrid> fixed;
  if (o.u_min) {
    fixed = QuadratureGrid{*o.u_min, *o.u_max, o.nodes};
    fixed->validate();
  }
  QuadratureGrid{-1.0, 1.0, o.nodes}.validate();

  std::vector<ScoreSpec> specs;
  if (base.family == ScoreFamily::Crps) {
    if (!o.c.empty())
      throw DomainError("--c does not apply to the crps family");
    specs.push_back(base);
  } else {
    for (double c : o.c.empty() ? default_c_values() : o.c) {
      ScoreSpec s = base;
      s.c = c;
      if (!(c > 0.0 && c < 1.0))
        throw DomainError("asymmetry level c = " + format_number(c) + " is outside (0,1)");
      specs.push_back(s);
    }
  }

  const Series ys = read_realizations(o.realizations);
  const auto forecasts = o.source.load(ys.size());

  RecordTable table;
  table.columns = {"model_id", "index", "score_family", "c", "weighting", "scheme", "u_min",
                   "u_max", "N", "value", "orientation", "truncation_warning"};
  for (std::size_t i = 0; i < ys.size(); ++i) {
    const auto &f = forecast_for(forecasts, i);
    const QuadratureGrid grid = fixed ? *fixed : default_grid(f, ys.values[i], o.nodes);
    for (auto &s : specs)
      s.grid = grid;
    const auto values = score_batch(f, ys.values[i], specs);
    for (std::size_t k = 0; k < specs.size(); ++k) {
      std::vector<Field> row = {o.model_id, ys.timestamps[i]};
      for (auto &field : spec_fields(specs[k]))
        row.push_back(std::move(field));
      row.push_back(grid.u_min);
      row.push_back(grid.u_max);
      row.push_back(static_cast<long long>(grid.nodes_per_side));
      row.push_back(values[k].value);
      row.push_back(to_string(values[k].orientation));
      row.push_back(values[k].truncated);
      table.add(std::move(row));
    }
  }
  emit(o.common.output, out, [&](std::ostream &os) { write_records(os, table, format); });
  return kExitOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareOptions {
  CommonOptions common;
  std::vector<std::string> files;
  std::optional<int> bandwidth;
};

struct ScoreSeries {
  std::string model_id;
  ScoreSpec spec;
  Orientation orientation = Orientation::Positive;
  std::vector<std::string> index;
  std::vector<double> values;
};

/// Score records grouped by score spec, in order of first appearance.
std::vector<std::pair<std::string, ScoreSeries>> load_score_records(const std::string &path) {
  const CsvTable t = read_records(path);
  const std::size_t c_model = t.column("model_id"), c_index = t.column("index"), c_family = t.column("score_family"),
                    c_c = t.column("c"), c_weighting = t.column("weighting"), c_scheme = t.column("scheme"),
                    c_value = t.column("value"), c_orient = t.column("orientation");
  std::vector<std::pair<std::string, ScoreSeries>> groups;
  std::string model;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto &r = t.rows[i];
    const auto where = [&] { return path + ":" + std::to_string(t.lines[i]) + ": "; };
    if (model.empty())
      model = r[c_model];
    else if (r[c_model] != model)
      throw DomainError(where() + "file mixes models '" + model + "' and '" + r[c_model] + "'");
    const std::string key = r[c_family] + "|" + r[c_c] + "|" + r[c_weighting] + "|" + r[c_scheme];
    auto it = std::find_if(groups.begin(), groups.end(), [&](const auto &g) { return g.first == key; });
    if (it == groups.end()) {
      ScoreSeries s;
      s.model_id = model;
      try {
        s.spec.family = parse_family(r[c_family]);
        s.spec.weighting = parse_weighting(r[c_weighting]);
        s.spec.scheme = parse_scheme(r[c_scheme]);
        s.orientation = parse_orientation(r[c_orient]);
      } catch (const std::exception &e) {
        throw DomainError(where() + e.what());
      }
      if (s.spec.family == ScoreFamily::Acps && !parse_number(r[c_c], s.spec.c))
        throw DomainError(where() + "invalid c '" + r[c_c] + "'");
      groups.emplace_back(key, std::move(s));
      it = groups.end() - 1;
    }
    double v = 0.0;
    if (!parse_number(r[c_value], v))
      throw DomainError(where() + "invalid score value '" + r[c_value] + "'");
    it->second.index.push_back(r[c_index]);
    it->second.values.push_back(v);
  }
  if (groups.empty())
    throw DomainError("'" + path + "' contains no score records");
  return groups;
}

int cmd_compare(const CompareOptions &o, std::ostream &out) {
  const OutputFormat format = parse_output_format(o.common.format);
  const auto a = load_score_records(o.files.at(0));
  const auto b = load_score_records(o.files.at(1));
  RecordTable table;
  table.columns = {"model_1", "model_2", "score_family", "c", "weighting", "scheme", "T", "mean_diff",
                   "lrv", "bandwidth", "statistic", "p_value", "stars"};
  for (const auto &[key, s1] : a) {
    const auto it = std::find_if(b.begin(), b.end(), [&](const auto &g) { return g.first == key; });
    if (it == b.end())
      throw DomainError("score " + s1.spec.label() + " is missing from '" + o.files[1] + "'");
    const auto &s2 = it->second;
    if (s1.index != s2.index) {
      std::size_t k = 0;
      while (k < s1.index.size() && k < s2.index.size() && s1.index[k] == s2.index[k])
        ++k;
      throw DomainError("score " + s1.spec.label() + ": indices are misaligned at record " + std::to_string(k + 1) +
                        " (" + std::to_string(s1.index.size()) + " vs " + std::to_string(s2.index.size()) +
                        " records)");
    }
    if (s1.orientation != s2.orientation)
      throw DomainError("score " + s1.spec.label() + ": orientations differ between the files");
    if (s1.values.size() < 10)
      throw DomainError("score " + s1.spec.label() + ": the test needs at least 10 records, found " +
                        std::to_string(s1.values.size()));
    const DmResult r = dm_test(s1.values, s2.values, s1.orientation, o.bandwidth);
    std::vector<Field> row = {s1.model_id, s2.model_id};
    for (auto &f : spec_fields(s1.spec))
      row.push_back(std::move(f));
    row.push_back(static_cast<long long>(r.t));
    row.push_back(r.mean_diff);
    row.push_back(r.lrv);
    row.push_back(static_cast<long long>(r.bandwidth));
    row.push_back(r.statistic);
    row.push_back(r.p_value);
    row.push_back(significance_stars(r.p_value));
    table.add(std::move(row));
  }
  for (const auto &[key, s2] : b)
    if (std::find_if(a.begin(), a.end(), [&](const auto &g) { return g.first == key; }) == a.end())
      throw DomainError("score " + s2.spec.label() + " is missing from '" + o.files[0] + "'");
  emit(o.common.output, out, [&](std::ostream &os) { write_records(os, table, format); });
  return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOptions {
  CommonOptions common;
  std::string experiment;
  int n = 100;
  int draws = 500;
  int nodes = 128;
  std::string values = "rank";
};

int cmd_simulate(const SimulateOptions &o, std::ostream &out, std::ostream &err) {
  const OutputFormat format = parse_output_format(o.common.format);
  if (o.values != "rank" && o.values != "average")
    throw DomainError("--values must be rank or average");
  const Experiment e = make_experiment(o.experiment);
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run_simulation(e, o.n, o.draws, o.common.seed, o.nodes);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RecordTable table;
  table.columns = {"experiment", "score", "u_min", "u_max", "N"};
  for (const auto &c : e.candidates)
    table.columns.push_back(c.label());
  for (std::size_t row = 0; row < r.ranks.size(); ++row) {
    std::vector<Field> rec = {e.name, r.experiment.rows[row].label(), r.grid.u_min, r.grid.u_max,
                              static_cast<long long>(r.grid.nodes_per_side)};
    for (std::size_t k = 0; k < e.candidates.size(); ++k)
      rec.push_back(o.values == "rank" ? Field(static_cast<long long>(r.ranks[row][k])) : Field(r.averages[row][k]));
    table.add(std::move(rec));
  }
  emit(o.common.output, out, [&](std::ostream &os) { write_records(os, table, format); });
  err << "simulate: " << e.name << ", target " << e.target.label() << ", n = " << o.n << ", draws = " << o.draws
      << ", " << secs << " s\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// backtest

struct BacktestOptions {
  CommonOptions common;
  std::string series;
  std::string config;
  std::string out_dir;
  std::optional<int> window;
  std::vector<int> horizons;
  std::optional<int> vintages;
  std::optional<int> draws;
};

int cmd_backtest(const BacktestOptions &o, bool seed_given, std::ostream &err) {
  const OutputFormat format = parse_output_format(o.common.format);
  BacktestConfig cfg = load_backtest_config(o.config);
  if (seed_given)
    cfg.seed = o.common.seed;
  if (o.window)
    cfg.window = *o.window;
  if (!o.horizons.empty())
    cfg.horizons = o.horizons;
  if (o.vintages)
    cfg.vintages = *o.vintages;
  if (o.draws)
    cfg.draws = *o.draws;
  const Series series = read_series(o.series);
  cfg.validate(series.size());

  std::filesystem::create_directories(o.out_dir);
  const auto t0 = std::chrono::steady_clock::now();
  const VintageTable table = run_backtest(series, cfg);
  const RankingReport report = ranking_report(table, cfg.benchmark);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const auto write = [&](const std::string &name, const RecordTable &records) {
    const auto path = (std::filesystem::path(o.out_dir) / (name + extension(format))).string();
    std::ofstream file(path);
    if (!file)
      throw InputError("cannot open '" + path + "' for writing");
    write_records(file, records, format);
  };
  write("vintage_table", vintage_table_records(table));
  write("ranking_report", ranking_report_records(report));
  write("ranking_detail", ranking_detail_records(report));
  write("best_model_trace", best_model_trace_records(table));
  write("best_model_frequency", best_model_frequency_records(table));

  const auto failed = std::count_if(table.records.begin(), table.records.end(), [](const auto &r) { return r.failed; });
  err << "backtest: " << cfg.models.size() << " models, " << table.vintages.size() << " vintages, "
      << cfg.horizons.size() << " horizons, " << cfg.score_specs.size() << " scores, " << failed << " failed cells, "
      << secs << " s; outputs in " << o.out_dir << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// pit

struct PitOptions {
  CommonOptions common;
  ForecastSource source;
  std::string realizations;
  int bins = 10;
  std::string histogram_output;
};

int cmd_pit(const PitOptions &o, std::ostream &out, std::ostream &err) {
  const OutputFormat format = parse_output_format(o.common.format);
  if (o.bins < 1)
    throw DomainError("--bins must be at least 1");
  const Series ys = read_realizations(o.realizations);
  const auto forecasts = o.source.load(ys.size());

  RecordTable series;
  series.columns = {"index", "pit"};
  std::vector<double> pits;
  for (std::size_t i = 0; i < ys.size(); ++i) {
    pits.push_back(pit(forecast_for(forecasts, i), ys.values[i]));
    series.add({ys.timestamps[i], pits.back()});
  }
  RecordTable hist;
  hist.columns = {"bin_lower", "bin_upper", "count", "frequency"};
  for (const auto &b : pit_histogram(pits, o.bins))
    hist.add({b.lower, b.upper, static_cast<long long>(b.count), b.frequency});

  if (!o.histogram_output.empty()) {
    emit(o.common.output, out, [&](std::ostream &os) { write_records(os, series, format); });
    emit(o.histogram_output, out, [&](std::ostream &os) { write_records(os, hist, format); });
  } else if (format == OutputFormat::Csv) {
    emit(o.common.output, out, [&](std::ostream &os) {
      write_csv(os, series);
      os << '\n';
      write_csv(os, hist);
    });
  } else {
    emit(o.common.output, out, [&](std::ostream &os) {
      os << "{\"pit\":\n";
      write_json(os, series);
      os << ",\"histogram\":\n";
      write_json(os, hist);
      os << "}\n";
    });
  }
  err << "pit: " << pits.size() << " periods, KS distance to uniform " << ks_distance_uniform(pits) << "\n";
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
  CLI::App app{"Asymmetric and classical probability scores, forecast comparison and rolling backtests", "acps"};
  app.require_subcommand(1);

  ScoreOptions score_o;
  auto *score = app.add_subcommand("score", "Score forecasts against realizations");
  add_common(score, score_o.common);
  score_o.source.add(score);
  score->add_option("--realizations", score_o.realizations, "Realized values")->required();
  score->add_option("--family", score_o.family, "acps or crps")->capture_default_str();
  score->add_option("--c", score_o.c, "Asymmetry level in (0,1), repeatable (default 0.05 0.275 0.5 0.725 0.95)");
  score->add_option("--weighting", score_o.weighting, "none, threshold or quantile")->capture_default_str();
  score->add_option("--scheme", score_o.scheme, "uniform, center, tails, right-tail or left-tail")
      ->capture_default_str();
  score->add_option("--umin", score_o.u_min, "Lower truncation bound");
  score->add_option("--umax", score_o.u_max, "Upper truncation bound");
  score->add_option("--nodes", score_o.nodes, "Quadrature nodes per side")->capture_default_str();
  score->add_option("--model-id", score_o.model_id, "Model id written to the records")->capture_default_str();

  CompareOptions compare_o;
  auto *compare = app.add_subcommand("compare", "Diebold-Mariano test between two score record files");
  add_common(compare, compare_o.common);
  compare->add_option("files", compare_o.files, "Score records of model 1 and model 2")->required()->expected(2);
  compare->add_option("--bandwidth", compare_o.bandwidth, "Bartlett bandwidth (default floor(1.2 T^(1/3)))");

  SimulateOptions sim_o;
  auto *simulate = app.add_subcommand("simulate", "Rank candidate densities against a simulated target");
  add_common(simulate, sim_o.common);
  simulate->add_option("--experiment", sim_o.experiment,
                       "normal, normal-shifted, student-t, gamma, beta or threshold-weighted")
      ->required();
  simulate->add_option("--n", sim_o.n, "Number of target observations")->capture_default_str();
  simulate->add_option("--draws", sim_o.draws, "Draws per candidate forecast; 0 uses exact CDFs")
      ->capture_default_str();
  simulate->add_option("--nodes", sim_o.nodes, "Quadrature nodes per side")->capture_default_str();
  simulate->add_option("--values", sim_o.values, "rank or average")->capture_default_str();

  BacktestOptions bt_o;
  auto *backtest = app.add_subcommand("backtest", "Rolling-window density forecast evaluation");
  add_common(backtest, bt_o.common);
  backtest->add_option("--series", bt_o.series, "Two-column series (timestamp,value)")->required();
  backtest->add_option("--config", bt_o.config, "JSON configuration")->required();
  backtest->add_option("--out-dir", bt_o.out_dir, "Directory for the output files")->required();
  backtest->add_option("--window", bt_o.window, "Override the window length");
  backtest->add_option("--horizon", bt_o.horizons, "Override the horizons, repeatable");
  backtest->add_option("--vintages", bt_o.vintages, "Override the number of vintages");
  backtest->add_option("--draws", bt_o.draws, "Override the predictive draws per forecast");

  PitOptions pit_o;
  auto *pit_cmd = app.add_subcommand("pit", "Probability integral transforms and their histogram");
  add_common(pit_cmd, pit_o.common);
  pit_o.source.add(pit_cmd);
  pit_cmd->add_option("--realizations", pit_o.realizations, "Realized values")->required();
  pit_cmd->add_option("--bins", pit_o.bins, "Histogram bins")->capture_default_str();
  pit_cmd->add_option("--histogram-output", pit_o.histogram_output, "Write the histogram to this file");

  std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (score->parsed())
      return cmd_score(score_o, out);
    if (compare->parsed())
      return cmd_compare(compare_o, out);
    if (simulate->parsed())
      return cmd_simulate(sim_o, out, err);
    if (backtest->parsed())
      return cmd_backtest(bt_o, backtest->get_option("--seed")->count() > 0, err);
    if (pit_cmd->parsed())
      return cmd_pit(pit_o, out, err);
  } catch (const DomainError &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedOperation &e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}

} // namespace acps
