#include "acps/simulation.hpp"

#include "acps/errors.hpp"
#include "acps/random.hpp"

namespace acps {

namespace {

using AD = AnalyticDistribution;

std::vector<AD> normal_candidates() {
  return {AD::normal(0, 1), AD::normal(-3, 1), AD::normal(3, 1), AD::normal(0, 16)};
}

} // namespace

std::vector<std::string> experiment_names() {
  return {"normal", "normal-shifted", "student-t", "gamma", "beta", "threshold-weighted"};
}

std::vector<ScoreSpec> default_score_rows() {
  std::vector<ScoreSpec> rows = {ScoreSpec::crps()};
  for (double c : default_c_values())
    rows.push_back(ScoreSpec::acps(c));
  return rows;
}

Experiment make_experiment(const std::string &name) {
  if (name == "normal")
    return {name, AD::normal(0, 1), normal_candidates(), default_score_rows()};
  if (name == "normal-shifted")
    return {name, AD::normal(2, 4), normal_candidates(), default_score_rows()};
  if (name == "student-t")
    return {name,
            AD::student_t(0, 1, 5),
            {AD::student_t(-3, 1, 3), AD::student_t(2, 1, 3), AD::student_t(0, 1, 5), AD::student_t(4, 1, 15)},
            default_score_rows()};
  if (name == "gamma")
    return {name,
            AD::gamma(2, 1),
            {AD::gamma(1, 1), AD::gamma(2, 1), AD::gamma(1.5, 1.5), AD::gamma(1, 2)},
            default_score_rows()};
  if (name == "beta")
    return {name, AD::beta(1, 2), {AD::beta(1, 1), AD::beta(1, 5), AD::beta(1, 2), AD::beta(5, 5)},
            default_score_rows()};
  if (name == "threshold-weighted") {
    Experiment e{name, AD::normal(1, 4), normal_candidates(), {}};
    for (auto scheme : {WeightScheme::Uniform, WeightScheme::Center, WeightScheme::Tails, WeightScheme::RightTail,
                        WeightScheme::LeftTail}) {
      for (const auto &base : default_score_rows()) {
        ScoreSpec s = base;
        s.weighting = Weighting::Threshold;
        s.scheme = scheme;
        e.rows.push_back(s);
      }
    }
    return e;
  }
  std::string known;
  for (const auto &n : experiment_names())
    known += (known.empty() ? "" : ", ") + n;
  throw DomainError("unknown experiment '" + name + "' (expected one of " + known + ")");
}

SimulationResult run_simulation(const Experiment &experiment, int n, int m, std::uint64_t seed,
                                int nodes_per_side) {
  if (n < 1)
    throw DomainError("number of observations must be at least 1");
  if (m < 0)
    throw DomainError("number of forecast draws must be non-negative");
  const auto ys = experiment.target.sample(static_cast<std::size_t>(n), derive_seed(seed, 0));
  std::vector<PredictiveDistribution> forecasts;
  for (std::size_t k = 0; k < experiment.candidates.size(); ++k) {
    const auto &cand = experiment.candidates[k];
    if (m == 0)
      forecasts.emplace_back(cand);
    else
      forecasts.emplace_back(EmpiricalCdf(cand.sample(static_cast<std::size_t>(m), derive_seed(seed, 1, k))));
  }

  SimulationResult result{experiment, {}, {}, {}};
  result.grid = shared_grid(forecasts, ys, nodes_per_side);
  std::vector<ScoreSpec> specs = experiment.rows;
  for (auto &s : specs)
    s.grid = result.grid;
  result.experiment.rows = specs;

  const std::size_t n_rows = specs.size();
  const std::size_t n_cand = forecasts.size();
  std::vector<std::vector<double>> sums(n_rows, std::vector<double>(n_cand, 0.0));
  for (std::size_t k = 0; k < n_cand; ++k)
    for (double y : ys) {
      const auto values = score_batch(forecasts[k], y, specs);
      for (std::size_t r = 0; r < n_rows; ++r)
        sums[r][k] += values[r].value;
    }

  for (std::size_t r = 0; r < n_rows; ++r) {
    std::vector<std::pair<std::string, ScoreValue>> avg;
    std::vector<double> row(n_cand);
    for (std::size_t k = 0; k < n_cand; ++k) {
      row[k] = sums[r][k] / static_cast<double>(n);
      avg.emplace_back(experiment.candidates[k].label(), ScoreValue{row[k], specs[r].orientation(), false});
    }
    std::vector<int> ranks;
    for (const auto &mr : rank_models(avg))
      ranks.push_back(mr.rank);
    result.averages.push_back(std::move(row));
    result.ranks.push_back(std::move(ranks));
  }
  return result;
}

} // namespace acps
