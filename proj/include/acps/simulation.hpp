#pragma once

#include "acps/distributions.hpp"
#include "acps/scoring.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace acps {

/// A target density, candidate forecasts and the score rows to rank them by.
struct Experiment {
  std::string name;
  AnalyticDistribution target;
  std::vector<AnalyticDistribution> candidates;
  /// Grids are filled in by run_simulation.
  std::vector<ScoreSpec> rows;
};

/// normal, normal-shifted, student-t, gamma, beta, threshold-weighted.
std::vector<std::string> experiment_names();

/// Throws DomainError for an unknown name.
Experiment make_experiment(const std::string &name);

/// CRPS followed by ACPS at each default asymmetry level.
std::vector<ScoreSpec> default_score_rows();

struct SimulationResult {
  Experiment experiment;
  QuadratureGrid grid;
  /// averages[row][candidate]
  std::vector<std::vector<double>> averages;
  /// ranks[row][candidate], 1 = best
  std::vector<std::vector<int>> ranks;
};

/// Draws n observations from the target and scores every candidate on one
/// grid shared by all candidates and observations. Candidates are empirical
/// CDFs of m draws each, or the exact analytic CDFs when m = 0.
SimulationResult run_simulation(const Experiment &experiment, int n, int m, std::uint64_t seed,
                                int nodes_per_side = 128);

} // namespace acps
