#include "acps/errors.hpp"
#include "acps/simulation.hpp"

#include <gtest/gtest.h>

namespace acps {
namespace {

TEST(Experiments, NamesAndShapes) {
  for (const auto &name : experiment_names()) {
    const auto e = make_experiment(name);
    EXPECT_EQ(e.name, name);
    EXPECT_EQ(e.candidates.size(), 4u);
    EXPECT_EQ(e.rows.size(), name == "threshold-weighted" ? 30u : 6u);
  }
  EXPECT_THROW(make_experiment("cauchy"), DomainError);
}

TEST(Experiments, TargetIsAmongCandidatesExceptShifted) {
  for (const auto &name : experiment_names()) {
    const auto e = make_experiment(name);
    bool found = false;
    for (const auto &c : e.candidates)
      found = found || c.label() == e.target.label();
    EXPECT_EQ(found, name == "normal" || name == "student-t" || name == "gamma" || name == "beta") << name;
  }
}

TEST(RunSimulation, ShapeAndDeterminism) {
  const auto e = make_experiment("normal");
  const auto a = run_simulation(e, 100, 500, 3);
  const auto b = run_simulation(e, 100, 500, 3);
  ASSERT_EQ(a.ranks.size(), 6u);
  for (std::size_t r = 0; r < a.ranks.size(); ++r) {
    ASSERT_EQ(a.ranks[r].size(), 4u);
    EXPECT_EQ(a.ranks[r], b.ranks[r]);
    EXPECT_EQ(a.averages[r], b.averages[r]);
  }
  EXPECT_EQ(a.grid, b.grid);
  EXPECT_THROW(run_simulation(e, 0, 500, 3), DomainError);
  EXPECT_THROW(run_simulation(e, 10, -1, 3), DomainError);
}

TEST(RunSimulation, CrpsRowEqualsHalfRow) {
  for (int m : {0, 500}) {
    const auto r = run_simulation(make_experiment("normal"), 300, m, 4);
    EXPECT_EQ(r.ranks[0], r.ranks[3]);
    const double length = r.grid.length();
    for (std::size_t k = 0; k < 4; ++k)
      EXPECT_NEAR(r.averages[3][k], length - 4.0 * r.averages[0][k], 1e-8);
  }
}

TEST(RunSimulation, TrueDensityRanksFirstAtLargeN) {
  for (const std::string name : {"gamma", "beta"}) {
    const auto r = run_simulation(make_experiment(name), 20000, 0, 5);
    const auto &cands = r.experiment.candidates;
    std::size_t truth = 0;
    while (cands[truth].label() != r.experiment.target.label())
      ++truth;
    for (std::size_t row = 0; row < r.ranks.size(); ++row)
      EXPECT_EQ(r.ranks[row][truth], 1) << name << " " << r.experiment.rows[row].label();
  }
}

} // namespace
} // namespace acps
