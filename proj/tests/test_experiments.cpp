#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "fkhull/experiments.hpp"

using namespace fkhull;

namespace {

SweepConfig small_sweep() {
  SweepConfig c;
  c.grid_N = 1024;
  c.r_values = {0.5};
  c.n_values = {64, 16, 256};
  c.holder_grid = 256;
  return c;
}

// Drops the timestamp comment and the wall_time column.
std::string deterministic_part(const std::string& csv) {
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# generated=", 0) == 0) continue;
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() >= 11) cells[10].clear();
    for (const auto& c : cells) out << c << ',';
    out << '\n';
  }
  return out.str();
}

}  // namespace

TEST(Slope, ExactPowerLaw) {
  std::vector<double> x{1, 2, 4, 8}, y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -2.5));
  EXPECT_NEAR(loglog_slope(x, y), -2.5, 1e-12);
  EXPECT_THROW((void)loglog_slope({1.0}, {1.0}), error);
}

TEST(ParallelFor, VisitsEverySlotOnce) {
  std::vector<int> hits(100, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(RunMinimize, IntegrableObjective) {
  SweepConfig c;
  c.profile_id = "zero";
  c.grid_N = 1024;
  const auto out = run_minimize(c);
  ASSERT_EQ(out.size(), 1u);
  const auto w = c.rotation();
  EXPECT_NEAR(out[0].result.objective, 0.5 * (w[0] * w[0] + w[1] * w[1]), 1e-6);
  const auto j = to_json(out[0]);
  for (const char* key : {"objective", "el_residual_sup", "iterations", "converged", "gap"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST(RunMinimize, DestructionGapIsRecorded) {
  SweepConfig c;
  c.grid_N = 1024;
  const auto out = run_minimize(c);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_GT(out[0].gap, out[0].potential.R);
  EXPECT_TRUE(out[0].resolved);
}

TEST(RunSweep, RowsOrderedAndConsistent) {
  const auto rows = run_sweep(small_sweep(), 2);
  ASSERT_EQ(rows.size(), 6u);
  const long expected_n[] = {16, 16, 64, 64, 256, 256};
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].n, expected_n[k]);
    EXPECT_EQ(rows[k].j, k % 2);
    EXPECT_EQ(rows[k].destroys, rows[k].margin_factor2 > 0.0);
    EXPECT_EQ(rows[k].holder_norm_per_alpha.size(), 2u);
  }
  EXPECT_TRUE(rows[0].error.empty());
  EXPECT_GT(rows[0].minimizer_gap, 1.0 / 256);
  // N R < 4 for n >= 64: the minimiser is skipped, the margins are still computed.
  EXPECT_FALSE(rows[2].error.empty());
  EXPECT_TRUE(rows[4].destroys);
}

TEST(RunSweep, LargeExponentDoesNotDestroy) {
  SweepConfig c = small_sweep();
  c.r_values = {2.0};
  c.n_values = {256, 1024, 4096};
  for (const auto& row : run_sweep(c, 1)) EXPECT_FALSE(row.destroys);
}

TEST(RunSweep, EmptyGridIsRejected) {
  SweepConfig c = small_sweep();
  c.n_values.clear();
  EXPECT_THROW((void)run_sweep(c), error);
}

TEST(RunSweep, OutputIsDeterministic) {
  const auto cfg = small_sweep();
  std::ostringstream a, b;
  write_sweep_csv(a, cfg, run_sweep(cfg, 1));
  write_sweep_csv(b, cfg, run_sweep(cfg, 3));
  EXPECT_EQ(deterministic_part(a.str()), deterministic_part(b.str()));
  EXPECT_EQ(a.str().rfind("# config_hash=", 0), 0u);
  EXPECT_NE(a.str().find("n,r,j,holder_norm_per_alpha,percival_min,minimizer_gap,margin,margin_factor2,"
                         "destroys,el_residual_sup,wall_time,error\n"),
            std::string::npos);
}

TEST(RunCriterion, SlopesAndThreshold) {
  SweepConfig c;
  c.r_values = {0.5, 2.0};
  c.n_values = {16, 32, 64, 128, 256, 512, 1024, 2048, 4096};
  const auto out = run_criterion(c);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_NEAR(out[0].potential_slope, -3.0, 0.1);
  EXPECT_NEAR(out[0].distance_slope, -4.0, 0.1);
  EXPECT_TRUE(out[0].threshold.has_value());
  EXPECT_NEAR(out[1].potential_slope, -1.5, 0.1);
  EXPECT_NEAR(out[1].distance_slope, -1.0, 0.1);
  EXPECT_EQ(out[0].reports.size(), 18u);
}

TEST(RunCriterion, SurveyRows) {
  SweepConfig c;
  const auto rows = run_survey(c, 16, 0.5);
  EXPECT_EQ(rows.size(), c.family_size * c.d);
  std::ostringstream os;
  write_survey_csv(os, c, rows);
  EXPECT_NE(os.str().find("member,j,n,r"), std::string::npos);
}

TEST(RunLatticeCheck, IntegrableIdentity) {
  SweepConfig c;
  c.profile_id = "zero";
  c.grid_N = 512;
  c.class_a_trials = 200;
  const auto out = run_lattice_check(c);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LE(out[0].residual_sup, 1e-6);
  EXPECT_EQ(out[0].class_a.violations, 0);
}

TEST(RunLatticeCheck, DestructionRegimeReports) {
  SweepConfig c;
  c.grid_N = 1024;
  c.box_radius = 6;
  c.class_a_trials = 100;
  const auto out = run_lattice_check(c);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_LE(out[0].consistency_sup, 1e-3);
  const auto j = to_json(out[0]);
  EXPECT_TRUE(j.contains("class_a_violations"));
  EXPECT_TRUE(j.contains("lattice_residual_sup"));
}

TEST(RunLatticeCheck, SmallBoxIsRejected) {
  SweepConfig c;
  c.box_radius = 1;
  EXPECT_THROW((void)run_lattice_check(c), error);
}
