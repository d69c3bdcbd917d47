#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace dqcalib;

TEST(LogSpace, EndpointsAndRatios) {
  const auto g = log_space(1e-2, 1e2, 5);
  ASSERT_EQ(g.size(), 5u);
  const double expected[] = {1e-2, 1e-1, 1.0, 1e1, 1e2};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(g[i], expected[i], 1e-12 * expected[i]);
  EXPECT_EQ(log_space(3.0, 5.0, 1), std::vector<double>{3.0});
  EXPECT_THROW(log_space(0.0, 1.0, 3), InputError);
  EXPECT_THROW(log_space(2.0, 1.0, 3), InputError);
}

TEST(LogSpace, DefaultAlphaGrid) {
  const auto g = default_alpha_grid();
  ASSERT_EQ(g.size(), 100u);
  EXPECT_NEAR(g.front(), 1e-2, 1e-15);
  EXPECT_NEAR(g.back(), std::pow(10.0, 1.7), 1e-10);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(g[i] / g[i - 1], g[1] / g[0], 1e-12);
}

namespace {

SweepConfig small_sweep() {
  SweepConfig cfg;
  cfg.alphas = log_space(0.1, 10.0, 4);
  cfg.samples = 12;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST(RunSweep, DeterministicForFixedSeed) {
  const SweepResult a = run_sweep(small_sweep()), b = run_sweep(small_sweep());
  ASSERT_EQ(a.rows.size(), b.rows.size());
  ASSERT_EQ(a.rows.size(), 8u);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    EXPECT_EQ(a.rows[i].errors.rot_deg.median, b.rows[i].errors.rot_deg.median);
    EXPECT_EQ(a.rows[i].errors.trans_cm.mean, b.rows[i].errors.trans_cm.mean);
  }
  SweepConfig other = small_sweep();
  other.seed = 6;
  EXPECT_NE(run_sweep(other).rows[0].errors.rot_deg.median, a.rows[0].errors.rot_deg.median);
}

TEST(RunSweep, TwoStepsRotationDoesNotDependOnAlpha) {
  const SweepResult r = run_sweep(small_sweep());
  std::vector<const SweepRow*> two;
  for (const auto& row : r.rows) {
    if (row.solver == SolverKind::TwoSteps) two.push_back(&row);
  }
  ASSERT_EQ(two.size(), 4u);
  for (const SweepRow* row : two) {
    EXPECT_NEAR(row->errors.rot_deg.median, two[0]->errors.rot_deg.median, 1e-9);
    EXPECT_NEAR(row->errors.trans_cm.median, two[0]->errors.trans_cm.median, 1e-6);
  }
}

TEST(RunSweep, BestRowsMinimizeMeans) {
  const SweepResult r = run_sweep(small_sweep());
  for (const auto& row : r.rows) {
    EXPECT_LE(r.best_rotation.at(row.solver).errors.rot_deg.mean, row.errors.rot_deg.mean);
    EXPECT_LE(r.best_translation.at(row.solver).errors.trans_cm.mean, row.errors.trans_cm.mean);
    EXPECT_EQ(row.failures, 0);
  }
}

TEST(RunSweep, RejectsBadConfig) {
  SweepConfig cfg = small_sweep();
  cfg.samples = 0;
  EXPECT_THROW(run_sweep(cfg), InputError);
  cfg = small_sweep();
  cfg.alphas = {1.0, -1.0};
  EXPECT_THROW(run_sweep(cfg), InputError);
}

TEST(RunBench, ReportsRequestedRepetitions) {
  BenchConfig cfg;
  cfg.repetitions = 50;
  cfg.warmup = 5;
  cfg.datasets = 7;
  const auto stats = run_bench(cfg);
  ASSERT_EQ(stats.size(), 3u);
  for (const auto& s : stats) {
    EXPECT_EQ(s.runs, 50);
    EXPECT_GT(s.mean_us, 0.0);
    EXPECT_LE(s.min_us, s.median_us);
    EXPECT_LE(s.median_us, s.max_us);
    EXPECT_LE(s.min_us, s.mean_us);
    EXPECT_GE(s.std_us, 0.0);
  }
  EXPECT_EQ(stats[0].solver, SolverKind::TwoSteps);
  cfg.repetitions = 0;
  EXPECT_THROW(run_bench(cfg), InputError);
}

TEST(CurveGrid, CoversWidenedBounds) {
  const CalibrationProblem p = testkit::noisy_problem(9);
  const MuBounds b = mu_bounds(p);
  const auto g = curve_grid(p, 101);
  ASSERT_EQ(g.size(), 101u);
  EXPECT_NEAR(g.front(), b.lo - 0.25 * b.span(), 1e-12 * b.span());
  EXPECT_NEAR(g.back(), b.hi + 0.25 * b.span(), 1e-12 * b.span());
  // The optimum lies inside the grid and f0 changes sign around it.
  const SolverResult opt = solve_opt(p);
  EXPECT_GT(opt.mu, g.front());
  EXPECT_LT(opt.mu, g.back());
  const auto curves = sample_curves(p, g);
  int sign_changes = 0;
  for (std::size_t i = 1; i < curves.size(); ++i) {
    if ((curves[i - 1].f0 < 0) != (curves[i].f0 < 0)) {
      ++sign_changes;
      EXPECT_LE(curves[i - 1].mu, opt.mu);
      EXPECT_GE(curves[i].mu, opt.mu);
    }
  }
  EXPECT_EQ(sign_changes, 1);
  EXPECT_THROW(curve_grid(p, 1), InputError);
}
