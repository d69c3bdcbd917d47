#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace dqcalib;

TEST(CalibrationError, ZeroAtTruth) {
  const Pose gt = default_ground_truth();
  const CalibrationError e = calibration_error(to_dual_quaternion(gt), gt);
  EXPECT_EQ(e.rot_deg, 0.0);
  EXPECT_NEAR(e.trans_cm, 0.0, 1e-13);
}

TEST(CalibrationError, SignFlipInvariant) {
  testkit::TestRng rng(1);
  for (int i = 0; i < 50; ++i) {
    const Pose gt = rng.pose();
    const DualQuaternion est = to_dual_quaternion(rng.pose());
    const CalibrationError a = calibration_error(est, gt), b = calibration_error(-est, gt);
    EXPECT_NEAR(a.rot_deg, b.rot_deg, 1e-12);
    EXPECT_NEAR(a.trans_cm, b.trans_cm, 1e-12);
    EXPECT_LE(a.rot_deg, 180.0);
  }
}

TEST(CalibrationError, FiveDegreeTwist) {
  testkit::TestRng rng(2);
  const Pose gt = rng.pose();
  const Vec3 axis = rng.vec3().normalized();
  const Pose est{gt.rotation * Quaternion::from_axis_angle(axis, 5.0 * std::numbers::pi / 180),
                 gt.translation + Vec3(0.03, 0.0, -0.04)};
  const CalibrationError e = calibration_error(to_dual_quaternion(est), gt);
  EXPECT_NEAR(e.rot_deg, 5.0, 1e-9);
  EXPECT_NEAR(e.trans_cm, 5.0, 1e-12);
}

TEST(CalibrationError, RejectsNonUnit) {
  DualQuaternion q = DualQuaternion::identity();
  q.primal.w = 2.0;
  EXPECT_THROW(calibration_error(q, Pose::identity()), ConstraintError);
}

TEST(RotationDistance, TriangleInequality) {
  testkit::TestRng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Quaternion a = rng.unit_quaternion(), b = rng.unit_quaternion(), c = rng.unit_quaternion();
    EXPECT_LE(rotation_distance_deg(a, c),
              rotation_distance_deg(a, b) + rotation_distance_deg(b, c) + 1e-9);
  }
}

TEST(RelativeCostDiff, Values) {
  EXPECT_EQ(signed_relative_cost_diff(2.0, 2.0), 0.0);
  EXPECT_DOUBLE_EQ(signed_relative_cost_diff(3.0, 1.0), 0.5);
  EXPECT_DOUBLE_EQ(signed_relative_cost_diff(1.0, 3.0), -0.5);
  EXPECT_EQ(signed_relative_cost_diff(0.0, 0.0), 0.0);
  EXPECT_THROW(signed_relative_cost_diff(-1.0, 0.5), InputError);
}

TEST(RelativeCostDiff, TwoStepsWorseOnAverage) {
  double mean = 0;
  for (int seed = 0; seed < 20; ++seed) {
    const CalibrationProblem p = testkit::noisy_problem(50 + seed);
    mean += signed_relative_cost_diff(solve_two_steps(p).cost, solve_opt(p).cost) / 20;
  }
  EXPECT_GT(mean, 0.0);
}

TEST(Summary, SingleElement) {
  const std::vector<double> v{7.5};
  const Stats s = describe(v);
  EXPECT_EQ(s.median, 7.5);
  EXPECT_EQ(s.p25, 7.5);
  EXPECT_EQ(s.p75, 7.5);
  EXPECT_EQ(s.mean, 7.5);
}

TEST(Summary, FivePoints) {
  const std::vector<double> v{5, 3, 1, 4, 2};
  const Stats s = describe(v);
  EXPECT_EQ(s.median, 3.0);
  EXPECT_EQ(s.p25, 2.0);
  EXPECT_EQ(s.p75, 4.0);
  EXPECT_EQ(s.mean, 3.0);
}

TEST(Summary, InterpolatesBetweenRanks) {
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_DOUBLE_EQ(percentile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_DOUBLE_EQ(percentile({10, 20}, 1.0), 20.0);
  EXPECT_THROW(percentile({1.0}, 1.5), InputError);
}

TEST(Summary, EmptyRejected) {
  EXPECT_THROW(describe(std::vector<double>{}), InputError);
  EXPECT_THROW(summarize(std::vector<CalibrationError>{}), InputError);
}

TEST(Summary, NormalSampleMedianNearMean) {
  testkit::TestRng rng(4);
  std::vector<double> v;
  const int n = 20000;
  for (int i = 0; i < n; ++i) v.push_back(3.0 + 2.0 * rng.normal());
  const Stats s = describe(v);
  // Standard error of the median is sqrt(pi / 2) sigma / sqrt(n); allow 4 of them.
  const double se = std::sqrt(std::numbers::pi / 2) * 2.0 / std::sqrt(double(n));
  EXPECT_NEAR(s.median, s.mean, 4 * se);
  EXPECT_NEAR(s.p75 - s.p25, 2.0 * 1.34898, 0.05);
}

TEST(Summary, PerField) {
  const std::vector<CalibrationError> errs{{1, 10}, {2, 20}, {3, 30}};
  const ErrorSummary s = summarize(errs);
  EXPECT_EQ(s.rot_deg.median, 2.0);
  EXPECT_EQ(s.trans_cm.median, 20.0);
  EXPECT_EQ(s.trans_cm.p25, 15.0);
}
