#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "test_support.hpp"

using namespace dqcalib;

namespace {

double angle_of(const Quaternion& q) { return 2.0 * std::atan2(q.imag().norm(), std::abs(q.w)); }

double sample_std(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

}  // namespace

TEST(Rng, Deterministic) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
  }
}

TEST(Rng, UniformMoments) {
  Rng rng(1);
  double sum = 0, sq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12, 0.002);
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(7, 1), derive_seed(7, 2));
  EXPECT_NE(derive_seed(7, 1), derive_seed(8, 1));
  EXPECT_EQ(derive_seed(7, 1), derive_seed(7, 1));
}

TEST(RandomUnitQuaternion, UnitNorm) {
  Rng rng(2);
  for (int i = 0; i < 10000; ++i) EXPECT_NEAR(random_unit_quaternion(rng).norm(), 1.0, 1e-14);
}

TEST(RandomUnitQuaternion, MeanAngleMatchesHaarDensity) {
  // Angle density of a Haar-random rotation: (1 - cos t) / pi on [0, pi].
  using boost::math::quadrature::gauss_kronrod;
  const double expected = gauss_kronrod<double, 61>::integrate(
      [](double t) { return t * (1.0 - std::cos(t)) / std::numbers::pi; }, 0.0, std::numbers::pi);
  EXPECT_NEAR(expected, std::numbers::pi / 2 + 2 / std::numbers::pi, 1e-12);
  Rng rng(3);
  double sum = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) sum += angle_of(random_unit_quaternion(rng));
  const double deg = 180.0 / std::numbers::pi;
  EXPECT_NEAR(sum / n * deg, expected * deg, 0.5);
  EXPECT_NEAR(expected * deg, 126.47, 0.01);
}

TEST(RandomUnitQuaternion, AxesAreIsotropic) {
  Rng rng(4);
  Vec3 mean = Vec3::Zero();
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const Quaternion q = random_unit_quaternion(rng);
    const Vec3 v = q.w >= 0 ? Vec3(q.x, q.y, q.z) : Vec3(-q.x, -q.y, -q.z);
    mean += v / n;
  }
  EXPECT_LT(mean.norm(), 0.02);
}

TEST(PerturbPose, ZeroNoiseIsIdentity) {
  Rng rng(5);
  const Pose p = testkit::TestRng(5).pose();
  const Pose out = perturb_pose(p, NoiseModel::none(), rng);
  EXPECT_EQ(out.rotation, p.rotation);
  EXPECT_EQ(out.translation, p.translation);
}

TEST(PerturbPose, EmpiricalStandardDeviations) {
  Rng rng(6);
  const NoiseModel nm{0.01, 0.02, 0};
  const Pose base{Quaternion::identity(), Vec3::Zero()};
  std::vector<double> signed_angles, tx, ty, tz;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Pose p = perturb_pose(base, nm, rng);
    // Angle about a random axis; project on the axis to keep the sign.
    const Vec3 v(p.rotation.x, p.rotation.y, p.rotation.z);
    const double a = 2.0 * std::atan2(v.norm(), p.rotation.w);
    signed_angles.push_back(i % 2 == 0 ? a : -a);
    tx.push_back(p.translation[0]);
    ty.push_back(p.translation[1]);
    tz.push_back(p.translation[2]);
  }
  EXPECT_NEAR(sample_std(signed_angles) / nm.sigma_r, 1.0, 0.02);
  for (const auto* t : {&tx, &ty, &tz}) EXPECT_NEAR(sample_std(*t) / nm.sigma_t, 1.0, 0.02);
}

TEST(PerturbPose, ComposesOnTheRight) {
  // Translation noise is expressed in the body frame of P.
  Rng rng(7);
  const Pose p{Quaternion::from_axis_angle(Vec3::UnitZ(), std::numbers::pi / 2), Vec3(1, 2, 3)};
  const NoiseModel nm{0.0, 0.1, 0};
  Rng replay(7);
  replay.unit_vector();
  replay.normal();
  const Vec3 dt{0.1 * replay.normal(), 0.1 * replay.normal(), 0.1 * replay.normal()};
  const Pose out = perturb_pose(p, nm, rng);
  EXPECT_LE((out.translation - (p.translation + p.rotation.rotate(dt))).norm(), 1e-15);
}

TEST(NoiseModel, RejectsNegativeSigma) {
  EXPECT_THROW((NoiseModel{-1.0, 0.0, 0}).validate(), InputError);
  Scenario s;
  s.n = 1;
  EXPECT_THROW(generate(s), InputError);
}

TEST(Generate, DeterministicAndSized) {
  for (auto kind : {ScenarioKind::Random, ScenarioKind::Line, ScenarioKind::Circle}) {
    const Scenario s = Scenario::defaults(kind, 11);
    const Dataset a = generate(s), b = generate(s);
    ASSERT_EQ(a.pairs.size(), 100u);
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
      EXPECT_EQ(a.pairs[i].cam(), b.pairs[i].cam());
      EXPECT_EQ(a.pairs[i].hand(), b.pairs[i].hand());
    }
    const Dataset c = generate(s.reseeded(12));
    EXPECT_NE(a.pairs[0].hand(), c.pairs[0].hand()) << to_string(kind);
  }
}

TEST(Generate, ConjugationIdentityWithoutNoise) {
  const Dataset d = testkit::noise_free_random(13);
  const DualQuaternion x = to_dual_quaternion(d.ground_truth);
  for (const MotionPair& pr : d.pairs) {
    const DualQuaternion predicted = x * pr.hand() * conjugate(x);
    const DualQuaternion a = canonical(predicted), b = canonical(pr.cam());
    EXPECT_LE((a.primal.vec() - b.primal.vec()).norm() + (a.dual.vec() - b.dual.vec()).norm(), 1e-12);
  }
}

TEST(Generate, RandomTranslationsInUnitCube) {
  Scenario s = Scenario::defaults(ScenarioKind::Random, 14);
  s.measurement_noise = NoiseModel::none();
  const Dataset d = generate(s);
  for (const Pose& h : d.hand) {
    for (int k = 0; k < 3; ++k) {
      EXPECT_GE(h.translation[k], 0.0);
      EXPECT_LT(h.translation[k], 1.0);
    }
  }
}

TEST(Generate, CircleClosesWithoutJitter) {
  Scenario s = Scenario::defaults(ScenarioKind::Circle, 15);
  s.jitter = NoiseModel::none();
  const std::vector<Pose> motions = scenario_motions(s);
  Pose acc{Quaternion::identity(), Vec3::Zero()};
  for (const Pose& m : motions) acc = acc * m;
  EXPECT_LE(angle_of(acc.rotation), 1e-9);
  EXPECT_LE(acc.translation.norm(), 1e-9);
  // Each step turns by 2 pi / n and travels the chord 2 * 2 sin(pi / n).
  EXPECT_NEAR(angle_of(motions[0].rotation), 2 * std::numbers::pi / s.n, 1e-12);
  EXPECT_NEAR(motions[0].translation.norm(), 4 * std::sin(std::numbers::pi / s.n), 1e-12);
}

TEST(Generate, LineMotionWithoutJitterIsRankDeficient) {
  Scenario s = Scenario::defaults(ScenarioKind::Line, 16);
  s.jitter = NoiseModel::none();
  s.measurement_noise = NoiseModel::none();
  const std::vector<Pose> motions = scenario_motions(s);
  for (const Pose& m : motions) {
    EXPECT_EQ(m.rotation, Quaternion::identity());
    EXPECT_NEAR(m.translation[0], 2.0 / s.n, 1e-15);
  }
  const QuadraticForm f = accumulate(generate(s).pairs, 1.0);
  const Vec4 ev = Eigen::SelfAdjointEigenSolver<Mat4>(f.m).eigenvalues();
  EXPECT_LE(ev[0], 1e-10 * f.m.norm());  // pure translations leave M = 0
}

TEST(Generate, NoiseFreeRecoveryThroughSolver) {
  const Dataset d = testkit::noise_free_random(17);
  const SolverResult r = calibrate(d.pairs, 1.0, SolverKind::Opt);
  const CalibrationError e = calibration_error(r.x, d.ground_truth);
  EXPECT_LT(e.rot_deg, 1e-6);
  EXPECT_LT(e.trans_cm, 1e-6);
}

TEST(Generate, DefaultNoiseErrorMagnitudes) {
  std::vector<CalibrationError> errs;
  for (int seed = 0; seed < 100; ++seed) {
    const Dataset d = testkit::noisy_random(1000 + seed);
    errs.push_back(calibration_error(calibrate(d.pairs, 0.3, SolverKind::Opt).x, d.ground_truth));
  }
  const ErrorSummary s = summarize(errs);
  EXPECT_GT(s.rot_deg.median, 0.02);
  EXPECT_LT(s.rot_deg.median, 0.12);
  EXPECT_GT(s.trans_cm.median, 0.08);
  EXPECT_LT(s.trans_cm.median, 0.4);
}

TEST(DefaultGroundTruth, MatchesRigCalibration) {
  const Pose x = default_ground_truth();
  EXPECT_NEAR(x.translation[1], 0.281, 1e-15);
  EXPECT_NEAR(angle_of(x.rotation) * 180 / std::numbers::pi,
              std::sqrt(2.35 * 2.35 + 0.92 * 0.92 + 48.93 * 48.93), 1e-9);
}
