#include <gtest/gtest.h>

#include <algorithm>
#include <Eigen/Eigenvalues>

#include "test_support.hpp"

using namespace dqcalib;
using dqcalib::testkit::TestRng;

TEST(SymEig4, Identity) {
  const auto e = sym_eig4<double>(Mat4::Identity());
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(e.values[i], 1.0);
  EXPECT_LE((e.vectors.transpose() * e.vectors - Mat4::Identity()).norm(), 1e-14);
}

TEST(SymEig4, DiagonalIsSortedWithPermutedAxes) {
  const Mat4 a = Vec4(4, 1, 3, 2).asDiagonal();
  const auto e = sym_eig4<double>(a);
  EXPECT_EQ(e.values, Vec4(1, 2, 3, 4));
  EXPECT_EQ(e.vector(0), Vec4::Unit(1));
  EXPECT_EQ(e.vector(1), Vec4::Unit(3));
  EXPECT_EQ(e.vector(2), Vec4::Unit(2));
  EXPECT_EQ(e.vector(3), Vec4::Unit(0));
}

TEST(SymEig4, ReconstructionAndEigenOracle) {
  TestRng rng(21);
  for (int i = 0; i < 200; ++i) {
    const Mat4 a = rng.symmetric();
    const auto e = sym_eig4<double>(a);
    const double scale = a.norm();
    EXPECT_LE((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - a).norm(), 1e-10 * scale);
    EXPECT_LE((e.vectors.transpose() * e.vectors - Mat4::Identity()).norm(), 1e-12);
    for (int k = 0; k < 4; ++k) {
      EXPECT_LE((a * e.vector(k) - e.values[k] * e.vector(k)).norm(), 1e-10 * scale);
      const Vec4 v = e.vector(k);
      const auto arg = std::max_element(v.data(), v.data() + 4,
                                        [](double x, double y) { return std::abs(x) < std::abs(y); });
      EXPECT_GT(*arg, 0.0);
    }
    const Vec4 oracle = Eigen::SelfAdjointEigenSolver<Mat4>(a).eigenvalues();
    EXPECT_LE((e.values - oracle).cwiseAbs().maxCoeff(), 1e-12 * scale);
    EXPECT_NEAR(e.values.sum(), a.trace(), 1e-9 * scale);
    EXPECT_NEAR(e.values.prod(), a.determinant(), 1e-9 * std::pow(scale, 4));
  }
}

TEST(SymEig4, Deterministic) {
  TestRng rng(22);
  const Mat4 a = rng.symmetric();
  const auto e1 = sym_eig4<double>(a);
  const auto e2 = sym_eig4<double>(a);
  EXPECT_EQ(e1.values, e2.values);
  EXPECT_EQ(e1.vectors, e2.vectors);
}

TEST(SymEig4, RejectsAsymmetricAndNonFinite) {
  Mat4 a = Mat4::Identity();
  a(0, 1) = 1.0;
  EXPECT_THROW(sym_eig4<double>(a), InputError);
  Mat4 b = Mat4::Identity();
  b(2, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(sym_eig4<double>(b), InputError);
}

TEST(SymEig4, ExtendedPrecision) {
  TestRng rng(23);
  const Mat4 a = rng.symmetric();
  const auto e = sym_eig4<long double>(a.cast<long double>());
  const Vec4 oracle = Eigen::SelfAdjointEigenSolver<Mat4>(a).eigenvalues();
  EXPECT_LE((e.values.cast<double>() - oracle).cwiseAbs().maxCoeff(), 1e-13 * a.norm());
}

TEST(Cholesky4, KnownFactors) {
  EXPECT_EQ(cholesky4(Mat4::Identity()), Mat4::Identity());
  const Mat4 d = Vec4(4, 9, 16, 25).asDiagonal();
  EXPECT_EQ(cholesky4(d), Mat4(Vec4(2, 3, 4, 5).asDiagonal()));
}

TEST(Cholesky4, ReconstructsRandomSpd) {
  TestRng rng(24);
  for (int i = 0; i < 100; ++i) {
    Mat4 b;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) b(r, c) = rng.normal();
    const Mat4 a = b.transpose() * b + Mat4::Identity();
    const Mat4 u = cholesky4(a);
    EXPECT_LE((u.transpose() * u - a).norm(), 1e-11 * a.norm());
    for (int r = 0; r < 4; ++r) {
      EXPECT_GT(u(r, r), 0.0);
      for (int c = 0; c < r; ++c) EXPECT_EQ(u(r, c), 0.0);
    }
  }
}

TEST(Cholesky4, RejectsIndefinite) {
  const Mat4 a = Vec4(1, -1, 1, 1).asDiagonal();
  EXPECT_THROW(cholesky4(a), DefinitenessError);
}

TEST(Invert4, KnownInverses) {
  EXPECT_EQ(invert4(Mat4::Identity()).inverse, Mat4::Identity());
  const auto r = invert4(2.0 * Mat4::Identity());
  EXPECT_LE((r.inverse - 0.5 * Mat4::Identity()).norm(), 1e-15);
  EXPECT_NEAR(r.condition, 1.0, 1e-12);
}

TEST(Invert4, RandomWellConditioned) {
  TestRng rng(25);
  for (int i = 0; i < 100; ++i) {
    Mat4 a;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) a(r, c) = rng.normal();
    a += 4.0 * Mat4::Identity();
    const auto inv = invert4(a);
    EXPECT_LE((a * inv.inverse - Mat4::Identity()).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Invert4, SingularCarriesCondition) {
  const Mat4 a = Vec4(1, 1, 1, 1e-14).asDiagonal();
  try {
    invert4(a);
    FAIL() << "expected RankError";
  } catch (const RankError& e) {
    EXPECT_NEAR(e.condition, 1e14, 1e3);
  }
}

TEST(Poly, EvaluationAndArithmetic) {
  const Poly<double> p({1.0, -3.0, 2.0});  // (2x - 1)(x - 1)
  EXPECT_EQ(p.degree(), 2);
  EXPECT_DOUBLE_EQ(p(1.0), 0.0);
  EXPECT_DOUBLE_EQ(p(0.5), 0.0);
  EXPECT_DOUBLE_EQ(p(2.0), 3.0);
  const Poly<double> d = p.derivative();
  EXPECT_EQ(d.c, (std::vector<double>{-3.0, 4.0}));
  const Poly<double> r = from_roots<double>({1.0, 0.5}, 2.0);
  for (int k = 0; k < 3; ++k) EXPECT_DOUBLE_EQ(r.c[k], p.c[k]);
}

TEST(FitPolynomial, ExactLowDegree) {
  const auto sq = fit_polynomial<double>([](double x) { return x * x; }, 2);
  ASSERT_EQ(sq.c.size(), 3u);
  EXPECT_NEAR(sq.c[0], 0.0, 1e-14);
  EXPECT_NEAR(sq.c[1], 0.0, 1e-14);
  EXPECT_NEAR(sq.c[2], 1.0, 1e-14);
  const auto det = fit_polynomial<double>(
      [](double mu) { return Mat4(Vec4(mu, 1, 1, 1).asDiagonal()).determinant(); }, 1);
  EXPECT_NEAR(det.c[0], 0.0, 1e-14);
  EXPECT_NEAR(det.c[1], 1.0, 1e-14);
}

TEST(FitPolynomial, OffsetIntervalReexpansion) {
  const Poly<double> truth({0.5, -1.0, 0.25, 2.0});
  const auto fit = fit_polynomial<double>([&](double x) { return truth(x); }, 3, 1.0, 3.0);
  for (int k = 0; k < 4; ++k) EXPECT_NEAR(fit.c[k], truth.c[k], 1e-10);
}

TEST(FitPolynomial, DeterminantOfProblemMatrices) {
  const CalibrationProblem p = testkit::noisy_problem(26);
  const double s = mu_polynomial_scale(p);
  const auto nodes = mu_polynomial_nodes(p, s);
  const auto poly = mu_polynomial(p, 0.0, s, nodes);
  for (int i = 0; i < 20; ++i) {
    const double t = nodes.first + (nodes.second - nodes.first) * (i - 5) / 10.0;
    const long double direct = p.z(s * t).cast<long double>().determinant();
    const long double scale = std::max(std::abs(direct), poly.max_abs_coeff() * 1e-6L);
    EXPECT_LE(std::abs(poly(t) - direct), 1e-6L * scale) << "t = " << t;
  }
}

TEST(FitPolynomial, RejectsNonPolynomialData) {
  EXPECT_THROW(fit_polynomial<double>([](double x) { return std::abs(x); }, 2), NumericError);
  EXPECT_THROW(fit_polynomial<double>([](double x) { return x; }, 9), InputError);
}

TEST(SturmCount, SimpleCases) {
  EXPECT_EQ(sturm_count(Poly<double>({-1.0, 0.0, 1.0}), -2.0, 2.0), 2);
  EXPECT_EQ(sturm_count(Poly<double>({1.0, 0.0, 1.0}), -10.0, 10.0), 0);
  EXPECT_EQ(sturm_count(Poly<double>({-1.0, 0.0, 1.0}), 0.0, 2.0), 1);
}

TEST(SturmCount, EndpointOnRootIsNudged) {
  EXPECT_EQ(sturm_count(Poly<double>({-1.0, 0.0, 1.0}), -1.0, 1.0), 2);
}

TEST(SturmCount, ConstructedRoots) {
  TestRng rng(27);
  for (int trial = 0; trial < 100; ++trial) {
    const int real = 2 * static_cast<int>(rng.uniform(0.0, 4.999));  // 0, 2, 4, 6 or 8
    std::vector<double> roots;
    for (int i = 0; i < real; ++i) roots.push_back(rng.uniform(-5.0, 5.0));
    Poly<double> p = from_roots<double>(roots, rng.uniform(0.5, 2.0));
    for (int i = real; i < 8; i += 2) {
      const double re = rng.uniform(-3, 3), im = rng.uniform(0.2, 2.0);
      p = p * Poly<double>({re * re + im * im, -2.0 * re, 1.0});
    }
    const SturmChain<double> chain(p);
    EXPECT_EQ(chain.count_real(), real);
    double bound = 0;
    for (std::size_t i = 0; i + 1 < p.c.size(); ++i) bound = std::max(bound, std::abs(p.c[i] / p.c.back()));
    bound += 1.0;
    EXPECT_EQ(chain.count(-bound, bound), real);
    // Companion-matrix oracle.
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(8, 8);
    for (int i = 1; i < 8; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < 8; ++i) comp(i, 7) = -p.c[i] / p.c[8];
    const Eigen::VectorXcd ev = comp.eigenvalues();
    int oracle = 0;
    for (int i = 0; i < 8; ++i) oracle += std::abs(ev[i].imag()) < 1e-6 * (1 + std::abs(ev[i]));
    EXPECT_EQ(oracle, real);
  }
}

TEST(SturmCount, RepeatedRootsFlagged) {
  const Poly<double> p = from_roots<double>({1.0, 1.0, -2.0});
  const SturmChain<double> chain(p);
  EXPECT_TRUE(chain.has_repeated_roots());
  EXPECT_EQ(chain.count_real(), 2);
}

TEST(SturmCount, RequiresOrderedInterval) {
  EXPECT_THROW(sturm_count(Poly<double>({-1.0, 0.0, 1.0}), 1.0, -1.0), InputError);
}
