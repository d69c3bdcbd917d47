#pragma once

// Solution strategies for the constrained problem
//   min q^T S q + q'^T M q' + 2 q^T W q'   s.t. |q| = 1, q . q' = 0.
//
// Every strategy picks a unit q and then completes it with the q' that is
// optimal under the orthogonality constraint (recover_dual at mu_from_q),
// so all results are feasible and their costs are directly comparable.
//
// The exact solution maximizes the concave smallest eigenvalue lambda_0(mu)
// of Z(mu); f0(mu) = q0(mu) . q0'(mu) = -1/2 d lambda_0 / d mu is increasing
// and its root is the optimal multiplier.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/toms748_solve.hpp>

#include "dqcalib/dualquat.hpp"
#include "dqcalib/error.hpp"
#include "dqcalib/linalg.hpp"
#include "dqcalib/problem.hpp"

namespace dqcalib {

enum class SolverKind {
  Opt,                ///< 1D line search on f0 (exact)
  TwoSteps,           ///< rotation from M, then translation
  ConvexRelax,        ///< smallest eigenvector of Z0, projected
  SecondOrderMu,      ///< second-order expansion in mu
  SecondOrderLambda,  ///< second-order expansion in lambda
  Iterative,          ///< fixed-point iteration on mu
  Sturm,              ///< root counting on det(Z(mu) - lambda)
  NoiseFree,          ///< null space of the full 8x8 form
};

inline constexpr std::array<SolverKind, 7> kAllSolvers = {
    SolverKind::Opt,           SolverKind::TwoSteps,          SolverKind::ConvexRelax,
    SolverKind::SecondOrderMu, SolverKind::SecondOrderLambda, SolverKind::Iterative,
    SolverKind::Sturm};

inline const char* to_string(SolverKind k) {
  switch (k) {
    case SolverKind::Opt: return "opt";
    case SolverKind::TwoSteps: return "2steps";
    case SolverKind::ConvexRelax: return "convrlx";
    case SolverKind::SecondOrderMu: return "2ndord-mu";
    case SolverKind::SecondOrderLambda: return "2ndord-lambda";
    case SolverKind::Iterative: return "itr";
    case SolverKind::Sturm: return "sturm";
    case SolverKind::NoiseFree: return "noise-free";
  }
  return "?";
}

inline std::optional<SolverKind> parse_solver(std::string_view name) {
  for (SolverKind k : kAllSolvers) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

struct SolverResult {
  DualQuaternion x;     ///< canonical unit dual quaternion
  double mu = 0.0;      ///< multiplier of q . q' = 0
  double lambda = 0.0;  ///< multiplier of |q| = 1 (the cost for exact solvers)
  double cost = 0.0;    ///< quadratic form at x
  SolverKind solver = SolverKind::Opt;
  int iterations = 0;
  double residual = 0.0;  ///< method-specific, see each solver
  double relaxed_lambda = std::numeric_limits<double>::quiet_NaN();
  bool noise_free_path = false;
  std::vector<std::string> warnings;
};

namespace detail {

inline double spectral_scale(const Mat4& a) {
  return std::max(a.cwiseAbs().rowwise().sum().maxCoeff(), std::numeric_limits<double>::min());
}

/// Completes a unit q with its constrained-optimal q'.
inline SolverResult finish(const CalibrationProblem& p, const Vec4& qv, SolverKind kind) {
  const Quaternion q = Quaternion::from_vec(qv.normalized());
  const double mu = mu_from_q(p, q);
  const Quaternion qp = recover_dual(p, q, mu);
  SolverResult r;
  r.x = canonical(DualQuaternion{q, qp});
  r.mu = mu;
  r.cost = cost(p, r.x.primal, r.x.dual);
  r.lambda = r.cost;
  r.solver = kind;
  r.residual = std::abs(dot(r.x.primal, r.x.dual));
  return r;
}

inline double f0_for(const CalibrationProblem& p, double mu, const Vec4& q) {
  return q.dot((mu * p.z2() - 0.5 * p.z1()) * q);
}

}  // namespace detail

/// f0(mu) = q0 . q0' for the smallest eigenvector q0 of Z(mu).
inline double f0(const CalibrationProblem& p, double mu) {
  const auto e = sym_eig4<double>(p.z(mu));
  return detail::f0_for(p, mu, e.vectors.col(0));
}

/// Smallest eigenvalue of Z(mu).
inline double lambda0(const CalibrationProblem& p, double mu) {
  return sym_eig4<double>(p.z(mu)).values[0];
}

// ---------------------------------------------------------------------------
// Bounds and curves

struct MuBounds {
  double lo = 0.0;
  double hi = 0.0;

  double span() const { return hi - lo; }
  bool contains(double mu) const {
    const double eps = 1e-9 * std::max(span(), std::abs(lo) + std::abs(hi));
    return mu >= lo - eps && mu <= hi + eps;
  }
};

/// Range of mu_from_q over all unit q: the extreme eigenvalues of
/// K = (1/2)(U W^T U^-1 + U^-T W U^T) with Z2 = M^-1 = U^T U.
inline MuBounds mu_bounds(const CalibrationProblem& p) {
  const Mat4 u = cholesky4(p.z2());
  const Mat4 u_inv = u.triangularView<Eigen::Upper>().solve(Mat4::Identity());
  const Mat4 half = u_inv.transpose() * p.w() * u.transpose();
  const Mat4 k = 0.5 * (half + half.transpose());
  const auto e = sym_eig4<double>(k);
  return {e.values[0], e.values[3]};
}

struct CurveSample {
  double mu = 0.0;
  std::array<double, 4> lambdas{};  ///< ascending eigenvalues of Z(mu)
  double f0 = 0.0;
};

inline std::vector<CurveSample> sample_curves(const CalibrationProblem& p,
                                              std::span<const double> grid) {
  std::vector<CurveSample> out;
  out.reserve(grid.size());
  for (double mu : grid) {
    if (!std::isfinite(mu)) throw InputError("sample_curves: non-finite grid value");
    const auto e = sym_eig4<double>(p.z(mu));
    CurveSample s;
    s.mu = mu;
    for (int i = 0; i < 4; ++i) s.lambdas[i] = e.values[i];
    s.f0 = detail::f0_for(p, mu, e.vectors.col(0));
    out.push_back(s);
  }
  return out;
}

/// Upper bound on (projected cost - relaxed cost) for a unit q:
/// (1/4) (q^T Z1 q)^2 / q^T Z2 q.
inline double gap_bound(const CalibrationProblem& p, const Quaternion& q) {
  const Vec4 v = q.vec();
  const double den = v.dot(p.z2() * v);
  if (!(den > 1e-14)) throw DegenerateError("gap_bound: q^T Z2 q vanishes");
  const double z1 = v.dot(p.z1() * v);
  return 0.25 * z1 * z1 / den;
}

// ---------------------------------------------------------------------------
// Exact 1D line search

/// Root of f0 on the mu bounds (bracket expanded x2 up to 8 times if
/// needed) with TOMS 748; stops when the bracket is below rel_tol * span.
///
/// residual = |f0(mu*)|; lambda = smallest eigenvalue of Z(mu*).
inline SolverResult solve_opt(const CalibrationProblem& p, double rel_tol = 1e-12) {
  const MuBounds b = mu_bounds(p);
  double lo = b.lo;
  double hi = b.hi;
  int evaluations = 0;
  auto f = [&](double mu) {
    ++evaluations;
    return f0(p, mu);
  };

  double mu_star = 0.5 * (lo + hi);
  const double scale = std::max({std::abs(lo), std::abs(hi), 1e-300});
  if (hi - lo > 1e-15 * scale) {
    double flo = f(lo);
    double fhi = f(hi);
    for (int k = 0; k < 8 && (flo > 0.0 || fhi < 0.0); ++k) {
      const double mid = 0.5 * (lo + hi);
      const double half = hi - lo;
      lo = mid - half;
      hi = mid + half;
      flo = f(lo);
      fhi = f(hi);
    }
    if (flo > 0.0 || fhi < 0.0) {
      throw NumericError("solve_opt: f0 is not bracketed on [" + std::to_string(lo) + ", " +
                         std::to_string(hi) + "]");
    }
    if (flo == 0.0) {
      mu_star = lo;
    } else if (fhi == 0.0) {
      mu_star = hi;
    } else {
      const double tol = rel_tol * (b.hi - b.lo);
      std::uintmax_t max_iter = 200;
      const auto bracket = boost::math::tools::toms748_solve(
          f, lo, hi, flo, fhi, [tol](double a, double c) { return std::abs(c - a) <= tol; },
          max_iter);
      mu_star = 0.5 * (bracket.first + bracket.second);
    }
  }

  const auto e = sym_eig4<double>(p.z(mu_star));
  SolverResult r = detail::finish(p, e.vectors.col(0), SolverKind::Opt);
  r.mu = mu_star;
  r.lambda = e.values[0];
  r.iterations = evaluations;
  r.residual = std::abs(detail::f0_for(p, mu_star, e.vectors.col(0)));
  const double level_gap = e.values[1] - e.values[0];
  if (!(level_gap > 0.0)) {
    throw NumericError("solve_opt: smallest eigenvalues of Z(mu*) coincide");
  }
  if (level_gap < 1e-10 * std::max(1.0, std::abs(e.values[3]))) {
    r.warnings.emplace_back("smallest eigenvalues of Z(mu*) nearly coincide");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Analytic approximations

/// Rotation from the smallest eigenvector of M, translation from the
/// constrained q'. The rotation is independent of alpha.
inline SolverResult solve_two_steps(const CalibrationProblem& p) {
  const auto e = sym_eig4<double>(p.m());
  return detail::finish(p, e.vectors.col(0), SolverKind::TwoSteps);
}

/// Drops q . q' = 0, takes the smallest eigenvector of Z0 and projects.
/// relaxed_lambda = lambda_0(Z0); residual = projected cost - relaxed_lambda.
inline SolverResult solve_convex_relax(const CalibrationProblem& p) {
  const auto e = sym_eig4<double>(p.z0());
  SolverResult r = detail::finish(p, e.vectors.col(0), SolverKind::ConvexRelax);
  r.relaxed_lambda = e.values[0];
  r.residual = r.cost - e.values[0];
  return r;
}

namespace detail {

/// Eigen-decomposition of Z0 with the Z1, Z2 blocks expressed in its
/// eigenbasis. Throws DegenerateError when lambda_0 is not isolated.
struct RelaxedBasis {
  EigenDecomposition4 eig;
  Mat4 z1;  ///< Q^T Z1 Q
  Mat4 z2;  ///< Q^T Z2 Q
  Vec4 gap; ///< lambda_0 - lambda_a (entry 0 unused)

  explicit RelaxedBasis(const CalibrationProblem& p) : eig(sym_eig4<double>(p.z0())) {
    const Mat4& q = eig.vectors;
    z1 = q.transpose() * p.z1() * q;
    z2 = q.transpose() * p.z2() * q;
    const double tol = 1e-9 * std::max(std::abs(eig.values[0]), std::abs(eig.values[3]));
    gap[0] = 0.0;
    for (int a = 1; a < 4; ++a) {
      gap[a] = eig.values[0] - eig.values[a];
      if (!(std::abs(gap[a]) > tol)) {
        throw DegenerateError(
            "smallest eigenvalue of Z0 is not isolated; expansion undefined, use solve_opt");
      }
    }
  }
};

}  // namespace detail

/// Truncated expansion lambda(mu) = sum lambda_k mu^k, q(mu) = sum q_k mu^k
/// of the smallest eigenpair of Z(mu) around mu = 0.
struct MuSeries {
  std::vector<double> lambda;
  std::vector<Vec4> q;

  double lambda_at(double mu) const {
    double acc = 0.0;
    for (auto it = lambda.rbegin(); it != lambda.rend(); ++it) acc = acc * mu + *it;
    return acc;
  }
  Vec4 q_at(double mu) const {
    Vec4 acc = Vec4::Zero();
    for (auto it = q.rbegin(); it != q.rend(); ++it) acc = acc * mu + *it;
    return acc;
  }
};

/// Order-by-order solution of Z(mu) q = lambda q with q^T q = 1, in the
/// eigenbasis {q_a} of Z0. With q_k = sum_a c_{k,a} q_a:
///   c_{k,0}   = -1/2 sum_{n=1}^{k-1} q_{k-n} . q_n
///   lambda_k  = q_0 . (Z1 q_{k-1} - Z2 q_{k-2}) - sum_{l=1}^{k-1} lambda_{k-l} c_{l,0}
///   c_{k,a}   = [q_a . (Z1 q_{k-1} - Z2 q_{k-2}) - sum_{l=1}^{k-1} lambda_{k-l} c_{l,a}]
///               / (lambda_0 - lambda_a)
inline MuSeries expand_mu_series(const CalibrationProblem& p, int order) {
  if (order < 0 || order > 12) throw InputError("expand_mu_series: order must be in [0, 12]");
  const detail::RelaxedBasis basis(p);
  std::vector<Vec4> c(order + 1, Vec4::Zero());
  std::vector<double> lam(order + 1, 0.0);
  c[0][0] = 1.0;
  lam[0] = basis.eig.values[0];
  for (int k = 1; k <= order; ++k) {
    Vec4 u = basis.z1 * c[k - 1];
    if (k >= 2) u -= basis.z2 * c[k - 2];
    double ck0 = 0.0;
    for (int n = 1; n <= k - 1; ++n) ck0 -= 0.5 * c[k - n].dot(c[n]);
    double lk = u[0];
    for (int l = 1; l <= k - 1; ++l) lk -= lam[k - l] * c[l][0];
    lam[k] = lk;
    c[k][0] = ck0;
    for (int a = 1; a < 4; ++a) {
      double num = u[a];
      for (int l = 1; l <= k - 1; ++l) num -= lam[k - l] * c[l][a];
      c[k][a] = num / basis.gap[a];
    }
  }
  MuSeries s;
  s.lambda = std::move(lam);
  s.q.reserve(c.size());
  for (const Vec4& ck : c) s.q.push_back(basis.eig.vectors * ck);
  return s;
}

struct SecondOrderMuTerms {
  double mu = 0.0;  ///< stationary point of the quadratic lambda(mu)
  Vec4 q;           ///< unnormalized second-order eigenvector at mu
};

/// Closed-form second-order terms (all sums over a, b = 1..3, with
/// Z_i^{ab} = q_a^T Z_i q_b and d_a = lambda_0 - lambda_a):
///   mu = (1/2) Z1^{00} / (Z2^{00} - sum (Z1^{a0})^2 / d_a)
///   q  = q_0 + mu sum (Z1^{a0}/d_a) q_a
///        + mu^2 ( -1/2 q_0 sum (Z1^{a0}/d_a)^2
///                 + sum [ sum_b Z1^{b0} Z1^{ab}/d_b - Z2^{a0} - Z1^{00} Z1^{a0}/d_a ] / d_a q_a )
inline SecondOrderMuTerms second_order_mu_terms(const CalibrationProblem& p) {
  const detail::RelaxedBasis basis(p);
  const Mat4& z1 = basis.z1;
  const Mat4& z2 = basis.z2;
  const Vec4& d = basis.gap;
  double sum_sq = 0.0;
  for (int a = 1; a < 4; ++a) sum_sq += z1(a, 0) * z1(a, 0) / d[a];
  const double den = z2(0, 0) - sum_sq;
  if (!(std::abs(den) > 0.0)) throw DegenerateError("second-order mu: vanishing denominator");
  const double mu = 0.5 * z1(0, 0) / den;

  Vec4 first = Vec4::Zero();
  Vec4 second = Vec4::Zero();
  double c1_sq = 0.0;
  for (int a = 1; a < 4; ++a) {
    const double c1 = z1(a, 0) / d[a];
    first[a] = c1;
    c1_sq += c1 * c1;
    double mix = 0.0;
    for (int b = 1; b < 4; ++b) mix += z1(b, 0) * z1(a, b) / d[b];
    second[a] = (mix - z2(a, 0) - z1(0, 0) * z1(a, 0) / d[a]) / d[a];
  }
  second[0] = -0.5 * c1_sq;
  Vec4 coeffs = Vec4::Unit(0) + mu * first + mu * mu * second;
  return {mu, basis.eig.vectors * coeffs};
}

/// Second-order expansion in mu around the relaxed solution.
/// residual = |mu_(2) - mu_from_q(q_(2))|.
inline SolverResult solve_second_order_mu(const CalibrationProblem& p) {
  const SecondOrderMuTerms t = second_order_mu_terms(p);
  SolverResult r = detail::finish(p, t.q, SolverKind::SecondOrderMu);
  r.residual = std::abs(t.mu - r.mu);
  return r;
}

/// Second-order expansion in lambda = lambda_0 + dl around the relaxed
/// solution, with mu(dl) = m1 dl + m2 dl^2 and q(dl) = q_0 + dl q1 + dl^2 q2
/// (Z0 eigenbasis, d_a = lambda_0 - lambda_a, a = 1..3):
///   m1 = 1 / Z1^{00}
///   q1_a = m1 Z1^{a0} / d_a
///   m2 = -(m1 q_0.Z1 q1 - m1^2 Z2^{00}) / Z1^{00}
///   q2_a = (q_a.Z1 (m1 q1 + m2 q_0) - m1^2 Z2^{a0} - q1_a) / d_a,  q2_0 = -|q1|^2/2
/// The constraint q^T (Z1/2 - mu Z2) q = 0 to second order reads
/// c0 + c1 dl + c2 dl^2 = 0; the small root is taken.
///
/// residual = |dl|. When Z1^{00} vanishes the relaxed solution is returned
/// with a warning.
inline SolverResult solve_second_order_lambda(const CalibrationProblem& p) {
  const detail::RelaxedBasis basis(p);
  const Mat4& z1 = basis.z1;
  const Mat4& z2 = basis.z2;
  const Vec4& d = basis.gap;
  const double z1_00 = z1(0, 0);
  if (!(std::abs(z1_00) > 1e-12 * detail::spectral_scale(p.z1()))) {
    SolverResult r = detail::finish(p, basis.eig.vectors.col(0), SolverKind::SecondOrderLambda);
    r.relaxed_lambda = basis.eig.values[0];
    r.warnings.emplace_back("q0^T Z1 q0 vanishes; returning the relaxed solution (mu = 0)");
    return r;
  }
  const double m1 = 1.0 / z1_00;
  Vec4 q1 = Vec4::Zero();
  for (int a = 1; a < 4; ++a) q1[a] = m1 * z1(a, 0) / d[a];
  const Vec4 z1q1 = z1 * q1;
  const Vec4 z2q1 = z2 * q1;
  const double m2 = -(m1 * z1q1[0] - m1 * m1 * z2(0, 0)) / z1_00;
  const Vec4 drive = z1 * (m1 * q1 + m2 * Vec4::Unit(0));
  Vec4 q2 = Vec4::Zero();
  q2[0] = -0.5 * q1.squaredNorm();
  for (int a = 1; a < 4; ++a) q2[a] = (drive[a] - m1 * m1 * z2(a, 0) - q1[a]) / d[a];

  const double c0 = 0.5 * z1_00;
  const double c1 = z1q1[0] - m1 * z2(0, 0);
  const double c2 = (z1 * q2)[0] + 0.5 * q1.dot(z1q1) - m2 * z2(0, 0) - 2.0 * m1 * z2q1[0];
  const double disc = c1 * c1 - 4.0 * c0 * c2;
  if (disc < 0.0) throw NumericError("second-order lambda: negative discriminant");
  const double denom = c1 + std::copysign(std::sqrt(disc), c1);
  if (denom == 0.0) throw NumericError("second-order lambda: degenerate constraint quadratic");
  const double dl = -2.0 * c0 / denom;

  const Vec4 coeffs = Vec4::Unit(0) + dl * q1 + dl * dl * q2;
  SolverResult r = detail::finish(p, basis.eig.vectors * coeffs, SolverKind::SecondOrderLambda);
  r.relaxed_lambda = basis.eig.values[0];
  r.residual = std::abs(dl);
  return r;
}

// ---------------------------------------------------------------------------
// Fixed-point iteration

/// mu <- mu_from_q(smallest eigenvector of Z(mu)) from mu = 0 until the
/// step is at most eps. residual = last |step|.
inline SolverResult solve_iterative(const CalibrationProblem& p, double eps = 1e-12,
                                    int max_iter = 200) {
  if (!(eps > 0.0)) throw InputError("solve_iterative: eps must be positive");
  std::vector<std::string> warnings;
  const auto relaxed = sym_eig4<double>(p.z0());
  if (relaxed.values[0] < 1e-8 * detail::spectral_scale(p.z0())) {
    warnings.emplace_back("near noise-free data: fixed-point iteration may be unstable");
  }
  double mu = 0.0;
  double step = std::numeric_limits<double>::infinity();
  Vec4 q = relaxed.vectors.col(0);
  int it = 0;
  while (it < max_iter) {
    ++it;
    const auto e = it == 1 ? relaxed : sym_eig4<double>(p.z(mu));
    q = e.vectors.col(0);
    const double next = mu_from_q(p, Quaternion::from_vec(q));
    step = std::abs(next - mu);
    mu = next;
    if (step <= eps) break;
  }
  if (step > eps) {
    throw NumericError("solve_iterative: no convergence after " + std::to_string(max_iter) +
                       " iterations (last mu " + std::to_string(mu) + ", step " +
                       std::to_string(step) + ")");
  }
  SolverResult r = detail::finish(p, q, SolverKind::Iterative);
  r.iterations = it;
  r.residual = step;
  r.warnings = std::move(warnings);
  return r;
}

// ---------------------------------------------------------------------------
// Root counting on the algebraic curve det(Z(mu) - lambda I) = 0

namespace detail {

/// Polynomial entries P_ij(t) of Z(scale * t) - lambda I in a fixed basis.
using PolyMat4 = std::array<std::array<Poly<long double>, 4>, 4>;

inline Poly<long double> det4(const PolyMat4& m) {
  // Laplace expansion along the first two rows (2x2 minors times
  // complementary 2x2 minors).
  auto minor2 = [&](int r0, int r1, int c0, int c1) {
    return m[r0][c0] * m[r1][c1] + Poly<long double>({-1.0L}) * (m[r0][c1] * m[r1][c0]);
  };
  static constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
  Poly<long double> out({0.0L});
  for (int i = 0; i < 6; ++i) {
    const int a = pairs[i][0];
    const int b = pairs[i][1];
    const int c = pairs[5 - i][0];
    const int d = pairs[5 - i][1];
    const long double sign = ((a + b + 1) % 2 == 0) ? 1.0L : -1.0L;
    out = out + Poly<long double>({sign}) * (minor2(0, 1, a, b) * minor2(2, 3, c, d));
  }
  return out;
}

}  // namespace detail

/// Variable scaling for the mu-polynomial: (det Z0 / det Z2)^(1/8), the
/// geometric mean of the root magnitudes at lambda = 0.
inline double mu_polynomial_scale(const CalibrationProblem& p) {
  const double d0 = p.z0().determinant();
  const double d2 = p.z2().determinant();
  if (d0 > 0.0 && d2 > 0.0) return std::pow(d0 / d2, 0.125);
  const MuBounds b = mu_bounds(p);
  return std::max({std::abs(b.lo), std::abs(b.hi), 1.0});
}

/// det(Z(scale * t) - lambda I) as a degree-8 polynomial in t, expanded
/// exactly in extended precision in the eigenbasis of Z0.
inline Poly<long double> mu_polynomial_expanded(const CalibrationProblem& p, double lambda,
                                                double scale) {
  using LD = long double;
  using MatL = Matrix4<LD>;
  const auto eig = sym_eig4<double>(p.z0());
  const MatL q = eig.vectors.cast<LD>();
  const MatL z0 = q.transpose() * p.z0().cast<LD>() * q;
  const MatL z1 = q.transpose() * p.z1().cast<LD>() * q;
  const MatL z2 = q.transpose() * p.z2().cast<LD>() * q;
  const LD s = scale;
  detail::PolyMat4 m;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const LD c0 = z0(i, j) - (i == j ? LD(lambda) : LD(0));
      m[i][j] = Poly<LD>({c0, s * z1(i, j), -s * s * z2(i, j)});
    }
  }
  Poly<LD> out = detail::det4(m);
  out.c.resize(9, 0.0L);
  return out;
}

/// Chebyshev node interval (in t = mu / scale) for the interpolated
/// polynomial: the mu bounds, or [-1, 1] when they collapse.
inline std::pair<double, double> mu_polynomial_nodes(const CalibrationProblem& p, double scale) {
  const MuBounds b = mu_bounds(p);
  const double lo = b.lo / scale;
  const double hi = b.hi / scale;
  if (!(hi - lo > 1e-3)) return {-1.0, 1.0};
  return {lo, hi};
}

/// det(Z(scale * t) - lambda I) as a degree-8 polynomial in t, by
/// Chebyshev interpolation of the extended-precision determinant on the
/// node interval.
inline Poly<long double> mu_polynomial(const CalibrationProblem& p, double lambda, double scale,
                                       std::pair<double, double> nodes) {
  using LD = long double;
  const Matrix4<LD> z0 = p.z0().cast<LD>() - LD(lambda) * Matrix4<LD>::Identity();
  const Matrix4<LD> z1 = p.z1().cast<LD>();
  const Matrix4<LD> z2 = p.z2().cast<LD>();
  const LD s = scale;
  return fit_polynomial<LD>(
      [&](LD t) {
        const LD mu = s * t;
        const Matrix4<LD> z = z0 + mu * z1 - mu * mu * z2;
        return z.determinant();
      },
      8, LD(nodes.first), LD(nodes.second));
}

inline Poly<long double> mu_polynomial(const CalibrationProblem& p, double lambda, double scale) {
  return mu_polynomial(p, lambda, scale, mu_polynomial_nodes(p, scale));
}

inline constexpr long double kSturmRelZero = 1e-16L;

/// Distinct real mu with det(Z(mu) - lambda I) = 0.
inline int count_mu_roots(const CalibrationProblem& p, double lambda, double scale) {
  return SturmChain<long double>(mu_polynomial(p, lambda, scale), kSturmRelZero).count_real();
}

inline int count_mu_roots(const CalibrationProblem& p, double lambda) {
  return count_mu_roots(p, lambda, mu_polynomial_scale(p));
}

namespace detail {

/// Real roots (in t) of a polynomial with simple real roots, isolated by
/// Sturm bisection and polished by bisection on the sign.
inline std::vector<long double> real_roots(const Poly<long double>& poly) {
  using LD = long double;
  const SturmChain<LD> chain(poly, kSturmRelZero);
  LD bound = 0;
  for (std::size_t i = 0; i + 1 < poly.c.size(); ++i) {
    bound = std::max(bound, std::abs(poly.c[i] / poly.c.back()));
  }
  bound += 1;
  std::vector<LD> roots;
  struct Interval {
    LD a, b;
    int n;
  };
  std::vector<Interval> stack{{-bound, bound, chain.count(-bound, bound)}};
  while (!stack.empty()) {
    const Interval iv = stack.back();
    stack.pop_back();
    if (iv.n <= 0) continue;
    const LD mid = LD(0.5) * (iv.a + iv.b);
    if (iv.n == 1 || iv.b - iv.a < LD(1e-17) * bound) {
      LD a = iv.a;
      LD b = iv.b;
      LD fa = poly(a);
      if (iv.n == 1 && fa * poly(b) < 0) {
        for (int k = 0; k < 200 && b - a > LD(1e-18) * (std::abs(a) + std::abs(b)); ++k) {
          const LD m = LD(0.5) * (a + b);
          const LD fm = poly(m);
          if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
          } else {
            b = m;
          }
        }
      }
      for (int k = 0; k < iv.n; ++k) roots.push_back(LD(0.5) * (a + b));
      continue;
    }
    const int left = chain.count(iv.a, mid);
    stack.push_back({iv.a, mid, left});
    stack.push_back({mid, iv.b, iv.n - left});
  }
  std::sort(roots.begin(), roots.end());
  return roots;
}

}  // namespace detail

/// Smallest lambda at which det(Z(mu) - lambda I) loses two of its eight
/// real mu-roots, found by bisection on the Sturm count over
/// [0, cost of the two-step solution] until the bracket is below
/// rel_tol of the upper bound. mu* is the midpoint of the two roots that
/// merge there.
///
/// residual = final lambda bracket width.
inline SolverResult solve_sturm(const CalibrationProblem& p, double rel_tol = 1e-10) {
  const double scale = mu_polynomial_scale(p);
  const auto nodes = mu_polynomial_nodes(p, scale);
  auto poly_at = [&](double lambda) { return mu_polynomial(p, lambda, scale, nodes); };
  auto count = [&](double lambda) {
    return SturmChain<long double>(poly_at(lambda), kSturmRelZero).count_real();
  };

  const int at_zero = count(0.0);
  if (at_zero != 8) {
    throw DegenerateError("solve_sturm: expected 8 real mu-roots at lambda = 0, found " +
                          std::to_string(at_zero));
  }
  double lo = 0.0;
  double hi = solve_two_steps(p).cost * (1.0 + 1e-9) + std::numeric_limits<double>::min();
  int grow = 0;
  while (count(hi) >= 8) {
    if (++grow > 60) throw NumericError("solve_sturm: root count never drops below 8");
    lo = hi;
    hi *= 2.0;
  }
  int iterations = 0;
  while (hi - lo > rel_tol * hi && iterations < 200) {
    const double mid = 0.5 * (lo + hi);
    (count(mid) >= 8 ? lo : hi) = mid;
    ++iterations;
  }

  // The merging pair at lambda = lo encloses the maximum of lambda_0.
  const auto roots = detail::real_roots(poly_at(lo));
  double mu_star = 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < roots.size(); ++i) {
    const double mid = scale * static_cast<double>(0.5L * (roots[i] + roots[i + 1]));
    const double l0 = lambda0(p, mid);
    if (l0 > best) {
      best = l0;
      mu_star = mid;
    }
  }
  if (roots.size() < 2) throw NumericError("solve_sturm: could not isolate the merging roots");

  const auto e = sym_eig4<double>(p.z(mu_star));
  SolverResult r = detail::finish(p, e.vectors.col(0), SolverKind::Sturm);
  r.lambda = 0.5 * (lo + hi);
  r.iterations = iterations;
  r.residual = hi - lo;
  return r;
}

// ---------------------------------------------------------------------------
// Noise-free data

/// Exact solution for consistent (noise-free) pairs, where M is singular.
/// The full 8x8 form [[S, W], [W^T, M]] then has a two-dimensional null
/// space spanned by (q, q') and (0, q); the unit dual quaternion in it is
/// the solution. Throws DegenerateError when the null space is not exactly
/// two-dimensional.
inline SolverResult solve_noise_free(std::span<const MotionPair> pairs, double alpha) {
  if (pairs.size() < 2) throw InputError("solve_noise_free: need at least 2 motion pairs");
  const QuadraticForm f = accumulate(pairs, alpha);
  Eigen::Matrix<double, 8, 8> g;
  g << f.s, f.w, f.w.transpose(), f.m;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, 8, 8>> es(g);
  const auto& vals = es.eigenvalues();
  const double top = std::max(vals[7], std::numeric_limits<double>::min());
  if (vals[1] > 1e-8 * top) {
    throw DegenerateError("noise-free solve: the data is not consistent (no exact solution)");
  }
  if (vals[2] <= 1e-6 * top) {
    throw DegenerateError("noise-free solve: motions do not determine the transform uniquely");
  }
  const Eigen::Matrix<double, 8, 1> u1 = es.eigenvectors().col(0);
  const Eigen::Matrix<double, 8, 1> u2 = es.eigenvectors().col(1);
  const Vec4 a1 = u1.head<4>(), b1 = u1.tail<4>();
  const Vec4 a2 = u2.head<4>(), b2 = u2.tail<4>();
  // (c a1 + s a2) . (c b1 + s b2) = 0 with (c, s) = (cos th, sin th).
  const double qa = a1.dot(b1);
  const double qb = a1.dot(b2) + a2.dot(b1);
  const double qc = a2.dot(b2);
  const double radius = std::hypot(0.5 * (qa - qc), 0.5 * qb);
  const double phase = std::atan2(0.5 * qb, 0.5 * (qa - qc));
  const double ratio = radius > 0.0 ? std::clamp(-0.5 * (qa + qc) / radius, -1.0, 1.0) : 0.0;
  const double spread = std::acos(ratio);
  Vec4 best_q = a1;
  Vec4 best_qp = b1;
  double best_norm = -1.0;
  for (double two_theta : {phase + spread, phase - spread}) {
    const double c = std::cos(0.5 * two_theta);
    const double s = std::sin(0.5 * two_theta);
    const Vec4 q = c * a1 + s * a2;
    if (q.norm() > best_norm) {
      best_norm = q.norm();
      best_q = q;
      best_qp = c * b1 + s * b2;
    }
  }
  const DualQuaternion x = canonical(project_to_unit(
      {Quaternion::from_vec(best_q), Quaternion::from_vec(best_qp)}));
  Eigen::Matrix<double, 8, 1> v;
  v << x.primal.vec(), x.dual.vec();
  SolverResult r;
  r.x = x;
  r.cost = v.dot(g * v);
  r.lambda = r.cost;
  r.mu = 0.0;
  r.solver = SolverKind::NoiseFree;
  r.residual = vals[1] / top;
  r.noise_free_path = true;
  return r;
}

// ---------------------------------------------------------------------------
// Dispatch

struct SolveOptions {
  std::optional<Prior> prior;
  double opt_tol = 1e-12;       ///< relative bracket tolerance for solve_opt
  double sturm_tol = 1e-10;     ///< relative lambda tolerance for solve_sturm
  double iter_eps = 1e-12;      ///< step tolerance for solve_iterative
  int iter_max = 200;
};

inline SolverResult solve(const CalibrationProblem& p, SolverKind kind,
                          const SolveOptions& opt = {}) {
  switch (kind) {
    case SolverKind::Opt: return solve_opt(p, opt.opt_tol);
    case SolverKind::TwoSteps: return solve_two_steps(p);
    case SolverKind::ConvexRelax: return solve_convex_relax(p);
    case SolverKind::SecondOrderMu:
    case SolverKind::SecondOrderLambda:
      try {
        return kind == SolverKind::SecondOrderMu ? solve_second_order_mu(p)
                                                 : solve_second_order_lambda(p);
      } catch (const DegenerateError& e) {
        SolverResult r = solve_opt(p, opt.opt_tol);
        r.solver = kind;
        r.warnings.emplace_back(std::string(e.what()) + "; fell back to the line search");
        return r;
      }
    case SolverKind::Iterative: return solve_iterative(p, opt.iter_eps, opt.iter_max);
    case SolverKind::Sturm: return solve_sturm(p, opt.sturm_tol);
    case SolverKind::NoiseFree: break;
  }
  throw InputError("solve: the noise-free solver works on pairs, use calibrate()");
}

/// Builds the problem from pairs and runs `kind`. Consistent (noise-free)
/// data makes M singular; without a prior, that case is answered by the
/// null-space solve and flagged with noise_free_path.
inline SolverResult calibrate(std::span<const MotionPair> pairs, double alpha, SolverKind kind,
                              const SolveOptions& opt = {}) {
  std::optional<CalibrationProblem> problem;
  try {
    problem.emplace(build_problem(pairs, alpha, opt.prior));
  } catch (const RankError& rank) {
    if (opt.prior || kind == SolverKind::NoiseFree) {
      if (kind != SolverKind::NoiseFree) throw;
    }
    SolverResult r;
    try {
      r = solve_noise_free(pairs, alpha);
    } catch (const DegenerateError& e) {
      throw DegenerateError(std::string(rank.what()) + "; " + e.what());
    }
    r.solver = kind;
    r.warnings.emplace_back("M is rank deficient; solved exactly via the noise-free null space");
    return r;
  }
  if (kind == SolverKind::NoiseFree) return solve_noise_free(pairs, alpha);
  return solve(*problem, kind, opt);
}

/// Estimate only, for timing: each method computes just the data it needs.
/// The two-step method never forms S or Z0.
inline DualQuaternion estimate(std::span<const MotionPair> pairs, double alpha, SolverKind kind,
                               const SolveOptions& opt = {}) {
  if (kind != SolverKind::TwoSteps || opt.prior) return calibrate(pairs, alpha, kind, opt).x;
  if (pairs.size() < 2) throw InputError("estimate: need at least 2 motion pairs");
  const QuadraticForm f = accumulate(pairs, alpha, /*with_s=*/false);
  const auto e = sym_eig4<double>(f.m);
  if (!(e.values[0] > 0.0) || e.values[3] / e.values[0] > kMaxCondition) {
    return calibrate(pairs, alpha, kind, opt).x;
  }
  const Mat4 z2 = e.vectors * e.values.cwiseInverse().asDiagonal() * e.vectors.transpose();
  const Vec4 q = e.vectors.col(0);
  const Vec4 wtq = f.w.transpose() * q;
  const Vec4 z2q = z2 * q;
  const double mu = z2q.dot(wtq) / q.dot(z2q);  // (1/2) q^T Z1 q / q^T Z2 q
  const Vec4 qp = z2 * (mu * q - wtq);
  return canonical(DualQuaternion{Quaternion::from_vec(q), Quaternion::from_vec(qp)});
}

}  // namespace dqcalib
