#pragma once

// The hand-eye least-squares problem in dual-quaternion form.
//
// For pairs (C_i, H_i) of corresponding relative motions the residuals are
//   A_i q            with A_i = L(q_Ci) - R(q_Hi)
//   B_i q + A_i q'   with B_i = L(q'_Ci) - R(q'_Hi)
// and the cost q^T S q + q'^T M q' + 2 q^T W q' collects them with
//   S = sum A^T A + alpha^2 sum B^T B,  M = alpha^2 sum A^T A,
//   W = alpha^2 sum B^T A.
// Eliminating q' gives the one-parameter family
//   Z(mu) = Z0 + mu Z1 - mu^2 Z2,
//   Z0 = S - W M^-1 W^T,  Z1 = W M^-1 + M^-1 W^T,  Z2 = M^-1.

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqcalib/dualquat.hpp"
#include "dqcalib/error.hpp"
#include "dqcalib/linalg.hpp"

namespace dqcalib {

/// One corresponding pair of relative motions, stored in canonical form:
/// `cam` has non-negative primal scalar and `hand` is sign-flipped so that
/// q_cam . q_hand >= 0.
class MotionPair {
 public:
  MotionPair(const DualQuaternion& cam, const DualQuaternion& hand) {
    if (!is_unit(cam, 1e-8) || !is_unit(hand, 1e-8)) {
      throw ConstraintError("MotionPair: both motions must be unit dual quaternions");
    }
    cam_ = canonical(cam);
    hand_ = dot(cam_.primal, hand.primal) < 0.0 ? -hand : hand;
  }

  MotionPair(const Pose& cam, const Pose& hand)
      : MotionPair(to_dual_quaternion(cam), to_dual_quaternion(hand)) {}

  const DualQuaternion& cam() const { return cam_; }
  const DualQuaternion& hand() const { return hand_; }

 private:
  DualQuaternion cam_;
  DualQuaternion hand_;
};

/// The raw quadratic form (S, M, W) before elimination of q'.
struct QuadraticForm {
  Mat4 s = Mat4::Zero();
  Mat4 m = Mat4::Zero();
  Mat4 w = Mat4::Zero();
};

/// Sums the per-pair blocks. With `with_s == false` the S block is left zero,
/// which is all the rotation-first solver needs.
inline QuadraticForm accumulate(std::span<const MotionPair> pairs, double alpha,
                                bool with_s = true) {
  Mat4 ata = Mat4::Zero();
  Mat4 btb = Mat4::Zero();
  Mat4 bta = Mat4::Zero();
  for (const auto& pair : pairs) {
    const Mat4 a = left_matrix(pair.cam().primal) - right_matrix(pair.hand().primal);
    const Mat4 b = left_matrix(pair.cam().dual) - right_matrix(pair.hand().dual);
    ata.noalias() += a.transpose() * a;
    bta.noalias() += b.transpose() * a;
    if (with_s) btb.noalias() += b.transpose() * b;
  }
  const double a2 = alpha * alpha;
  QuadraticForm f;
  if (with_s) f.s = ata + a2 * btb;
  f.m = a2 * ata;
  f.w = a2 * bta;
  return f;
}

/// Quadratic penalty pulling the solution toward `anchor`: rotation weight
/// `a` on the vector part of anchor* q, translation weight `b` on the dual
/// part of anchor* Q.
struct Prior {
  DualQuaternion anchor = DualQuaternion::identity();
  double a = 0.0;
  double b = 0.0;

  void validate() const {
    if (!is_unit(anchor, 1e-8)) throw ConstraintError("Prior: anchor must be a unit dual quaternion");
    if (!(a >= 0.0) || !(b >= 0.0)) throw InputError("Prior: weights must be non-negative");
  }
};

namespace detail {

inline QuadraticForm with_prior(QuadraticForm f, const Prior& prior) {
  prior.validate();
  const Mat4 l_star = left_matrix(conjugate(prior.anchor.primal));
  const Mat4 l_dual_star = left_matrix(conjugate(prior.anchor.dual));
  const Eigen::Vector4d g(1.0, 1.0, 1.0, 0.0);
  const Mat4 w_tilde = l_dual_star.transpose() * l_star;
  if ((w_tilde + w_tilde.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + w_tilde.cwiseAbs().maxCoeff())) {
    throw NumericError("Prior: translation coupling block is not antisymmetric");
  }
  f.s += prior.a * (l_star.transpose() * g.asDiagonal() * l_star);
  f.w += prior.b * w_tilde;
  f.m += prior.b * Mat4::Identity();
  return f;
}

}  // namespace detail

/// Assembled problem with the cached Z-family. Immutable once built.
class CalibrationProblem {
 public:
  /// Validates the form (S, M symmetric; M positive definite with condition
  /// at most 1e12) and derives Z0, Z1, Z2.
  static CalibrationProblem from_form(const QuadraticForm& form, double alpha, int n_pairs,
                                      double prior_offset = 0.0) {
    const double s_scale = std::max(form.s.cwiseAbs().maxCoeff(), 1e-300);
    const double m_scale = std::max(form.m.cwiseAbs().maxCoeff(), 1e-300);
    if ((form.s - form.s.transpose()).cwiseAbs().maxCoeff() > 1e-10 * s_scale ||
        (form.m - form.m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * m_scale) {
      throw InputError("CalibrationProblem: S and M must be symmetric");
    }
    const auto eig = sym_eig4<double>(form.m);
    const double big = eig.values.cwiseAbs().maxCoeff();
    const double cond = eig.values[0] > 0.0 ? big / eig.values[0] : std::numeric_limits<double>::infinity();
    if (!(cond <= kMaxCondition)) {
      throw RankError(
          "M is singular or ill-conditioned (condition " + std::to_string(cond) +
              "); noise-free or degenerate motions: use the noise-free null-space solve "
              "or add a prior with b > 0",
          cond);
    }

    CalibrationProblem p;
    p.s_ = 0.5 * (form.s + form.s.transpose());
    p.m_ = 0.5 * (form.m + form.m.transpose());
    p.w_ = form.w;
    p.alpha_ = alpha;
    p.n_pairs_ = n_pairs;
    p.prior_offset_ = prior_offset;
    p.m_condition_ = cond;
    p.z2_ = eig.vectors * eig.values.cwiseInverse().asDiagonal() * eig.vectors.transpose();
    p.z2_ = 0.5 * (p.z2_ + p.z2_.transpose()).eval();
    const Mat4 wz2 = p.w_ * p.z2_;
    p.z1_ = wz2 + wz2.transpose();
    const Mat4 z0 = p.s_ - wz2 * p.w_.transpose();
    p.z0_ = 0.5 * (z0 + z0.transpose());
    return p;
  }

  const Mat4& s() const { return s_; }
  const Mat4& m() const { return m_; }
  const Mat4& w() const { return w_; }
  const Mat4& z0() const { return z0_; }
  const Mat4& z1() const { return z1_; }
  const Mat4& z2() const { return z2_; }
  double alpha() const { return alpha_; }
  int n_pairs() const { return n_pairs_; }
  /// b |anchor'|^2: the constant dropped from the prior cost.
  double prior_offset() const { return prior_offset_; }
  double m_condition() const { return m_condition_; }

  QuadraticForm form() const { return {s_, m_, w_}; }

  /// Z0 + mu Z1 - mu^2 Z2.
  Mat4 z(double mu) const { return z0_ + mu * z1_ - (mu * mu) * z2_; }

 private:
  CalibrationProblem() = default;

  Mat4 s_, m_, w_, z0_, z1_, z2_;
  double alpha_ = 1.0;
  int n_pairs_ = 0;
  double prior_offset_ = 0.0;
  double m_condition_ = 0.0;
};

/// Builds the problem from at least two pairs, optionally with a prior
/// folded in before M is checked (a prior with b > 0 regularizes M).
inline CalibrationProblem build_problem(std::span<const MotionPair> pairs, double alpha,
                                        const std::optional<Prior>& prior = std::nullopt) {
  if (pairs.size() < 2) throw InputError("build_problem: need at least 2 motion pairs");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InputError("build_problem: alpha must be positive");
  QuadraticForm form = accumulate(pairs, alpha);
  double offset = 0.0;
  if (prior) {
    form = detail::with_prior(form, *prior);
    offset = prior->b * prior->anchor.dual.squared_norm();
  }
  return CalibrationProblem::from_form(form, alpha, static_cast<int>(pairs.size()), offset);
}

/// Adds a prior to an existing problem; the Z-family is recomputed.
inline CalibrationProblem apply_prior(const CalibrationProblem& p, const Prior& prior) {
  const QuadraticForm form = detail::with_prior(p.form(), prior);
  return CalibrationProblem::from_form(form, p.alpha(), p.n_pairs(),
                                       p.prior_offset() + prior.b * prior.anchor.dual.squared_norm());
}

inline Mat4 z_of_mu(const CalibrationProblem& p, double mu) { return p.z(mu); }

/// q' = M^-1 (mu I - W^T) q.
inline Quaternion recover_dual(const CalibrationProblem& p, const Quaternion& q, double mu) {
  const Vec4 v = q.vec();
  return Quaternion::from_vec(p.z2() * (mu * v - p.w().transpose() * v));
}

/// The mu for which recover_dual(q, mu) is orthogonal to q:
/// (1/2) q^T Z1 q / q^T Z2 q.
inline double mu_from_q(const CalibrationProblem& p, const Quaternion& q) {
  const Vec4 v = q.vec();
  const double den = v.dot(p.z2() * v);
  if (!(den > 1e-14)) throw DegenerateError("mu_from_q: q^T Z2 q vanishes");
  return 0.5 * v.dot(p.z1() * v) / den;
}

/// q^T S q + q'^T M q' + 2 q^T W q' (no constraint terms).
inline double cost(const CalibrationProblem& p, const Quaternion& q, const Quaternion& qp) {
  const Vec4 a = q.vec();
  const Vec4 b = qp.vec();
  return a.dot(p.s() * a) + b.dot(p.m() * b) + 2.0 * a.dot(p.w() * b);
}

/// Cost minimized over feasible q' for a fixed unit q:
/// q^T Z0 q + (1/4) (q^T Z1 q)^2 / q^T Z2 q.
inline double reduced_cost(const CalibrationProblem& p, const Quaternion& q) {
  const Vec4 v = q.vec();
  const double z1 = v.dot(p.z1() * v);
  return v.dot(p.z0() * v) + 0.25 * z1 * z1 / v.dot(p.z2() * v);
}

}  // namespace dqcalib
