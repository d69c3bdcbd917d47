#pragma once

// Quaternion and dual-quaternion algebra for rigid motions.
//
// Component order is (x, y, z, w): vector part first, scalar last. Every
// 4-vector and 4x4 embedding in this library uses that order, so the
// rotation selector diag(1,1,1,0) picks the vector part.

#include <cmath>
#include <ostream>

#include "dqcalib/error.hpp"
#include "dqcalib/types.hpp"

namespace dqcalib {

struct Quaternion {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double w = 1.0;

  static constexpr Quaternion identity() { return {0.0, 0.0, 0.0, 1.0}; }
  static constexpr Quaternion zero() { return {0.0, 0.0, 0.0, 0.0}; }

  static Quaternion from_vec(const Vec4& v) { return {v[0], v[1], v[2], v[3]}; }
  Vec4 vec() const { return {x, y, z, w}; }
  Vec3 imag() const { return {x, y, z}; }

  /// Rotation by `angle` radians about `axis` (need not be normalized).
  static Quaternion from_axis_angle(const Vec3& axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0) return identity();
    const Vec3 k = axis / n * std::sin(0.5 * angle);
    return {k[0], k[1], k[2], std::cos(0.5 * angle)};
  }

  /// Rotation vector (axis * angle, radians).
  static Quaternion from_rotation_vector(const Vec3& rv) {
    return from_axis_angle(rv, rv.norm());
  }

  double squared_norm() const { return x * x + y * y + z * z + w * w; }
  double norm() const { return std::sqrt(squared_norm()); }

  Quaternion normalized() const {
    const double n = norm();
    return {x / n, y / n, z / n, w / n};
  }

  Mat3 to_rotation_matrix() const {
    const Quaternion q = normalized();
    Mat3 r;
    r << 1 - 2 * (q.y * q.y + q.z * q.z), 2 * (q.x * q.y - q.z * q.w),
        2 * (q.x * q.z + q.y * q.w),  //
        2 * (q.x * q.y + q.z * q.w), 1 - 2 * (q.x * q.x + q.z * q.z),
        2 * (q.y * q.z - q.x * q.w),  //
        2 * (q.x * q.z - q.y * q.w), 2 * (q.y * q.z + q.x * q.w),
        1 - 2 * (q.x * q.x + q.y * q.y);
    return r;
  }

  /// Rotates a 3-vector (assumes unit norm).
  Vec3 rotate(const Vec3& v) const {
    const Vec3 u = imag();
    const Vec3 t = 2.0 * u.cross(v);
    return v + w * t + u.cross(t);
  }

  friend bool operator==(const Quaternion&, const Quaternion&) = default;
};

inline Quaternion operator*(const Quaternion& p, const Quaternion& q) {
  return {p.w * q.x + p.x * q.w + p.y * q.z - p.z * q.y,
          p.w * q.y - p.x * q.z + p.y * q.w + p.z * q.x,
          p.w * q.z + p.x * q.y - p.y * q.x + p.z * q.w,
          p.w * q.w - p.x * q.x - p.y * q.y - p.z * q.z};
}

inline Quaternion operator+(const Quaternion& p, const Quaternion& q) {
  return {p.x + q.x, p.y + q.y, p.z + q.z, p.w + q.w};
}

inline Quaternion operator-(const Quaternion& p, const Quaternion& q) {
  return {p.x - q.x, p.y - q.y, p.z - q.z, p.w - q.w};
}

inline Quaternion operator-(const Quaternion& q) { return {-q.x, -q.y, -q.z, -q.w}; }

inline Quaternion operator*(double s, const Quaternion& q) {
  return {s * q.x, s * q.y, s * q.z, s * q.w};
}

inline Quaternion conjugate(const Quaternion& q) { return {-q.x, -q.y, -q.z, q.w}; }

/// Dot product as real 4-vectors.
inline double dot(const Quaternion& p, const Quaternion& q) {
  return p.x * q.x + p.y * q.y + p.z * q.z + p.w * q.w;
}

/// L(q) with L(q) p == q * p.
inline Mat4 left_matrix(const Quaternion& q) {
  Mat4 m;
  m << q.w, -q.z, q.y, q.x,  //
      q.z, q.w, -q.x, q.y,   //
      -q.y, q.x, q.w, q.z,   //
      -q.x, -q.y, -q.z, q.w;
  return m;
}

/// R(q) with R(q) p == p * q.
inline Mat4 right_matrix(const Quaternion& q) {
  Mat4 m;
  m << q.w, q.z, -q.y, q.x,  //
      -q.z, q.w, q.x, q.y,   //
      q.y, -q.x, q.w, q.z,   //
      -q.x, -q.y, -q.z, q.w;
  return m;
}

inline std::ostream& operator<<(std::ostream& os, const Quaternion& q) {
  return os << '(' << q.x << ", " << q.y << ", " << q.z << ", " << q.w << ')';
}

/// Rigid transform p -> R p + t.
struct Pose {
  Quaternion rotation;
  Vec3 translation = Vec3::Zero();

  static Pose identity() { return {}; }

  Pose inverse() const {
    const Quaternion rc = conjugate(rotation);
    return {rc, -rc.rotate(translation)};
  }

  Vec3 apply(const Vec3& p) const { return rotation.rotate(p) + translation; }

  Eigen::Matrix4d homogeneous() const {
    Eigen::Matrix4d h = Eigen::Matrix4d::Identity();
    h.topLeftCorner<3, 3>() = rotation.to_rotation_matrix();
    h.topRightCorner<3, 1>() = translation;
    return h;
  }
};

/// Composition a∘b: apply b first, then a.
inline Pose operator*(const Pose& a, const Pose& b) {
  return {a.rotation * b.rotation, a.rotation.rotate(b.translation) + a.translation};
}

struct DualQuaternion {
  Quaternion primal;
  Quaternion dual = Quaternion::zero();

  static DualQuaternion identity() { return {Quaternion::identity(), Quaternion::zero()}; }

  friend bool operator==(const DualQuaternion&, const DualQuaternion&) = default;
};

inline DualQuaternion operator*(const DualQuaternion& p, const DualQuaternion& q) {
  return {p.primal * q.primal, p.primal * q.dual + p.dual * q.primal};
}

inline DualQuaternion operator-(const DualQuaternion& q) { return {-q.primal, -q.dual}; }

/// Conjugate q* + eps q'*; for unit DQs this is the inverse motion.
inline DualQuaternion conjugate(const DualQuaternion& q) {
  return {conjugate(q.primal), conjugate(q.dual)};
}

inline constexpr double kUnitTolerance = 1e-10;

/// Checks |q| = 1 and q·q' = 0 to `tol`.
inline bool is_unit(const DualQuaternion& q, double tol = kUnitTolerance) {
  return std::abs(q.primal.norm() - 1.0) <= tol && std::abs(dot(q.primal, q.dual)) <= tol;
}

/// T * R with T = 1 + eps (a/2, 0).
inline DualQuaternion to_dual_quaternion(const Pose& p) {
  const Quaternion half_t{0.5 * p.translation[0], 0.5 * p.translation[1],
                          0.5 * p.translation[2], 0.0};
  return {p.rotation, half_t * p.rotation};
}

/// Inverse of to_dual_quaternion; rejects DQs off the unit manifold (1e-8).
inline Pose to_pose(const DualQuaternion& q) {
  if (!is_unit(q, 1e-8)) {
    throw ConstraintError("dual quaternion is not unit: |q| = " +
                          std::to_string(q.primal.norm()) +
                          ", q.q' = " + std::to_string(dot(q.primal, q.dual)));
  }
  const Quaternion t = 2.0 * (q.dual * conjugate(q.primal));
  return {q.primal, Vec3{t.x, t.y, t.z}};
}

/// Representative of {Q, -Q} with primal w >= 0; on w == 0 the first
/// nonzero vector component is made positive.
inline DualQuaternion canonical(const DualQuaternion& q) {
  constexpr double eps = 1e-12;
  const Quaternion& p = q.primal;
  bool flip = false;
  if (std::abs(p.w) > eps) {
    flip = p.w < 0.0;
  } else if (std::abs(p.x) > eps) {
    flip = p.x < 0.0;
  } else if (std::abs(p.y) > eps) {
    flip = p.y < 0.0;
  } else {
    flip = p.z < 0.0;
  }
  return flip ? -q : q;
}

/// Normalizes the primal part and removes the dual component along it.
inline DualQuaternion project_to_unit(const DualQuaternion& q) {
  const double n = q.primal.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw DegenerateError("cannot project a dual quaternion with zero primal part");
  }
  const Quaternion p = (1.0 / n) * q.primal;
  const Quaternion d = (1.0 / n) * q.dual;
  return {p, d - dot(d, p) * p};
}

inline std::ostream& operator<<(std::ostream& os, const DualQuaternion& q) {
  return os << q.primal << " + eps" << q.dual;
}

}  // namespace dqcalib
