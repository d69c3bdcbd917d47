#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "dqcalib/dualquat.hpp"
#include "dqcalib/error.hpp"

namespace dqcalib {

struct CalibrationError {
  double rot_deg = 0.0;   ///< geodesic angle to the reference rotation
  double trans_cm = 0.0;  ///< Euclidean translation distance
};

/// Geodesic angle between two rotations, degrees. Sign of either input
/// is irrelevant. Equals 2 acos |<a, b>|, evaluated as
/// 2 atan2(|vec(a^* b)|, |<a, b>|) to keep precision near 0.
inline double rotation_distance_deg(const Quaternion& a, const Quaternion& b) {
  const Quaternion d = conjugate(a.normalized()) * b.normalized();
  return 2.0 * std::atan2(d.imag().norm(), std::abs(d.w)) * 180.0 / std::numbers::pi;
}

inline CalibrationError calibration_error(const DualQuaternion& est, const Pose& gt) {
  const Pose p = to_pose(est);
  return {rotation_distance_deg(p.rotation, gt.rotation),
          100.0 * (p.translation - gt.translation).norm()};
}

/// (alg - ref) / (alg + ref), 0 when both vanish.
inline double signed_relative_cost_diff(double c_alg, double c_ref) {
  const double sum = c_alg + c_ref;
  if (sum == 0.0) return 0.0;
  if (!(sum > 0.0)) throw InputError("signed_relative_cost_diff: costs must be non-negative");
  return (c_alg - c_ref) / sum;
}

struct Stats {
  double median = 0.0;
  double p25 = 0.0;
  double p75 = 0.0;
  double mean = 0.0;
};

/// Inclusive linear interpolation: position p (n - 1) in the sorted data.
inline double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw InputError("percentile: p must be in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline Stats describe(std::span<const double> values) {
  if (values.empty()) throw InputError("describe: empty sample");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  Stats s;
  s.median = percentile(v, 0.5);
  s.p25 = percentile(v, 0.25);
  s.p75 = percentile(v, 0.75);
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  return s;
}

struct ErrorSummary {
  Stats rot_deg;
  Stats trans_cm;
};

inline ErrorSummary summarize(std::span<const CalibrationError> errors) {
  if (errors.empty()) throw InputError("summarize: empty error list");
  std::vector<double> r, t;
  r.reserve(errors.size());
  t.reserve(errors.size());
  for (const auto& e : errors) {
    r.push_back(e.rot_deg);
    t.push_back(e.trans_cm);
  }
  return {describe(r), describe(t)};
}

}  // namespace dqcalib
