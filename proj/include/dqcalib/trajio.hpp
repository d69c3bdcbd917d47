#pragma once

// Trajectory files and time pairing.
//
// One record per line: "t tx ty tz qx qy qz qw" (seconds, meters, unit
// quaternion). Blank lines and lines starting with '#' are skipped.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "dqcalib/dualquat.hpp"
#include "dqcalib/error.hpp"
#include "dqcalib/problem.hpp"

namespace dqcalib {

struct TrajectoryRecord {
  double timestamp = 0.0;
  Pose pose;
};

inline std::vector<TrajectoryRecord> parse_trajectory(std::istream& in) {
  std::vector<TrajectoryRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ss(line);
    double v[8];
    for (double& x : v) {
      if (!(ss >> x)) throw ParseError("expected 8 numbers: t tx ty tz qx qy qz qw", line_no);
    }
    std::string extra;
    if (ss >> extra) throw ParseError("trailing data '" + extra + "'", line_no);
    for (double x : v) {
      if (!std::isfinite(x)) throw ParseError("non-finite value", line_no);
    }
    Quaternion q{v[4], v[5], v[6], v[7]};
    const double n = q.norm();
    if (std::abs(n - 1.0) > 1e-3) {
      throw ParseError("quaternion norm " + std::to_string(n) + " is not within 1e-3 of 1",
                       line_no);
    }
    TrajectoryRecord r{v[0], Pose{q.normalized(), Vec3{v[1], v[2], v[3]}}};
    if (!out.empty() && !(r.timestamp > out.back().timestamp)) {
      throw ParseError("timestamps must be strictly increasing", line_no);
    }
    out.push_back(r);
  }
  return out;
}

inline std::vector<TrajectoryRecord> parse_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open trajectory file '" + path + "'");
  try {
    return parse_trajectory(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), e.line);
  }
}

inline void write_trajectory(std::ostream& out, const std::vector<TrajectoryRecord>& records) {
  out.precision(17);
  for (const auto& r : records) {
    const Vec3& t = r.pose.translation;
    const Quaternion& q = r.pose.rotation;
    out << r.timestamp << ' ' << t[0] << ' ' << t[1] << ' ' << t[2] << ' ' << q.x << ' ' << q.y
        << ' ' << q.z << ' ' << q.w << '\n';
  }
}

struct PairingPolicy {
  double max_dt = 0.1;                                  ///< seconds
  double max_step_trans = 0.10;                         ///< meters
  double max_step_rot = 11.5 * std::numbers::pi / 180;  ///< radians

  void validate() const {
    if (!(max_dt > 0.0) || !(max_step_trans > 0.0) || !(max_step_rot > 0.0)) {
      throw InputError("PairingPolicy: all bounds must be positive");
    }
  }
};

struct PairingStats {
  std::size_t matched = 0;        ///< records matched across streams
  std::size_t unmatched = 0;      ///< cam records without a partner within max_dt
  std::size_t dropped_step = 0;   ///< relative motions over a step bound
  std::size_t pairs = 0;
};

/// Greedy nearest-timestamp matching, relative motions between
/// consecutive matches, step filters on both streams. `cam` yields the
/// first element of each pair.
inline std::vector<MotionPair> pair_relative_poses(const std::vector<TrajectoryRecord>& cam,
                                                   const std::vector<TrajectoryRecord>& hand,
                                                   const PairingPolicy& policy = {},
                                                   PairingStats* stats_out = nullptr) {
  policy.validate();
  if (cam.size() < 2 || hand.size() < 2) {
    throw InputError("pair_relative_poses: each trajectory needs at least 2 records");
  }
  PairingStats stats;
  std::vector<std::pair<std::size_t, std::size_t>> matches;
  std::size_t next_free = 0;
  for (std::size_t i = 0; i < cam.size(); ++i) {
    const double t = cam[i].timestamp;
    const auto it = std::lower_bound(hand.begin() + next_free, hand.end(), t,
                                     [](const TrajectoryRecord& r, double v) { return r.timestamp < v; });
    std::size_t best = hand.size();
    double best_dt = policy.max_dt;
    for (auto c : {it, it == hand.begin() + next_free ? hand.end() : it - 1}) {
      if (c == hand.end()) continue;
      const double dt = std::abs(c->timestamp - t);
      if (dt <= best_dt) {
        best_dt = dt;
        best = static_cast<std::size_t>(c - hand.begin());
      }
    }
    if (best == hand.size()) {
      ++stats.unmatched;
      continue;
    }
    matches.emplace_back(i, best);
    next_free = best + 1;
  }
  stats.matched = matches.size();

  auto too_far = [&](const Pose& d) {
    const double angle = 2.0 * std::acos(std::min(1.0, std::abs(d.rotation.w)));
    return d.translation.norm() > policy.max_step_trans || angle > policy.max_step_rot;
  };
  std::vector<MotionPair> out;
  for (std::size_t k = 0; k + 1 < matches.size(); ++k) {
    const Pose dc = cam[matches[k].first].pose.inverse() * cam[matches[k + 1].first].pose;
    const Pose dh = hand[matches[k].second].pose.inverse() * hand[matches[k + 1].second].pose;
    if (too_far(dc) || too_far(dh)) {
      ++stats.dropped_step;
      continue;
    }
    out.emplace_back(dc, dh);
  }
  stats.pairs = out.size();
  if (stats_out) *stats_out = stats;
  if (out.size() < 2) {
    throw InputError("pair_relative_poses: only " + std::to_string(out.size()) +
                     " motion pairs survive (matched " + std::to_string(stats.matched) +
                     ", unmatched " + std::to_string(stats.unmatched) + ", dropped by step filter " +
                     std::to_string(stats.dropped_step) + ")");
  }
  return out;
}

}  // namespace dqcalib
