#pragma once

// Synthetic motion pairs for the Random, Line and Circle scenarios.
//
// Hand motions dP1 are generated first (optionally jittered), cam motions
// follow as dP2 = X o dP1 o X^-1, and measurement noise is then
// right-composed onto both streams independently.

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "dqcalib/dualquat.hpp"
#include "dqcalib/error.hpp"
#include "dqcalib/problem.hpp"

namespace dqcalib {

/// SplitMix64: state += 0x9E3779B97F4A7C15, output mixed with
/// z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB;
/// z ^ (z >> 31). Platform independent; normals come from Box-Muller.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    return mix(z);
  }

  /// Finalizer of the generator; also used to derive independent seeds.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  Vec3 unit_vector() {
    const double z = 2.0 * uniform() - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform();
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Seed of stream `counter` derived from a base seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t counter) {
  return Rng::mix(seed ^ Rng::mix(counter + 0x632BE59BD9B4E019ULL));
}

struct NoiseModel {
  double sigma_r = 0.0;  ///< radians
  double sigma_t = 0.0;  ///< meters, per axis
  std::uint64_t seed = 0;

  static constexpr double kDefaultSigmaRDeg = 0.57;
  static constexpr double kDefaultSigmaT = 0.01;

  static NoiseModel defaults(std::uint64_t seed = 0) {
    return {kDefaultSigmaRDeg * std::numbers::pi / 180.0, kDefaultSigmaT, seed};
  }
  static NoiseModel none(std::uint64_t seed = 0) { return {0.0, 0.0, seed}; }

  void validate() const {
    if (!(sigma_r >= 0.0) || !(sigma_t >= 0.0)) {
      throw InputError("NoiseModel: sigmas must be non-negative");
    }
  }
};

/// Uniform rotation on SO(3) from three uniforms (subgroup algorithm).
inline Quaternion random_unit_quaternion(Rng& rng) {
  const double u1 = rng.uniform();
  const double u2 = 2.0 * std::numbers::pi * rng.uniform();
  const double u3 = 2.0 * std::numbers::pi * rng.uniform();
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  return Quaternion{a * std::sin(u2), a * std::cos(u2), b * std::sin(u3), b * std::cos(u3)}
      .normalized();
}

/// P o [dR | dt], axis of dR uniform, angle ~ N(0, sigma_r^2),
/// dt ~ N(0, sigma_t^2 I).
inline Pose perturb_pose(const Pose& p, const NoiseModel& nm, Rng& rng) {
  const Vec3 axis = rng.unit_vector();
  const double angle = nm.sigma_r * rng.normal();
  const Vec3 dt{nm.sigma_t * rng.normal(), nm.sigma_t * rng.normal(), nm.sigma_t * rng.normal()};
  if (nm.sigma_r == 0.0 && nm.sigma_t == 0.0) return p;
  return p * Pose{Quaternion::from_axis_angle(axis, angle), dt};
}

/// Default X: translation (-0.7, 28.1, -0.1) cm, rotation vector
/// (2.35, -0.92, -48.93) deg.
inline Pose default_ground_truth() {
  const double deg = std::numbers::pi / 180.0;
  return {Quaternion::from_rotation_vector(Vec3{2.35, -0.92, -48.93} * deg),
          Vec3{-0.007, 0.281, -0.001}};
}

enum class ScenarioKind { Random, Line, Circle };

inline const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::Random: return "random";
    case ScenarioKind::Line: return "line";
    case ScenarioKind::Circle: return "circle";
  }
  return "?";
}

struct Scenario {
  ScenarioKind kind = ScenarioKind::Random;
  int n = 100;
  NoiseModel jitter;             ///< perturbs hand motions before conjugation
  NoiseModel measurement_noise;  ///< perturbs both streams after conjugation
  Pose ground_truth = default_ground_truth();
  std::uint64_t seed = 0;        ///< stream for Random motions

  /// Default noise everywhere; jitter is off for Random.
  static Scenario defaults(ScenarioKind kind, std::uint64_t seed = 0) {
    Scenario s;
    s.kind = kind;
    s.seed = seed;
    s.jitter = kind == ScenarioKind::Random ? NoiseModel::none(derive_seed(seed, 1))
                                            : NoiseModel::defaults(derive_seed(seed, 1));
    s.measurement_noise = NoiseModel::defaults(derive_seed(seed, 2));
    return s;
  }

  /// Same noise levels with all three streams reseeded from `seed`.
  Scenario reseeded(std::uint64_t new_seed) const {
    Scenario s = *this;
    s.seed = new_seed;
    s.jitter.seed = derive_seed(new_seed, 1);
    s.measurement_noise.seed = derive_seed(new_seed, 2);
    return s;
  }

  void validate() const {
    if (n < 2) throw InputError("Scenario: need n >= 2");
    jitter.validate();
    measurement_noise.validate();
    if (std::abs(ground_truth.rotation.norm() - 1.0) > 1e-8) {
      throw ConstraintError("Scenario: ground-truth rotation must be unit");
    }
  }
};

struct Dataset {
  std::vector<MotionPair> pairs;
  std::vector<Pose> hand;  ///< noisy hand motions (dP1)
  std::vector<Pose> cam;   ///< noisy cam motions (dP2)
  Pose ground_truth;
};

/// Noise-free hand motions of the scenario, before jitter.
inline std::vector<Pose> scenario_motions(const Scenario& s) {
  s.validate();
  std::vector<Pose> out;
  out.reserve(s.n);
  switch (s.kind) {
    case ScenarioKind::Random: {
      Rng rng(s.seed);
      for (int i = 0; i < s.n; ++i) {
        const Quaternion q = random_unit_quaternion(rng);
        const Vec3 t{rng.uniform(), rng.uniform(), rng.uniform()};
        out.push_back({q, t});
      }
      break;
    }
    case ScenarioKind::Line: {
      // Absolute poses at x = 2k/n, k = 0..n.
      for (int k = 0; k < s.n; ++k) {
        const Pose a{Quaternion::identity(), Vec3{2.0 * k / s.n, 0.0, 0.0}};
        const Pose b{Quaternion::identity(), Vec3{2.0 * (k + 1) / s.n, 0.0, 0.0}};
        out.push_back(a.inverse() * b);
      }
      break;
    }
    case ScenarioKind::Circle: {
      // Radius 2, heading tangent to the circle, angle steps 2 pi / n.
      auto at = [&](int k) {
        const double th = 2.0 * std::numbers::pi * k / s.n;
        return Pose{Quaternion::from_axis_angle(Vec3::UnitZ(), th),
                    Vec3{2.0 * std::cos(th), 2.0 * std::sin(th), 0.0}};
      };
      for (int k = 0; k < s.n; ++k) out.push_back(at(k).inverse() * at(k + 1));
      break;
    }
  }
  return out;
}

inline Dataset generate(const Scenario& s) {
  const std::vector<Pose> clean = scenario_motions(s);
  Rng jitter_rng(s.jitter.seed);
  Rng noise_rng(s.measurement_noise.seed);
  const Pose& x = s.ground_truth;
  const Pose x_inv = x.inverse();
  Dataset d;
  d.ground_truth = x;
  d.pairs.reserve(clean.size());
  for (const Pose& motion : clean) {
    const Pose hand = perturb_pose(motion, s.jitter, jitter_rng);
    const Pose cam = x * hand * x_inv;
    const Pose hand_meas = perturb_pose(hand, s.measurement_noise, noise_rng);
    const Pose cam_meas = perturb_pose(cam, s.measurement_noise, noise_rng);
    d.hand.push_back(hand_meas);
    d.cam.push_back(cam_meas);
    d.pairs.emplace_back(cam_meas, hand_meas);
  }
  return d;
}

}  // namespace dqcalib
