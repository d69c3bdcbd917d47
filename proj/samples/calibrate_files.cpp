// Calibrates X from two trajectory files and prints it with every solver.
//
//   calibrate_files cam.txt hand.txt [alpha]

#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "dqcalib/dqcalib.hpp"

int main(int argc, char** argv) {
  using namespace dqcalib;
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s cam.txt hand.txt [alpha]\n", argv[0]);
    return 2;
  }
  const double alpha = argc > 3 ? std::atof(argv[3]) : 1.0;
  try {
    // The sample recordings move far between frames; relax the step filter.
    PairingPolicy policy;
    policy.max_step_trans = 10.0;
    policy.max_step_rot = std::numbers::pi;
    PairingStats stats;
    const auto pairs =
        pair_relative_poses(parse_trajectory(std::string(argv[1])), parse_trajectory(std::string(argv[2])),
                            policy, &stats);
    std::printf("%zu motion pairs (%zu unmatched, %zu over step bounds)\n", stats.pairs,
                stats.unmatched, stats.dropped_step);

    const CalibrationProblem problem = build_problem(pairs, alpha);
    for (SolverKind k : kAllSolvers) {
      const SolverResult r = solve(problem, k);
      const Pose x = to_pose(r.x);
      std::printf("%-14s t = [%+.5f %+.5f %+.5f]  q = [%+.6f %+.6f %+.6f %+.6f]  cost %.6e\n",
                  to_string(k), x.translation[0], x.translation[1], x.translation[2],
                  x.rotation.x, x.rotation.y, x.rotation.z, x.rotation.w, r.cost);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "%s error: %s\n", to_string(e.kind()), e.what());
    return exit_code(e.kind());
  }
  return 0;
}
