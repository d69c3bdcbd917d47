#pragma once

// Experiment drivers behind the command-line tool: alpha sweeps over
// bootstrap samples, solver timing and multiplier curves.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dqcalib/metrics.hpp"
#include "dqcalib/problem.hpp"
#include "dqcalib/solvers.hpp"
#include "dqcalib/synth.hpp"

namespace dqcalib {

/// k values log-spaced on [lo, hi] (inclusive).
inline std::vector<double> log_space(double lo, double hi, int k) {
  if (!(lo > 0.0) || !(hi >= lo) || k < 1) throw InputError("log_space: need 0 < lo <= hi, k >= 1");
  std::vector<double> out(k);
  if (k == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (int i = 0; i < k; ++i) out[i] = std::pow(10.0, a + (b - a) * i / (k - 1));
  return out;
}

/// Default sweep: 100 values on [1e-2, 10^1.7].
inline std::vector<double> default_alpha_grid() { return log_space(1e-2, std::pow(10.0, 1.7), 100); }

struct SweepConfig {
  Scenario scenario = Scenario::defaults(ScenarioKind::Random);
  std::vector<double> alphas = default_alpha_grid();
  std::vector<SolverKind> solvers = {SolverKind::Opt, SolverKind::TwoSteps};
  int samples = 1000;
  std::uint64_t seed = 0;
  SolveOptions options;
};

struct SweepRow {
  double alpha = 0.0;
  SolverKind solver = SolverKind::Opt;
  ErrorSummary errors;
  int failures = 0;  ///< samples on which the solver raised
};

struct SweepResult {
  std::vector<SweepRow> rows;
  /// Per solver: rows with the lowest mean rotation / translation error.
  std::map<SolverKind, SweepRow> best_rotation;
  std::map<SolverKind, SweepRow> best_translation;
};

/// Each sample is an independent scenario draw (stream derive_seed(seed, s)),
/// solved for every alpha and solver.
inline SweepResult run_sweep(const SweepConfig& cfg) {
  if (cfg.samples < 1) throw InputError("run_sweep: need at least one sample");
  if (cfg.alphas.empty() || cfg.solvers.empty()) throw InputError("run_sweep: empty alpha or solver set");
  for (double a : cfg.alphas) {
    if (!(a > 0.0)) throw InputError("run_sweep: alphas must be positive");
  }
  const std::size_t na = cfg.alphas.size();
  const std::size_t ns = cfg.solvers.size();
  std::vector<std::vector<CalibrationError>> errors(na * ns);
  std::vector<int> failures(na * ns, 0);
  for (int s = 0; s < cfg.samples; ++s) {
    const Dataset d = generate(cfg.scenario.reseeded(derive_seed(cfg.seed, static_cast<std::uint64_t>(s))));
    for (std::size_t ia = 0; ia < na; ++ia) {
      for (std::size_t is = 0; is < ns; ++is) {
        try {
          const SolverResult r = calibrate(d.pairs, cfg.alphas[ia], cfg.solvers[is], cfg.options);
          errors[ia * ns + is].push_back(calibration_error(r.x, d.ground_truth));
        } catch (const Error&) {
          ++failures[ia * ns + is];
        }
      }
    }
  }
  SweepResult out;
  for (std::size_t ia = 0; ia < na; ++ia) {
    for (std::size_t is = 0; is < ns; ++is) {
      const auto& e = errors[ia * ns + is];
      if (e.empty()) continue;
      SweepRow row{cfg.alphas[ia], cfg.solvers[is], summarize(e), failures[ia * ns + is]};
      auto& br = out.best_rotation;
      auto& bt = out.best_translation;
      if (!br.contains(row.solver) || row.errors.rot_deg.mean < br[row.solver].errors.rot_deg.mean) {
        br[row.solver] = row;
      }
      if (!bt.contains(row.solver) ||
          row.errors.trans_cm.mean < bt[row.solver].errors.trans_cm.mean) {
        bt[row.solver] = row;
      }
      out.rows.push_back(row);
    }
  }
  return out;
}

struct TimingStats {
  SolverKind solver = SolverKind::Opt;
  int runs = 0;
  double mean_us = 0.0;
  double std_us = 0.0;
  double min_us = 0.0;
  double max_us = 0.0;
  double median_us = 0.0;
};

struct BenchConfig {
  Scenario scenario = Scenario::defaults(ScenarioKind::Random);
  double alpha = 1.0;
  std::vector<SolverKind> solvers = {SolverKind::TwoSteps, SolverKind::ConvexRelax, SolverKind::Opt};
  int repetitions = 10000;
  int warmup = 100;
  int datasets = 100;  ///< distinct problems cycled through
  std::uint64_t seed = 0;
};

/// Wall time of estimate() from motion pairs to X, per solver. Solvers are
/// interleaved on each dataset; warmup runs are not recorded.
inline std::vector<TimingStats> run_bench(const BenchConfig& cfg) {
  if (cfg.repetitions < 1 || cfg.datasets < 1 || cfg.warmup < 0) {
    throw InputError("run_bench: repetitions and datasets must be positive");
  }
  std::vector<Dataset> data;
  data.reserve(cfg.datasets);
  for (int i = 0; i < cfg.datasets; ++i) {
    data.push_back(generate(cfg.scenario.reseeded(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)))));
  }
  using Clock = std::chrono::steady_clock;
  std::vector<std::vector<double>> times(cfg.solvers.size());
  double sink = 0.0;
  for (int rep = -cfg.warmup; rep < cfg.repetitions; ++rep) {
    const auto& pairs = data[static_cast<std::size_t>((rep + cfg.warmup) % cfg.datasets)].pairs;
    for (std::size_t is = 0; is < cfg.solvers.size(); ++is) {
      const auto t0 = Clock::now();
      const DualQuaternion x = estimate(pairs, cfg.alpha, cfg.solvers[is]);
      const auto t1 = Clock::now();
      sink += x.primal.w;
      if (rep >= 0) times[is].push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
    }
  }
  if (sink == 42.0) times[0].push_back(0.0);  // keeps the estimates observable
  std::vector<TimingStats> out;
  for (std::size_t is = 0; is < cfg.solvers.size(); ++is) {
    const auto& t = times[is];
    const Stats s = describe(t);
    double var = 0.0;
    for (double v : t) var += (v - s.mean) * (v - s.mean);
    TimingStats ts;
    ts.solver = cfg.solvers[is];
    ts.runs = static_cast<int>(t.size());
    ts.mean_us = s.mean;
    ts.std_us = t.size() > 1 ? std::sqrt(var / static_cast<double>(t.size() - 1)) : 0.0;
    ts.min_us = *std::min_element(t.begin(), t.end());
    ts.max_us = *std::max_element(t.begin(), t.end());
    ts.median_us = s.median;
    out.push_back(ts);
  }
  return out;
}

/// Curve grid over the mu bounds widened by `margin` of their span on each
/// side.
inline std::vector<double> curve_grid(const CalibrationProblem& p, int points, double margin = 0.25) {
  if (points < 2) throw InputError("curve_grid: need at least 2 points");
  const MuBounds b = mu_bounds(p);
  double span = b.span();
  if (!(span > 0.0)) span = std::max(1.0, std::abs(b.lo));
  const double lo = b.lo - margin * span;
  const double hi = b.hi + margin * span;
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i) g[i] = lo + (hi - lo) * i / (points - 1);
  return g;
}

}  // namespace dqcalib
