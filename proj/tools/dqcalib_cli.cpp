// dqcalib: hand-eye calibration from the command line.
//
//   dqcalib solve   --cam c.txt --hand h.txt [--solver all] [--alpha 1]
//   dqcalib synth   --scenario line --n 100 --cam c.txt --hand h.txt
//   dqcalib sweep   --scenario random --samples 1000 --alpha-sweep 0.01:50.1:100
//   dqcalib bench   --solver 2steps,convrlx,opt --repetitions 10000
//   dqcalib curves  --scenario random --points 400 --csv
//
// Output is JSON unless --csv is given. Exit codes: 0 ok, 2 input error,
// 3 numeric failure, 4 degenerate data.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dqcalib/dqcalib.hpp"

namespace {

using namespace dqcalib;
using nlohmann::ordered_json;

constexpr double kDeg = std::numbers::pi / 180.0;

struct Options {
  std::string command;
  std::vector<std::string> solvers{"all"};
  double alpha = 1.0;
  std::string alpha_sweep;
  std::vector<double> prior_pose;
  double prior_a = 0.0;
  double prior_b = 0.0;
  std::string scenario = "random";
  int n = 100;
  int samples = 1000;
  double sigma_r_deg = NoiseModel::kDefaultSigmaRDeg;
  double sigma_t = NoiseModel::kDefaultSigmaT;
  double jitter_r_deg = -1.0;
  double jitter_t = -1.0;
  std::uint64_t seed = 0;
  std::string cam;
  std::string hand;
  double max_dt = PairingPolicy{}.max_dt;
  double max_step_trans = PairingPolicy{}.max_step_trans;
  double max_step_rot_deg = 11.5;
  bool json = false;
  bool csv = false;
  std::string out;
  int repetitions = 10000;
  int warmup = 100;
  int points = 400;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<SolverKind> selected_solvers(const Options& o) {
  std::vector<SolverKind> out;
  for (const auto& name : o.solvers) {
    if (name == "all") {
      out.assign(kAllSolvers.begin(), kAllSolvers.end());
      continue;
    }
    const auto k = parse_solver(name);
    if (!k) throw InputError("unknown solver '" + name + "'");
    out.push_back(*k);
  }
  if (out.empty()) throw InputError("no solver selected");
  return out;
}

ScenarioKind scenario_kind(const std::string& s) {
  if (s == "random") return ScenarioKind::Random;
  if (s == "line") return ScenarioKind::Line;
  if (s == "circle") return ScenarioKind::Circle;
  throw InputError("unknown scenario '" + s + "'");
}

Scenario make_scenario(const Options& o) {
  if (o.n < 2) throw InputError("--n must be at least 2");
  Scenario s = Scenario::defaults(scenario_kind(o.scenario), o.seed);
  s.n = o.n;
  s.measurement_noise.sigma_r = o.sigma_r_deg * kDeg;
  s.measurement_noise.sigma_t = o.sigma_t;
  if (o.jitter_r_deg >= 0.0) s.jitter.sigma_r = o.jitter_r_deg * kDeg;
  if (o.jitter_t >= 0.0) s.jitter.sigma_t = o.jitter_t;
  s.validate();
  return s;
}

std::optional<Prior> make_prior(const Options& o) {
  if (o.prior_pose.empty()) {
    if (o.prior_a != 0.0 || o.prior_b != 0.0) throw InputError("--prior-a/--prior-b need --prior-pose");
    return std::nullopt;
  }
  if (o.prior_pose.size() != 7) throw InputError("--prior-pose takes 7 numbers: tx ty tz qx qy qz qw");
  const auto& v = o.prior_pose;
  const Quaternion q{v[3], v[4], v[5], v[6]};
  if (std::abs(q.norm() - 1.0) > 1e-3) throw InputError("--prior-pose quaternion is not unit");
  Prior p;
  p.anchor = to_dual_quaternion(Pose{q.normalized(), Vec3{v[0], v[1], v[2]}});
  p.a = o.prior_a;
  p.b = o.prior_b;
  p.validate();
  return p;
}

PairingPolicy make_policy(const Options& o) {
  PairingPolicy p{o.max_dt, o.max_step_trans, o.max_step_rot_deg * kDeg};
  p.validate();
  return p;
}

std::vector<double> alpha_list(const Options& o) {
  if (o.alpha_sweep.empty()) return default_alpha_grid();
  double lo = 0.0, hi = 0.0;
  int k = 0;
  char c1 = 0, c2 = 0;
  std::istringstream ss(o.alpha_sweep);
  if (!(ss >> lo >> c1 >> hi >> c2 >> k) || c1 != ':' || c2 != ':') {
    throw InputError("--alpha-sweep expects lo:hi:k");
  }
  return log_space(lo, hi, k);
}

ordered_json config_echo(const Options& o) {
  ordered_json c;
  c["command"] = o.command;
  c["solver"] = o.solvers;
  c["alpha"] = o.alpha;
  if (!o.alpha_sweep.empty()) c["alpha_sweep"] = o.alpha_sweep;
  if (!o.prior_pose.empty()) {
    c["prior_pose"] = o.prior_pose;
    c["prior_a"] = o.prior_a;
    c["prior_b"] = o.prior_b;
  }
  if (o.cam.empty() || o.command == "synth") {
    c["scenario"] = o.scenario;
    c["n"] = o.n;
    c["sigma_r_deg"] = o.sigma_r_deg;
    c["sigma_t"] = o.sigma_t;
  }
  if (!o.cam.empty()) {
    c["cam"] = o.cam;
    c["hand"] = o.hand;
    c["max_dt"] = o.max_dt;
    c["max_step_trans"] = o.max_step_trans;
    c["max_step_rot_deg"] = o.max_step_rot_deg;
  }
  if (o.command == "sweep") c["samples"] = o.samples;
  if (o.command == "bench") {
    c["repetitions"] = o.repetitions;
    c["warmup"] = o.warmup;
  }
  if (o.command == "curves") c["points"] = o.points;
  return c;
}

ordered_json envelope(const Options& o) {
  ordered_json j;
  j["schema"] = kOutputSchemaVersion;
  j["version"] = kVersion;
  j["seed"] = o.seed;
  j["config"] = config_echo(o);
  return j;
}

/// CSV preamble: version, seed and config as comment lines.
std::string csv_preamble(const Options& o) {
  return "# dqcalib " + std::string(kVersion) + " schema " + std::to_string(kOutputSchemaVersion) +
         " seed " + std::to_string(o.seed) + "\n# config " + config_echo(o).dump() + "\n";
}

ordered_json quat_json(const Quaternion& q) { return {q.x, q.y, q.z, q.w}; }

struct Input {
  std::vector<MotionPair> pairs;
  std::optional<Pose> ground_truth;
};

Input load_input(const Options& o) {
  if (o.cam.empty() != o.hand.empty()) throw InputError("--cam and --hand go together");
  if (!o.cam.empty()) {
    const auto cam = parse_trajectory(o.cam);
    const auto hand = parse_trajectory(o.hand);
    return {pair_relative_poses(cam, hand, make_policy(o)), std::nullopt};
  }
  Dataset d = generate(make_scenario(o));
  return {std::move(d.pairs), d.ground_truth};
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(o.out);
  if (!f) throw InputError("cannot write '" + o.out + "'");
  f << text;
}

int cmd_solve(const Options& o) {
  const Input in = load_input(o);
  const auto solvers = selected_solvers(o);
  SolveOptions so;
  so.prior = make_prior(o);
  ordered_json doc = envelope(o);
  doc["pairs"] = in.pairs.size();
  std::ostringstream csv;
  csv << csv_preamble(o)
      << "solver,qx,qy,qz,qw,dx,dy,dz,dw,tx,ty,tz,mu,lambda,cost,norm_residual,orth_residual,"
         "runtime_us,noise_free,rot_err_deg,trans_err_cm\n";
  ordered_json results = ordered_json::array();
  for (SolverKind k : solvers) {
    const auto t0 = std::chrono::steady_clock::now();
    const SolverResult r = calibrate(in.pairs, o.alpha, k, so);
    const auto t1 = std::chrono::steady_clock::now();
    const double us = std::chrono::duration<double, std::micro>(t1 - t0).count();
    const Pose pose = to_pose(r.x);
    const double norm_res = std::abs(r.x.primal.norm() - 1.0);
    const double orth_res = std::abs(dot(r.x.primal, r.x.dual));
    ordered_json j;
    j["solver"] = to_string(k);
    j["dual_quaternion"] = {{"primal", quat_json(r.x.primal)}, {"dual", quat_json(r.x.dual)}};
    j["pose"] = {{"rotation", quat_json(pose.rotation)},
                 {"translation", {pose.translation[0], pose.translation[1], pose.translation[2]}}};
    j["mu"] = r.mu;
    j["lambda"] = r.lambda;
    j["cost"] = r.cost;
    j["iterations"] = r.iterations;
    j["solver_residual"] = r.residual;
    j["constraint_residuals"] = {{"norm", norm_res}, {"orthogonality", orth_res}};
    j["runtime_us"] = us;
    j["noise_free"] = r.noise_free_path;
    if (!std::isnan(r.relaxed_lambda)) j["relaxed_lambda"] = r.relaxed_lambda;
    j["warnings"] = r.warnings;
    std::string err_cols = ",,";
    if (in.ground_truth) {
      const CalibrationError e = calibration_error(r.x, *in.ground_truth);
      j["error"] = {{"rot_deg", e.rot_deg}, {"trans_cm", e.trans_cm}};
      err_cols = "," + fmt(e.rot_deg) + "," + fmt(e.trans_cm);
    }
    results.push_back(j);
    for (const auto& w : r.warnings) std::cerr << "warning (" << to_string(k) << "): " << w << '\n';
    csv << to_string(k) << ',' << fmt(r.x.primal.x) << ',' << fmt(r.x.primal.y) << ','
        << fmt(r.x.primal.z) << ',' << fmt(r.x.primal.w) << ',' << fmt(r.x.dual.x) << ','
        << fmt(r.x.dual.y) << ',' << fmt(r.x.dual.z) << ',' << fmt(r.x.dual.w) << ','
        << fmt(pose.translation[0]) << ',' << fmt(pose.translation[1]) << ','
        << fmt(pose.translation[2]) << ',' << fmt(r.mu) << ',' << fmt(r.lambda) << ','
        << fmt(r.cost) << ',' << fmt(norm_res) << ',' << fmt(orth_res) << ',' << fmt(us) << ','
        << (r.noise_free_path ? 1 : 0) << err_cols << '\n';
  }
  doc["results"] = results;
  emit(o, o.csv ? csv.str() : doc.dump(2) + "\n");
  return 0;
}

/// Absolute trajectory from relative motions, starting at the identity,
/// one record every 0.1 s.
std::vector<TrajectoryRecord> integrate(const std::vector<Pose>& motions) {
  std::vector<TrajectoryRecord> out;
  Pose p = Pose::identity();
  out.push_back({0.0, p});
  for (std::size_t i = 0; i < motions.size(); ++i) {
    p = p * motions[i];
    p.rotation = p.rotation.normalized();
    out.push_back({0.1 * static_cast<double>(i + 1), p});
  }
  return out;
}

int cmd_synth(const Options& o) {
  const Scenario s = make_scenario(o);
  const Dataset d = generate(s);
  if (!o.cam.empty() || !o.hand.empty()) {
    if (o.cam.empty() || o.hand.empty()) throw InputError("synth: give both --cam and --hand outputs");
    std::ofstream fc(o.cam), fh(o.hand);
    if (!fc || !fh) throw InputError("synth: cannot write trajectory files");
    fc << "# synthetic cam trajectory, scenario " << o.scenario << " seed " << o.seed << '\n';
    fh << "# synthetic hand trajectory, scenario " << o.scenario << " seed " << o.seed << '\n';
    write_trajectory(fc, integrate(d.cam));
    write_trajectory(fh, integrate(d.hand));
  }
  const Pose& x = d.ground_truth;
  if (o.csv) {
    std::ostringstream csv;
    csv << csv_preamble(o) << "# ground_truth " << fmt(x.translation[0]) << ' '
        << fmt(x.translation[1]) << ' ' << fmt(x.translation[2]) << ' ' << fmt(x.rotation.x) << ' '
        << fmt(x.rotation.y) << ' ' << fmt(x.rotation.z) << ' ' << fmt(x.rotation.w) << '\n'
        << "index,cam_tx,cam_ty,cam_tz,cam_qx,cam_qy,cam_qz,cam_qw,hand_tx,hand_ty,hand_tz,hand_qx,"
           "hand_qy,hand_qz,hand_qw\n";
    for (std::size_t i = 0; i < d.cam.size(); ++i) {
      csv << i;
      for (const Pose* p : {&d.cam[i], &d.hand[i]}) {
        csv << ',' << fmt(p->translation[0]) << ',' << fmt(p->translation[1]) << ','
            << fmt(p->translation[2]) << ',' << fmt(p->rotation.x) << ',' << fmt(p->rotation.y)
            << ',' << fmt(p->rotation.z) << ',' << fmt(p->rotation.w);
      }
      csv << '\n';
    }
    emit(o, csv.str());
    return 0;
  }
  ordered_json doc = envelope(o);
  doc["ground_truth"] = {{"rotation", quat_json(x.rotation)},
                         {"translation", {x.translation[0], x.translation[1], x.translation[2]}}};
  ordered_json motions = ordered_json::array();
  for (std::size_t i = 0; i < d.cam.size(); ++i) {
    auto pose_json = [](const Pose& p) {
      return ordered_json{{"rotation", quat_json(p.rotation)},
                          {"translation", {p.translation[0], p.translation[1], p.translation[2]}}};
    };
    motions.push_back({{"cam", pose_json(d.cam[i])}, {"hand", pose_json(d.hand[i])}});
  }
  doc["motions"] = motions;
  emit(o, doc.dump(2) + "\n");
  return 0;
}

ordered_json stats_json(const Stats& s) {
  return {{"median", s.median}, {"p25", s.p25}, {"p75", s.p75}, {"mean", s.mean}};
}

int cmd_sweep(const Options& o) {
  if (!o.cam.empty()) throw InputError("sweep needs ground truth: use a synthetic --scenario");
  if (o.samples < 1) throw InputError("--samples must be positive");
  SweepConfig cfg;
  cfg.scenario = make_scenario(o);
  cfg.alphas = alpha_list(o);
  cfg.solvers = selected_solvers(o);
  cfg.samples = o.samples;
  cfg.seed = o.seed;
  cfg.options.prior = make_prior(o);
  const SweepResult r = run_sweep(cfg);

  std::ostringstream csv;
  csv << csv_preamble(o)
      << "row,alpha,solver,rot_median,rot_p25,rot_p75,rot_mean,trans_median,trans_p25,trans_p75,"
         "trans_mean,failures\n";
  auto csv_row = [&](const char* tag, const SweepRow& row) {
    const auto& e = row.errors;
    csv << tag << ',' << fmt(row.alpha) << ',' << to_string(row.solver) << ','
        << fmt(e.rot_deg.median) << ',' << fmt(e.rot_deg.p25) << ',' << fmt(e.rot_deg.p75) << ','
        << fmt(e.rot_deg.mean) << ',' << fmt(e.trans_cm.median) << ',' << fmt(e.trans_cm.p25) << ','
        << fmt(e.trans_cm.p75) << ',' << fmt(e.trans_cm.mean) << ',' << row.failures << '\n';
  };
  auto row_json = [](const SweepRow& row) {
    return ordered_json{{"alpha", row.alpha},
                        {"solver", to_string(row.solver)},
                        {"rot_deg", stats_json(row.errors.rot_deg)},
                        {"trans_cm", stats_json(row.errors.trans_cm)},
                        {"failures", row.failures}};
  };
  ordered_json doc = envelope(o);
  ordered_json rows = ordered_json::array();
  for (const auto& row : r.rows) {
    csv_row("grid", row);
    rows.push_back(row_json(row));
  }
  ordered_json best_rot = ordered_json::array();
  ordered_json best_tr = ordered_json::array();
  for (SolverKind k : cfg.solvers) {
    if (auto it = r.best_rotation.find(k); it != r.best_rotation.end()) {
      csv_row("best_rotation", it->second);
      best_rot.push_back(row_json(it->second));
    }
    if (auto it = r.best_translation.find(k); it != r.best_translation.end()) {
      csv_row("best_translation", it->second);
      best_tr.push_back(row_json(it->second));
    }
  }
  doc["rows"] = rows;
  doc["best_rotation"] = best_rot;
  doc["best_translation"] = best_tr;
  emit(o, o.csv ? csv.str() : doc.dump(2) + "\n");
  return 0;
}

int cmd_bench(const Options& o) {
  BenchConfig cfg;
  cfg.scenario = make_scenario(o);
  cfg.alpha = o.alpha;
  cfg.solvers = selected_solvers(o);
  cfg.repetitions = o.repetitions;
  cfg.warmup = o.warmup;
  cfg.seed = o.seed;
  const auto stats = run_bench(cfg);
  std::vector<const TimingStats*> order;
  for (const auto& s : stats) order.push_back(&s);
  std::sort(order.begin(), order.end(),
            [](const TimingStats* a, const TimingStats* b) { return a->mean_us < b->mean_us; });

  std::ostringstream csv;
  csv << csv_preamble(o) << "solver,runs,mean_us,std_us,min_us,max_us,median_us,rank\n";
  ordered_json doc = envelope(o);
  ordered_json rows = ordered_json::array();
  for (const auto& s : stats) {
    const auto rank = std::find(order.begin(), order.end(), &s) - order.begin() + 1;
    csv << to_string(s.solver) << ',' << s.runs << ',' << fmt(s.mean_us) << ',' << fmt(s.std_us)
        << ',' << fmt(s.min_us) << ',' << fmt(s.max_us) << ',' << fmt(s.median_us) << ',' << rank
        << '\n';
    rows.push_back({{"solver", to_string(s.solver)},
                    {"runs", s.runs},
                    {"mean_us", s.mean_us},
                    {"std_us", s.std_us},
                    {"min_us", s.min_us},
                    {"max_us", s.max_us},
                    {"median_us", s.median_us},
                    {"rank", rank}});
  }
  ordered_json ranking = ordered_json::array();
  for (const auto* s : order) ranking.push_back(to_string(s->solver));
  doc["timings"] = rows;
  doc["ordering"] = ranking;
  emit(o, o.csv ? csv.str() : doc.dump(2) + "\n");
  return 0;
}

int cmd_curves(const Options& o) {
  const Input in = load_input(o);
  const CalibrationProblem p = build_problem(in.pairs, o.alpha, make_prior(o));
  const SolverResult opt = solve_opt(p);
  std::vector<double> grid = curve_grid(p, o.points);
  grid.push_back(opt.mu);
  std::sort(grid.begin(), grid.end());
  const auto samples = sample_curves(p, grid);
  std::ostringstream csv;
  csv << csv_preamble(o) << "mu,lambda0,lambda1,lambda2,lambda3,f0,is_opt\n";
  ordered_json doc = envelope(o);
  ordered_json rows = ordered_json::array();
  for (const auto& s : samples) {
    const bool star = s.mu == opt.mu;
    csv << fmt(s.mu) << ',' << fmt(s.lambdas[0]) << ',' << fmt(s.lambdas[1]) << ','
        << fmt(s.lambdas[2]) << ',' << fmt(s.lambdas[3]) << ',' << fmt(s.f0) << ',' << (star ? 1 : 0)
        << '\n';
    rows.push_back({{"mu", s.mu},
                    {"lambdas", {s.lambdas[0], s.lambdas[1], s.lambdas[2], s.lambdas[3]}},
                    {"f0", s.f0},
                    {"is_opt", star}});
  }
  const MuBounds b = mu_bounds(p);
  doc["mu_bounds"] = {b.lo, b.hi};
  doc["mu_star"] = opt.mu;
  doc["lambda_star"] = opt.lambda;
  doc["constraint_residuals"] = {{"norm", std::abs(opt.x.primal.norm() - 1.0)},
                                 {"orthogonality", std::abs(dot(opt.x.primal, opt.x.dual))}};
  doc["samples"] = rows;
  emit(o, o.csv ? csv.str() : doc.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--solver", o.solvers,
                  "opt, 2steps, convrlx, 2ndord-mu, 2ndord-lambda, itr, sturm or all")
      ->delimiter(',');
  sub->add_option("--alpha", o.alpha, "translation weight (1/length unit)")->check(CLI::PositiveNumber);
  sub->add_option("--prior-pose", o.prior_pose, "anchor: tx ty tz qx qy qz qw")->expected(7);
  sub->add_option("--prior-a", o.prior_a, "rotation prior weight")->check(CLI::NonNegativeNumber);
  sub->add_option("--prior-b", o.prior_b, "translation prior weight")->check(CLI::NonNegativeNumber);
  sub->add_option("--scenario", o.scenario, "random, line or circle");
  sub->add_option("--n", o.n, "motion pairs per scenario");
  sub->add_option("--sigma-r-deg", o.sigma_r_deg, "measurement rotation noise (deg)");
  sub->add_option("--sigma-t", o.sigma_t, "measurement translation noise (m)");
  sub->add_option("--jitter-r-deg", o.jitter_r_deg, "trajectory jitter rotation (deg)");
  sub->add_option("--jitter-t", o.jitter_t, "trajectory jitter translation (m)");
  sub->add_option("--seed", o.seed, "random seed");
  sub->add_option("--cam", o.cam, "cam trajectory file");
  sub->add_option("--hand", o.hand, "hand trajectory file");
  sub->add_option("--max-dt", o.max_dt, "pairing time tolerance (s)");
  sub->add_option("--max-step-trans", o.max_step_trans, "max translation per step (m)");
  sub->add_option("--max-step-rot-deg", o.max_step_rot_deg, "max rotation per step (deg)");
  auto* j = sub->add_flag("--json", o.json, "JSON output (default)");
  auto* c = sub->add_flag("--csv", o.csv, "CSV output");
  j->excludes(c);
  sub->add_option("--out", o.out, "output path (default stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Hand-eye calibration with dual quaternions"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  auto* solve = app.add_subcommand("solve", "calibrate from trajectory files or a synthetic scenario");
  auto* synth = app.add_subcommand("synth", "generate a synthetic scenario");
  auto* sweep = app.add_subcommand("sweep", "alpha sweep over bootstrap samples");
  auto* bench = app.add_subcommand("bench", "time solvers");
  auto* curves = app.add_subcommand("curves", "eigenvalue curves of Z(mu)");
  for (auto* sub : {solve, synth, sweep, bench, curves}) add_common(sub, o);
  sweep->add_option("--samples", o.samples, "bootstrap samples");
  sweep->add_option("--alpha-sweep", o.alpha_sweep, "lo:hi:k, log spaced");
  bench->add_option("--repetitions", o.repetitions, "timed runs per solver");
  bench->add_option("--warmup", o.warmup, "untimed runs per solver");
  curves->add_option("--points", o.points, "grid points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  o.command = app.get_subcommands().front()->get_name();
  try {
    if (o.command == "solve") return cmd_solve(o);
    if (o.command == "synth") return cmd_synth(o);
    if (o.command == "sweep") return cmd_sweep(o);
    if (o.command == "bench") return cmd_bench(o);
    return cmd_curves(o);
  } catch (const Error& e) {
    std::cerr << "dqcalib: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    if (o.json || !o.csv) {
      ordered_json err = envelope(o);
      err["error"] = {{"kind", to_string(e.kind())}, {"message", e.what()}, {"exit_code", exit_code(e.kind())}};
      std::cout << err.dump(2) << '\n';
    }
    return exit_code(e.kind());
  }
}
