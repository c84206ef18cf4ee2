// End-to-end acceptance checks for the sorting-arm toolkit. Each numbered
// check prints one [PASS]/[FAIL] line with the measured values; the process
// exits nonzero when any check fails. Tolerances are pinned inline.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "helpers.hpp"
#include "sortarm/io.hpp"

using namespace sortarm;
namespace fs = std::filesystem;

namespace {

struct CheckResult {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& why) {
    if (ok) return;
    pass = false;
    append(why);
  }
  void append(const std::string& text) {
    if (!detail.empty()) detail += "; ";
    detail += text;
  }
};

std::string num(double v) { return io::fmt4(v); }

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

// ---- 01: forward kinematics of the ready pose -----------------------------

CheckResult check_fk_golden() {
  CheckResult r;
  const kin::DhChain chain = kin::sorting_arm_chain();
  const JointVector q = test_helpers::make_joints({120.0, 93.0, -132.0});
  const Vec3 ee = kin::forward_kinematics(chain, q).translation;

  const double coarse = (ee - Vec3(-20.0, 35.0, 20.0)).norm();
  r.require(coarse <= 0.2,
            "ready-pose ee " + num(coarse) + " cm from (-20,35,20), budget 0.2");
  r.require(std::abs(ee.x() - (-20.16)) <= 0.05,
            "x=" + num(ee.x()) + " not within 0.05 of -20.16");
  r.require(std::abs(ee.y() - 34.91) <= 0.05,
            "y=" + num(ee.y()) + " not within 0.05 of 34.91");
  if (r.pass)
    r.append("ee=(" + num(ee.x()) + "," + num(ee.y()) + "," + num(ee.z()) +
             "), coarse offset " + num(coarse) + " cm");
  return r;
}

// ---- 02: inverse kinematics golden route -----------------------------------

CheckResult check_ik_golden() {
  CheckResult r;
  const kin::DhChain chain = kin::sorting_arm_chain();
  const sim::SortingScenario scenario;
  const ik::SolveOptions opts;  // kp=0.1, kd=0.01, tol=0.032, 200 iterations

  // First red pick of the bundled scene, from the ready pose.
  const ik::IkTrace trace = ik::solve(chain, scenario.initial_joints,
                                      Vec3(-10.99, 49.70, 12.76), opts);
  r.require(std::abs(trace.initial_error() - 18.85) <= 0.05,
            "initial error " + num(trace.initial_error()) +
                " outside 18.85 +/- 0.05");
  r.require(trace.converged && trace.final_error() <= 0.032,
            "route did not converge to 0.032 cm (final " +
                num(trace.final_error()) + ")");
  r.require(trace.iterations() >= 50 && trace.iterations() <= 110,
            "iterations " + std::to_string(trace.iterations()) +
                " outside [50, 110]");

  // Every pick and place of the bundled 12-object scene, noise-free.
  const sim::TrialReport report = sim::run_sorting(
      vision::sample_scene(), scenario, sim::NoiseModel{0.0, 0.0, 1});
  int executed = 0, converged = 0;
  double iter_sum = 0.0;
  for (const auto& route : report.routes) {
    if (route.skipped) continue;
    ++executed;
    converged += route.converged ? 1 : 0;
    iter_sum += route.iterations;
  }
  const double mean_iters = executed ? iter_sum / executed : 0.0;
  r.require(executed == 24, "expected 24 routes, executed " +
                                std::to_string(executed));
  r.require(converged == executed,
            std::to_string(executed - converged) + " routes failed to converge");
  r.require(mean_iters >= 62.0 && mean_iters <= 103.0,
            "mean iterations " + num(mean_iters) + " outside [62, 103]");
  if (r.pass)
    r.append("initial=" + num(trace.initial_error()) + ", iterations=" +
             std::to_string(trace.iterations()) + ", scene mean=" +
             num(mean_iters));
  return r;
}

// ---- 03: gain response of the solver ---------------------------------------

bool overshoots(const ik::IkTrace& trace, std::size_t from_iteration) {
  const std::vector<double> errors = trace.errors();
  for (std::size_t i = from_iteration; i + 1 < errors.size(); ++i)
    if (errors[i + 1] > errors[i]) return true;
  return false;
}

CheckResult check_gain_response() {
  CheckResult r;
  const kin::DhChain chain = kin::sorting_arm_chain();
  const sim::SortingScenario scenario;
  const Vec3 target(-10.99, 49.70, 12.76);

  std::vector<std::pair<double, ik::IkTrace>> runs;
  for (double kp : {0.01, 0.1, 0.5}) {
    ik::SolveOptions opts;
    opts.gains.kp = kp;
    opts.max_iter = 2000;  // let the smallest gain converge too
    runs.emplace_back(kp,
                      ik::solve(chain, scenario.initial_joints, target, opts));
  }
  std::string iters;
  for (const auto& [kp, trace] : runs) {
    r.require(trace.converged, "kp=" + num(kp) + " did not converge");
    if (!iters.empty()) iters += " > ";
    iters += std::to_string(trace.iterations());
  }
  r.require(runs[0].second.iterations() > runs[1].second.iterations() &&
                runs[1].second.iterations() > runs[2].second.iterations(),
            "iteration counts not strictly decreasing (" + iters + ")");
  r.require(!overshoots(runs[1].second, 2),
            "kp=0.1 overshoots after iteration 2");
  r.require(overshoots(runs[2].second, 0),
            "no error overshoot observed at kp=0.5 (the PD step keeps the "
            "per-iteration error strictly contracting at this gain)");
  if (r.pass) r.append("iterations " + iters);
  return r;
}

// ---- 04: camera calibration goldens ----------------------------------------

CheckResult check_calibration() {
  CheckResult r;
  const auto pairs = vision::sample_calibration_pairs();
  const vision::Calibration fitted = vision::fit_affine(pairs);
  double worst = 0.0;
  for (const auto& [pixel, world] : pairs)
    worst = std::max(worst, (fitted.project(pixel) - world).norm());
  r.require(worst <= 0.05, "fitted mapping misses a bundled centroid by " +
                               num(worst) + " cm, budget 0.05");

  const Vec2 centre =
      vision::Calibration::proportional().project(Vec2(320.0, 240.0));
  r.require(centre.x() == 25.0 && centre.y() == 18.75,
            "proportional mapping of the image centre gave (" +
                num(centre.x()) + "," + num(centre.y()) +
                "), expected exactly (25, 18.75)");
  if (r.pass) r.append("worst fit residual " + num(worst) + " cm");
  return r;
}

// ---- 05: detection on synthetic scenes -------------------------------------

CheckResult check_detection() {
  CheckResult r;
  const vision::Calibration cal{};
  const vision::ColorRules rules{};
  int matched = 0, total = 0;
  double worst_px = 0.0;

  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(1000 + seed);
    const vision::Scene scene = vision::random_scene(rng, 4);
    const double radius = 7.0 + seed % 10;  // 7..16 px
    const vision::RasterImage image = vision::render_scene(scene, cal, radius);
    const auto objects = vision::detect_objects(image, rules, cal, 100);
    if (objects.size() != scene.objects.size()) {
      r.require(false, "seed " + std::to_string(seed) + ": detected " +
                           std::to_string(objects.size()) + " of " +
                           std::to_string(scene.objects.size()) + " objects");
      continue;
    }
    for (const auto& truth : scene.objects) {
      ++total;
      const Vec2 expected = cal.unproject(truth.world);
      double best = 1e9;
      for (const auto& obj : objects)
        if (obj.color == truth.color)
          best = std::min(best, (obj.pixel - expected).norm());
      worst_px = std::max(worst_px, best);
      if (best <= 0.5) ++matched;
    }
  }
  r.require(matched == total,
            std::to_string(total - matched) + " of " + std::to_string(total) +
                " objects missed the class/0.5 px centroid gate (worst " +
                num(worst_px) + " px)");

  // Component-size boundary: 99 pixels rejected, 100 retained.
  vision::Mask mask(64, 32);
  for (int y = 0; y < 9; ++y)  // 9 x 11 = 99 pixels
    for (int x = 0; x < 11; ++x) mask.set(x, y, 1);
  for (int y = 12; y < 22; ++y)  // 10 x 10 = 100 pixels
    for (int x = 30; x < 40; ++x) mask.set(x, y, 1);
  const auto components = vision::connected_components(mask, 100);
  r.require(components.size() == 1 && components[0].area == 100.0,
            "size gate kept " + std::to_string(components.size()) +
                " components, expected only the 100-pixel one");
  if (r.pass)
    r.append(std::to_string(total) + " objects over 50 scenes, worst centroid "
             "offset " + num(worst_px) + " px");
  return r;
}

// ---- 06: jacobian and pseudoinverse kernels --------------------------------

CheckResult check_kernels() {
  CheckResult r;
  const kin::DhChain chain = kin::sorting_arm_chain();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const ik::JointLimits limits = ik::extended_limits();

  double worst_rel = 0.0;
  const double h = 1e-6;  // radians
  for (int trial = 0; trial < 100; ++trial) {
    JointVector q(3);
    for (int j = 0; j < 3; ++j)
      q(j) = limits[j].min + u01(rng) * (limits[j].max - limits[j].min);
    const Jacobian analytic = kin::geometric_jacobian(chain, q);
    Jacobian fd(3, 3);
    for (int j = 0; j < 3; ++j) {
      JointVector hi = q, lo = q;
      hi(j) += rad_to_deg(h);
      lo(j) -= rad_to_deg(h);
      fd.col(j) = (kin::forward_kinematics(chain, hi).translation -
                   kin::forward_kinematics(chain, lo).translation) /
                  (2.0 * h);
    }
    worst_rel = std::max(worst_rel,
                         (analytic - fd).norm() / std::max(analytic.norm(), 1e-12));
  }
  r.require(worst_rel <= 1e-6, "jacobian vs central differences relative "
                               "error " + sci(worst_rel));

  double worst_penrose = 0.0;
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  const std::pair<int, int> shapes[] = {{3, 3}, {3, 4}, {4, 3}, {5, 2}};
  for (int trial = 0; trial < 100; ++trial) {
    const auto [rows, cols] = shapes[trial % 4];
    Eigen::MatrixXd a(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) a(i, j) = entry(rng);
    if (trial % 3 == 0 && cols >= 2) a.col(cols - 1) = a.col(0);  // drop rank
    const Eigen::MatrixXd p = kin::pseudoinverse(a);
    worst_penrose = std::max({worst_penrose,
                              (a * p * a - a).norm(),
                              (p * a * p - p).norm(),
                              ((a * p).transpose() - a * p).norm(),
                              ((p * a).transpose() - p * a).norm()});
  }
  r.require(worst_penrose <= 1e-9,
            "worst Penrose-condition residual " + sci(worst_penrose));
  if (r.pass)
    r.append("jacobian rel err <= " + sci(worst_rel) + ", penrose residual <= " +
             sci(worst_penrose));
  return r;
}

// ---- 07 & 09: one shared 100-trial noisy run -------------------------------

struct FullRun {
  sim::MultiTrialReport report;
  long iterates = 0;
  long limit_violations = 0;
  long box_violations = 0;
  double worst_coupling = 0.0;
};

FullRun run_full_simulation() {
  FullRun run;
  std::mutex mu;
  sim::RunOptions opts;
  const ik::JointLimits limits = opts.limits;
  const ik::WorkspaceBox box = opts.box;
  opts.trace_observer = [&](const ik::IkTrace& trace) {
    std::scoped_lock lock(mu);
    for (const auto& it : trace.iterates) {
      ++run.iterates;
      for (int j = 0; j < it.joints.size(); ++j)
        if (!limits[j].contains(it.joints(j))) ++run.limit_violations;
      if (!ik::check_workspace(it.ee, box, 0.5)) ++run.box_violations;
      run.worst_coupling = std::max(
          run.worst_coupling, std::abs(it.full(1) + it.full(2) + it.full(3)));
    }
  };

  sim::TrialsOptions topts;
  topts.trials = 100;
  topts.base_seed = 7;
  topts.objects_per_color = 4;
  topts.parallel = 4;
  run.report = sim::run_trials(topts, sim::SortingScenario{},
                               sim::NoiseModel{}, opts);
  return run;
}

CheckResult check_constraint_safety(const FullRun& run) {
  CheckResult r;
  r.require(run.iterates > 0, "no iterates observed");
  r.require(run.limit_violations == 0,
            std::to_string(run.limit_violations) + " joint-limit violations");
  r.require(run.box_violations == 0,
            std::to_string(run.box_violations) +
                " workspace violations beyond 0.5 cm slack");
  r.require(run.worst_coupling <= 1e-12,
            "coupling residual " + sci(run.worst_coupling));
  if (r.pass)
    r.append(std::to_string(run.iterates) + " iterates clean, coupling "
             "residual <= 1e-12");
  return r;
}

CheckResult check_error_envelope(const FullRun& run) {
  CheckResult r;
  const auto& c = run.report.combined;
  r.require(c.routes == 2400, "expected 2400 routes, got " +
                                  std::to_string(c.routes));
  r.require(c.mean_euclid_xyz >= 0.5 && c.mean_euclid_xyz <= 0.75,
            "mean euclidean error " + num(c.mean_euclid_xyz) +
                " outside [0.5, 0.75]");
  r.require(c.success_rate >= 0.92 && c.success_rate <= 0.97,
            "success rate " + num(c.success_rate) + " outside [0.92, 0.97]");
  if (r.pass)
    r.append("mean error " + num(c.mean_euclid_xyz) + " cm, success rate " +
             num(c.success_rate));
  return r;
}

// ---- 08: weibull fitter and histogram --------------------------------------

CheckResult check_statistics() {
  CheckResult r;
  const double true_shape = 2.0450, true_scale = 0.7059;
  std::mt19937_64 rng(424242);
  const std::vector<double> samples =
      test_helpers::sample_weibull(rng, true_shape, true_scale, 2400);

  const stats::WeibullFit fit = stats::weibull_fit(samples);
  const double shape_rel = std::abs(fit.shape - true_shape) / true_shape;
  const double scale_rel = std::abs(fit.scale - true_scale) / true_scale;
  r.require(shape_rel <= 0.05,
            "shape " + num(fit.shape) + " off by " + num(100 * shape_rel) + "%");
  r.require(scale_rel <= 0.03,
            "scale " + num(fit.scale) + " off by " + num(100 * scale_rel) + "%");

  const double cdf =
      stats::weibull_cdf({true_shape, true_scale, 0.0}, 1.2);
  r.require(std::abs(cdf - 0.948) <= 1e-3,
            "cdf(1.2)=" + num(cdf) + ", expected about 0.948");
  r.require(std::abs(cdf - 0.9446) <= 0.01,
            "cdf(1.2)=" + num(cdf) + " further than 0.01 from 0.9446");

  const stats::Histogram hist = stats::histogram_pdf(samples, 0.05);
  const double integral_gap = std::abs(hist.integral() - 1.0);
  r.require(integral_gap <= 1e-9,
            "histogram integral off by " + sci(integral_gap));
  if (r.pass)
    r.append("fit k=" + num(fit.shape) + ", lambda=" + num(fit.scale) +
             ", cdf(1.2)=" + num(cdf));
  return r;
}

// ---- 10: simulation determinism via the CLI --------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return in ? buffer.str() : std::string("<unreadable:" + path.string() + ">");
}

CheckResult check_determinism() {
  CheckResult r;
  const fs::path base = fs::temp_directory_path() / "sortarm_acceptance";
  const fs::path dirs[2] = {base / "run_a", base / "run_b"};
  std::error_code ec;
  fs::remove_all(base, ec);

  for (const fs::path& dir : dirs) {
    const std::string cmd = std::string("\"") + SORTARM_CLI_PATH +
                            "\" simulate --trials 2 --seed 7 --out \"" +
                            dir.string() + "\" > /dev/null";
    const int rc = std::system(cmd.c_str());
    r.require(rc == 0, "simulate exited with " + std::to_string(rc));
  }
  if (!r.pass) return r;

  for (const char* name :
       {"routes_trial_000.csv", "routes_trial_001.csv", "aggregate.json"}) {
    const std::string a = read_file(dirs[0] / name);
    const std::string b = read_file(dirs[1] / name);
    r.require(!a.empty() && a == b,
              std::string(name) + " differs between identical runs");
  }
  if (r.pass) r.append("route CSVs and aggregate byte-identical");
  fs::remove_all(base, ec);
  return r;
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, CheckResult>> results;
  results.emplace_back("01 forward kinematics golden pose", check_fk_golden());
  results.emplace_back("02 inverse kinematics golden route", check_ik_golden());
  results.emplace_back("03 gain response of the solver", check_gain_response());
  results.emplace_back("04 camera calibration goldens", check_calibration());
  results.emplace_back("05 detection on synthetic scenes", check_detection());
  results.emplace_back("06 jacobian and pseudoinverse kernels",
                       check_kernels());
  const FullRun run = run_full_simulation();
  results.emplace_back("07 constraint safety across a full run",
                       check_constraint_safety(run));
  results.emplace_back("08 weibull fitter and histogram", check_statistics());
  results.emplace_back("09 noisy end-to-end error envelope",
                       check_error_envelope(run));
  results.emplace_back("10 simulation determinism via the CLI",
                       check_determinism());

  int failures = 0;
  for (const auto& [title, result] : results) {
    std::printf("[%s] %s%s%s\n", result.pass ? "PASS" : "FAIL", title.c_str(),
                result.detail.empty() ? "" : " -- ", result.detail.c_str());
    if (!result.pass) ++failures;
  }
  if (failures)
    std::printf("%d of %zu checks failed\n", failures, results.size());
  else
    std::printf("all %zu checks passed\n", results.size());
  return failures == 0 ? 0 : 1;
}
