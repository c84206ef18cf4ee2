#include "sortarm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <sstream>
#include <stdexcept>

namespace sortarm::sim {

GripperGeometry gripper_geometry(const GripperModel& g, double theta5_deg) {
  if (!(g.a4 > 0.0) || !(g.a5_xy > 0.0) || !(g.a5_z > 0.0) ||
      !(g.clearance >= 0.0))
    throw std::invalid_argument("gripper_geometry: lengths must be positive");
  if (std::abs(theta5_deg) > 90.0)
    throw std::invalid_argument("gripper_geometry: |theta5| must be <= 90");
  const double theta5 = deg_to_rad(theta5_deg);
  GripperGeometry out;
  out.a4_xy = g.a4 + g.a5_xy * std::cos(theta5);
  out.a5_z = g.a5_z * std::sin(theta5);
  out.s_z = g.clearance + std::abs(out.a5_z);
  return out;
}

SortingScenario::SortingScenario() : initial_joints(3) {
  initial_joints << 120.0, 93.0, -132.0;
}

JointVector apply_noise(const JointVector& joints, const NoiseModel& noise,
                        std::mt19937_64& rng) {
  if (noise.std_dev < 0.0 || noise.quant_step < 0.0)
    throw std::invalid_argument("apply_noise: noise magnitudes must be >= 0");
  if (noise.std_dev == 0.0 && noise.quant_step == 0.0) return joints;
  JointVector out = joints;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (noise.std_dev > 0.0) {
      std::normal_distribution<double> gauss(0.0, noise.std_dev);
      out(i) += gauss(rng);
    }
    if (noise.quant_step > 0.0)
      out(i) = std::round(out(i) / noise.quant_step) * noise.quant_step;
  }
  return out;
}

bool success_rule(double euclid_error_xyz, double threshold) {
  if (euclid_error_xyz < 0.0)
    throw std::invalid_argument("success_rule: error must be >= 0");
  return euclid_error_xyz < threshold;
}

namespace {

char color_letter(vision::ColorClass c) {
  switch (c) {
    case vision::ColorClass::Red: return 'R';
    case vision::ColorClass::Green: return 'G';
    case vision::ColorClass::Blue: return 'B';
  }
  return 'R';
}

void validate_placements(const SortingScenario& scenario,
                         const ik::WorkspaceBox& box) {
  for (vision::ColorClass c : {vision::ColorClass::Red,
                               vision::ColorClass::Green,
                               vision::ColorClass::Blue}) {
    if (!box.contains(scenario.placement(c))) {
      std::ostringstream msg;
      msg << "scenario: " << vision::to_string(c)
          << " placement target is outside the workspace box";
      throw std::invalid_argument(msg.str());
    }
  }
}

}  // namespace

std::vector<PlannedRoute> plan_routes(
    const std::vector<vision::DetectedObject>& objects,
    const SortingScenario& scenario, const ik::WorkspaceBox& box) {
  validate_placements(scenario, box);
  const double s_z = scenario.pick_height();

  std::vector<PlannedRoute> plan;
  int counters[3] = {0, 0, 0};
  for (vision::ColorClass c : {vision::ColorClass::Red,
                               vision::ColorClass::Green,
                               vision::ColorClass::Blue}) {
    for (std::size_t i = 0; i < objects.size(); ++i) {
      if (objects[i].color != c) continue;
      const int rank = ++counters[static_cast<int>(c)];
      PlannedRoute pick;
      pick.object_index = static_cast<int>(i);
      pick.object_id = color_letter(c) + std::to_string(rank);
      pick.color = c;
      pick.step = 0;
      pick.target = Vec3(objects[i].world.x(), objects[i].world.y(), s_z);

      PlannedRoute place = pick;
      place.step = 1;
      place.target = scenario.placement(c);

      if (!ik::check_workspace(pick.target, box)) {
        std::ostringstream reason;
        reason << "pick target (" << pick.target.x() << ", " << pick.target.y()
               << ", " << pick.target.z() << ") outside the workspace box";
        pick.skipped = place.skipped = true;
        pick.skip_reason = place.skip_reason = reason.str();
      }
      plan.push_back(std::move(pick));
      plan.push_back(std::move(place));
    }
  }
  return plan;
}

TrialAggregates aggregate(const std::vector<RouteRecord>& routes) {
  TrialAggregates agg;
  for (const RouteRecord& r : routes) {
    if (r.skipped) {
      ++agg.skipped;
      continue;
    }
    ++agg.routes;
    agg.converged += r.converged ? 1 : 0;
    agg.successes += r.success ? 1 : 0;
    agg.mean_iterations += r.iterations;
    agg.mean_initial_error += r.initial_error;
    agg.mean_final_error += r.final_error;
    agg.mean_euclid_xyz += r.noisy_error;
  }
  if (agg.routes > 0) {
    const double n = agg.routes;
    agg.success_rate = agg.successes / n;
    agg.mean_iterations /= n;
    agg.mean_initial_error /= n;
    agg.mean_final_error /= n;
    agg.mean_euclid_xyz /= n;
  }
  return agg;
}

namespace {

// Direct scene read-through: keeps list order and synthesises the pixel view
// from the calibration (area is not measured in this mode).
std::vector<vision::DetectedObject> read_through(
    const vision::Scene& scene, const vision::Calibration& cal) {
  std::vector<vision::DetectedObject> out;
  out.reserve(scene.objects.size());
  for (const vision::SceneObject& obj : scene.objects) {
    vision::DetectedObject det;
    det.color = obj.color;
    det.world = obj.world;
    det.pixel = cal.unproject(obj.world);
    det.area = 0.0;
    out.push_back(det);
  }
  return out;
}

// Matches a detection back to an object of the remaining scene (nearest
// same-colour object within 1 cm; read-through matches exactly).
std::size_t match_scene_object(const vision::Scene& scene,
                               const vision::DetectedObject& det) {
  std::size_t best = scene.objects.size();
  double best_dist = 1.0;
  for (std::size_t i = 0; i < scene.objects.size(); ++i) {
    if (scene.objects[i].color != det.color) continue;
    const double dist = (scene.objects[i].world - det.world).norm();
    if (dist <= best_dist) {
      best_dist = dist;
      best = i;
    }
  }
  if (best == scene.objects.size())
    throw NumericError("run_sorting: detection does not match any remaining "
                       "scene object");
  return best;
}

RouteRecord execute_route(const PlannedRoute& route, const RunOptions& opts,
                          const NoiseModel& noise, JointVector& current_joints,
                          std::mt19937_64& rng) {
  RouteRecord rec;
  rec.object_id = route.object_id;
  rec.color = route.color;
  rec.step = route.step;
  rec.target = route.target;
  if (route.skipped) {
    rec.skipped = true;
    rec.skip_reason = route.skip_reason;
    return rec;
  }

  ik::SolveOptions sopts;
  sopts.gains = opts.gains;
  sopts.limits = opts.limits;
  sopts.box = opts.box;
  sopts.tol = opts.tol;
  sopts.max_iter = opts.max_iter;
  try {
    const ik::IkTrace trace =
        ik::solve(opts.chain, current_joints, route.target, sopts);
    if (opts.trace_observer) opts.trace_observer(trace);
    rec.iterations = trace.iterations();
    rec.initial_error = trace.initial_error();
    rec.final_error = trace.final_error();
    rec.ee = trace.final_ee();
    rec.converged = trace.converged;
    // The commanded joints chain into the next route; actuation noise only
    // affects where the physical arm ends up.
    current_joints = trace.final_joints();
    const JointVector noisy = apply_noise(current_joints, noise, rng);
    rec.noisy_ee = kin::forward_kinematics(opts.chain, noisy).translation;
    rec.noisy_error = (rec.noisy_ee - route.target).norm();
    rec.success = success_rule(rec.noisy_error, opts.success_threshold);
  } catch (const WorkspaceViolationError& err) {
    rec.skipped = true;
    rec.skip_reason = err.what();
  }
  return rec;
}

}  // namespace

TrialReport run_sorting(const vision::Scene& scene,
                        const SortingScenario& scenario,
                        const NoiseModel& noise, const RunOptions& opts,
                        std::mt19937_64& rng) {
  validate_placements(scenario, opts.box);

  vision::Scene remaining = scene;
  JointVector current = scenario.initial_joints;
  TrialReport report;
  int executed_objects[3] = {0, 0, 0};

  while (!remaining.objects.empty()) {
    const std::vector<vision::DetectedObject> detections =
        opts.detector ? opts.detector(remaining)
                      : read_through(remaining, opts.calibration);
    if (detections.empty()) break;  // nothing left to see: run complete
    std::vector<PlannedRoute> plan = plan_routes(detections, scenario, opts.box);

    // Execute only the first object's pick/place pair, then re-detect.
    const int object_index = plan.front().object_index;
    for (std::size_t i = 0; i < 2 && i < plan.size(); ++i) {
      PlannedRoute& route = plan[i];
      // Re-number with the per-run counter (the per-detection counter
      // restarts every round).
      const int rank = executed_objects[static_cast<int>(route.color)] + 1;
      route.object_id = route.object_id.substr(0, 1) + std::to_string(rank);
      report.routes.push_back(
          execute_route(route, opts, noise, current, rng));
    }
    ++executed_objects[static_cast<int>(plan.front().color)];

    const std::size_t scene_index =
        match_scene_object(remaining, detections[static_cast<std::size_t>(
                                          object_index)]);
    remaining.objects.erase(remaining.objects.begin() +
                            static_cast<std::ptrdiff_t>(scene_index));
  }
  report.aggregates = aggregate(report.routes);
  return report;
}

TrialReport run_sorting(const vision::Scene& scene,
                        const SortingScenario& scenario,
                        const NoiseModel& noise, const RunOptions& opts) {
  std::mt19937_64 rng(noise.seed);
  return run_sorting(scene, scenario, noise, opts, rng);
}

MultiTrialReport run_trials(const TrialsOptions& topts,
                            const SortingScenario& scenario,
                            const NoiseModel& noise, const RunOptions& opts) {
  if (topts.trials < 0)
    throw std::invalid_argument("run_trials: trials must be >= 0");
  if (topts.parallel < 1)
    throw std::invalid_argument("run_trials: parallel must be >= 1");

  MultiTrialReport multi;
  multi.trials.resize(static_cast<std::size_t>(topts.trials));

  auto run_one = [&](int index) {
    std::mt19937_64 rng(topts.base_seed + static_cast<std::uint64_t>(index));
    const vision::Scene scene =
        topts.fixed_scene ? *topts.fixed_scene
                          : vision::random_scene(rng, topts.objects_per_color);
    multi.trials[static_cast<std::size_t>(index)] =
        run_sorting(scene, scenario, noise, opts, rng);
  };

  if (topts.parallel == 1 || topts.trials <= 1) {
    for (int i = 0; i < topts.trials; ++i) run_one(i);
  } else {
    std::vector<std::future<void>> workers;
    std::atomic<int> next{0};
    const int worker_count = std::min(topts.parallel, topts.trials);
    for (int w = 0; w < worker_count; ++w)
      workers.push_back(std::async(std::launch::async, [&]() {
        for (int i = next.fetch_add(1); i < topts.trials;
             i = next.fetch_add(1))
          run_one(i);
      }));
    for (auto& f : workers) f.get();
  }

  std::vector<RouteRecord> all;
  for (const TrialReport& t : multi.trials)
    all.insert(all.end(), t.routes.begin(), t.routes.end());
  multi.combined = aggregate(all);
  return multi;
}

}  // namespace sortarm::sim
