#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sortarm/ik.hpp"
#include "sortarm/vision.hpp"

namespace sortarm::sim {

/// Two-finger gripper geometry. The planar reach and the grip height use
/// two independent finger lengths: the angled hardware finger projects
/// differently onto the table plane and the vertical axis.
struct GripperModel {
  double a4 = 9.0;               ///< wrist link, cm
  double a5_xy = 10.0;           ///< finger length for the planar reach, cm
  double a5_z = 13.0;            ///< finger length for the grip height, cm
  double theta5_initial = 30.0;  ///< finger pitch when open, degrees
  double theta5_final = -60.0;   ///< finger pitch when gripping, degrees
  double clearance = 1.5;        ///< fingertip-to-object clearance, cm
};

/// Derived lengths at a given finger pitch.
struct GripperGeometry {
  double a4_xy = 0.0;  ///< combined wrist + finger planar length, cm
  double a5_z = 0.0;   ///< signed vertical finger extent, cm
  double s_z = 0.0;    ///< grip height above the table, cm
};

/// Evaluates the gripper lengths at `theta5_deg`. Throws
/// std::invalid_argument for nonpositive lengths or |theta5| > 90.
GripperGeometry gripper_geometry(const GripperModel& g, double theta5_deg);

/// Pick-and-place task description: per-colour placement targets, the
/// starting joint configuration, and the gripper. Objects are picked at the
/// grip height derived from the gripper's final pitch.
struct SortingScenario {
  Vec3 placements[3] = {Vec3(-20.0, 35.0, 20.0), Vec3(-20.0, 45.0, 20.0),
                        Vec3(-20.0, 55.0, 20.0)};  ///< Red, Green, Blue
  JointVector initial_joints;
  GripperModel gripper{};

  SortingScenario();

  const Vec3& placement(vision::ColorClass c) const {
    return placements[static_cast<int>(c)];
  }
  /// Grip height s_z at the gripper's final pitch.
  double pick_height() const {
    return gripper_geometry(gripper, gripper.theta5_final).s_z;
  }
};

/// Actuation noise on the converged joints: seeded per-joint Gaussian picks
/// plus a servo quantization grid. Zero std-dev and step give the identity.
struct NoiseModel {
  double std_dev = 0.60;     ///< degrees per actuated joint
  double quant_step = 0.25;  ///< degrees; 0 disables snapping
  std::uint64_t seed = 1;
};

/// Perturbs each joint with Gaussian noise then snaps to the quantization
/// grid, consuming `rng`. A zero model returns the input unchanged without
/// consuming randomness.
JointVector apply_noise(const JointVector& joints, const NoiseModel& noise,
                        std::mt19937_64& rng);

/// success iff euclid_error_xyz < threshold (strict). Throws
/// std::invalid_argument for negative error.
bool success_rule(double euclid_error_xyz, double threshold = 1.2);

/// One planned motion: pick (step 0) towards an object at grip height, or
/// place (step 1) towards the colour's placement target.
struct PlannedRoute {
  int object_index = -1;  ///< index into the detection list
  std::string object_id;  ///< "R1", "G2", ... per-colour counter
  vision::ColorClass color = vision::ColorClass::Red;
  int step = 0;  ///< 0 = pick, 1 = place
  Vec3 target = Vec3::Zero();
  bool skipped = false;
  std::string skip_reason;
};

/// Orders pick/place route pairs Red -> Green -> Blue, within a colour by
/// detection order. Pick targets outside the workspace box mark the pair
/// skipped with a reason. Throws std::invalid_argument when a placement
/// target violates the box.
std::vector<PlannedRoute> plan_routes(
    const std::vector<vision::DetectedObject>& objects,
    const SortingScenario& scenario, const ik::WorkspaceBox& box = {});

/// Outcome of one executed (or skipped) route.
struct RouteRecord {
  std::string object_id;
  vision::ColorClass color = vision::ColorClass::Red;
  int step = 0;
  int iterations = 0;
  double initial_error = 0.0;
  double final_error = 0.0;
  Vec3 target = Vec3::Zero();
  Vec3 ee = Vec3::Zero();        ///< converged (commanded) end effector
  Vec3 noisy_ee = Vec3::Zero();  ///< after actuation noise
  double noisy_error = 0.0;      ///< |noisy_ee - target|
  bool converged = false;
  bool success = false;
  bool skipped = false;
  std::string skip_reason;
};

struct TrialAggregates {
  int routes = 0;
  int converged = 0;
  int successes = 0;
  int skipped = 0;
  double success_rate = 0.0;
  double mean_iterations = 0.0;
  double mean_initial_error = 0.0;
  double mean_final_error = 0.0;
  double mean_euclid_xyz = 0.0;  ///< mean noisy Euclidean error
};

/// Aggregates executed routes; skipped routes only increment `skipped`.
TrialAggregates aggregate(const std::vector<RouteRecord>& routes);

struct TrialReport {
  std::vector<RouteRecord> routes;
  TrialAggregates aggregates;
};

/// Detection hook used between objects; receives the remaining scene.
using DetectFn =
    std::function<std::vector<vision::DetectedObject>(const vision::Scene&)>;

struct RunOptions {
  kin::DhChain chain = kin::sorting_arm_chain();
  ik::PdGains gains{};
  ik::JointLimits limits = ik::extended_limits();
  ik::WorkspaceBox box{};
  double tol = 0.032;
  int max_iter = 200;
  double success_threshold = 1.2;
  /// Empty: objects are read through directly in scene order (no raster
  /// round trip). Otherwise invoked on the remaining scene between objects.
  DetectFn detector;
  vision::Calibration calibration{};  ///< pixel coordinates for read-through
  /// Receives every executed route's full solve trace, on the executing
  /// thread; guard shared state when trials run in parallel.
  std::function<void(const ik::IkTrace&)> trace_observer;
};

/// Runs the full sorting scenario on a scene: re-detects remaining objects
/// between motions, executes pick/place routes via the IK solver, applies
/// actuation noise to each route's converged joints, and adjudicates success
/// on the noisy end effector. Routes consume `rng` in execution order.
TrialReport run_sorting(const vision::Scene& scene,
                        const SortingScenario& scenario,
                        const NoiseModel& noise, const RunOptions& opts,
                        std::mt19937_64& rng);

/// Convenience overload seeding the generator from the noise model.
TrialReport run_sorting(const vision::Scene& scene,
                        const SortingScenario& scenario,
                        const NoiseModel& noise, const RunOptions& opts = {});

struct TrialsOptions {
  int trials = 1;
  std::uint64_t base_seed = 1;  ///< trial i uses seed base_seed + i
  int objects_per_color = 4;
  std::optional<vision::Scene> fixed_scene;  ///< random per trial when unset
  int parallel = 1;  ///< worker count; results merge in trial order
};

struct MultiTrialReport {
  std::vector<TrialReport> trials;
  TrialAggregates combined;
};

/// Runs independent trials. Trial i seeds its own generator with
/// base_seed + i, draws its scene (unless fixed), then runs the scenario;
/// reports are merged in trial order regardless of parallelism.
MultiTrialReport run_trials(const TrialsOptions& topts,
                            const SortingScenario& scenario,
                            const NoiseModel& noise, const RunOptions& opts);

}  // namespace sortarm::sim
