#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "sortarm/sim.hpp"

using namespace sortarm;
using namespace sortarm::sim;

namespace {

NoiseModel zero_noise() { return NoiseModel{0.0, 0.0, 1}; }

}  // namespace

TEST_CASE("gripper_geometry matches the hardware constants") {
  const GripperModel g;
  const GripperGeometry grip = gripper_geometry(g, 60.0);
  CHECK(grip.a4_xy == doctest::Approx(14.0).epsilon(1e-12));  // 9 + 10*cos60

  const GripperGeometry final = gripper_geometry(g, g.theta5_final);
  CHECK(final.s_z == doctest::Approx(12.76).epsilon(1e-3));  // 1.5 + |13 sin -60|
  CHECK(final.s_z == doctest::Approx(1.5 + 13.0 * std::sin(deg_to_rad(60.0)))
                         .epsilon(1e-12));

  const GripperGeometry flat = gripper_geometry(g, 0.0);
  CHECK(flat.a4_xy == doctest::Approx(g.a4 + g.a5_xy));
  CHECK(flat.s_z == doctest::Approx(g.clearance));

  CHECK_THROWS_AS(gripper_geometry(g, 91.0), std::invalid_argument);
  GripperModel bad = g;
  bad.a5_xy = 0.0;
  CHECK_THROWS_AS(gripper_geometry(bad, 0.0), std::invalid_argument);
}

TEST_CASE("scenario defaults: placements, start pose, pick height") {
  const SortingScenario scenario;
  CHECK(scenario.placement(vision::ColorClass::Red) == Vec3(-20.0, 35.0, 20.0));
  CHECK(scenario.placement(vision::ColorClass::Green) == Vec3(-20.0, 45.0, 20.0));
  CHECK(scenario.placement(vision::ColorClass::Blue) == Vec3(-20.0, 55.0, 20.0));
  CHECK(scenario.initial_joints(0) == doctest::Approx(120.0));
  CHECK(scenario.pick_height() == doctest::Approx(12.7583302492).epsilon(1e-9));
}

TEST_CASE("apply_noise: identity, snapping, and statistics") {
  std::mt19937_64 rng(3);
  const JointVector joints = test_helpers::make_joints({93.2, -45.0, 10.0});

  const JointVector same = apply_noise(joints, zero_noise(), rng);
  CHECK(same == joints);

  // Pure quantization snaps to the nearest grid point.
  const JointVector snapped =
      apply_noise(joints, NoiseModel{0.0, 0.5, 1}, rng);
  CHECK(snapped(0) == doctest::Approx(93.0));
  CHECK(snapped(1) == doctest::Approx(-45.0));

  // Seeded Gaussian spread matches the configured std-dev.
  const NoiseModel gauss{0.3, 0.0, 1};
  double sum = 0.0, ss = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const JointVector noisy = apply_noise(joints, gauss, rng);
    const double d = noisy(0) - joints(0);
    sum += d;
    ss += d * d;
  }
  const double mean = sum / n;
  const double std_dev = std::sqrt((ss - n * mean * mean) / (n - 1));
  CHECK(std::abs(std_dev - 0.3) / 0.3 < 0.05);
}

TEST_CASE("success_rule is strict at the threshold") {
  CHECK(success_rule(0.62));
  CHECK(!success_rule(1.2));
  CHECK(!success_rule(2.15026));
  CHECK(success_rule(1.19, 1.2));
  CHECK_THROWS_AS(success_rule(-0.1), std::invalid_argument);
}

TEST_CASE("plan_routes orders colours and flags out-of-box picks") {
  const SortingScenario scenario;
  std::vector<vision::DetectedObject> objects;
  auto add = [&](vision::ColorClass c, double x, double y) {
    vision::DetectedObject det;
    det.color = c;
    det.world = Vec2(x, y);
    objects.push_back(det);
  };
  // Interleaved input: plan must still group Red -> Green -> Blue.
  add(vision::ColorClass::Blue, 2.03, 48.57);
  add(vision::ColorClass::Red, -10.99, 49.70);
  add(vision::ColorClass::Green, -4.57, 47.58);
  add(vision::ColorClass::Red, 50.0, 40.0);  // x outside the box

  const auto plan = plan_routes(objects, scenario);
  REQUIRE(plan.size() == 8);
  CHECK(plan[0].color == vision::ColorClass::Red);
  CHECK(plan[0].step == 0);
  CHECK(plan[0].object_id == "R1");
  CHECK(plan[0].target.x() == doctest::Approx(-10.99));
  CHECK(plan[0].target.z() == doctest::Approx(scenario.pick_height()));
  CHECK(plan[1].step == 1);
  CHECK(plan[1].target == scenario.placement(vision::ColorClass::Red));
  CHECK(plan[2].object_id == "R2");
  CHECK(plan[2].skipped);
  CHECK(!plan[2].skip_reason.empty());
  CHECK(plan[3].skipped);
  CHECK(plan[4].color == vision::ColorClass::Green);
  CHECK(plan[6].color == vision::ColorClass::Blue);
  CHECK(plan_routes({}, scenario).empty());
}

TEST_CASE("plan_routes rejects placements outside the box") {
  SortingScenario scenario;
  scenario.placements[0] = Vec3(0.0, 0.0, 0.0);
  CHECK_THROWS_AS(plan_routes({}, scenario), std::invalid_argument);
}

TEST_CASE("zero-noise sample run: every route converges and succeeds") {
  const TrialReport report =
      run_sorting(vision::sample_scene(), SortingScenario{}, zero_noise());
  REQUIRE(report.routes.size() == 24);
  for (const RouteRecord& r : report.routes) {
    CHECK(!r.skipped);
    CHECK(r.converged);
    CHECK(r.final_error < 0.032);
    CHECK(r.noisy_error == doctest::Approx(r.final_error));
    CHECK(r.success);
  }
  // Colour blocks: 8 red routes, then 8 green, then 8 blue.
  for (int i = 0; i < 8; ++i) CHECK(report.routes[i].color == vision::ColorClass::Red);
  for (int i = 8; i < 16; ++i) CHECK(report.routes[i].color == vision::ColorClass::Green);
  for (int i = 16; i < 24; ++i) CHECK(report.routes[i].color == vision::ColorClass::Blue);
  // Pick/place alternation with per-colour numbering.
  CHECK(report.routes[0].object_id == "R1");
  CHECK(report.routes[0].step == 0);
  CHECK(report.routes[1].object_id == "R1");
  CHECK(report.routes[1].step == 1);
  CHECK(report.routes[6].object_id == "R4");
  CHECK(report.routes[8].object_id == "G1");
  CHECK(report.routes[22].object_id == "B4");

  CHECK(report.aggregates.routes == 24);
  CHECK(report.aggregates.converged == 24);
  CHECK(report.aggregates.success_rate == doctest::Approx(1.0));
  CHECK(report.aggregates.mean_final_error < 0.032);
  // First pick starts from the ready pose towards the first red object.
  CHECK(report.routes[0].initial_error == doctest::Approx(18.824652108732).epsilon(1e-9));
  CHECK(report.routes[0].iterations == 62);
}

TEST_CASE("empty scene yields an empty report") {
  const TrialReport report =
      run_sorting(vision::Scene{}, SortingScenario{}, zero_noise());
  CHECK(report.routes.empty());
  CHECK(report.aggregates.routes == 0);
}

TEST_CASE("out-of-box objects are skipped and the run continues") {
  vision::Scene scene;
  scene.objects = {
      {vision::ColorClass::Red, Vec2(50.0, 40.0)},  // unreachable
      {vision::ColorClass::Blue, Vec2(2.03, 48.57)},
  };
  const TrialReport report =
      run_sorting(scene, SortingScenario{}, zero_noise());
  REQUIRE(report.routes.size() == 4);
  CHECK(report.routes[0].skipped);
  CHECK(report.routes[1].skipped);
  CHECK(report.routes[2].converged);
  CHECK(report.routes[3].converged);
  CHECK(report.aggregates.skipped == 2);
  CHECK(report.aggregates.routes == 2);
}

TEST_CASE("identical seeds produce identical reports") {
  const NoiseModel noise{0.62, 0.25, 9001};
  const TrialReport a = run_sorting(vision::sample_scene(), SortingScenario{}, noise);
  const TrialReport b = run_sorting(vision::sample_scene(), SortingScenario{}, noise);
  REQUIRE(a.routes.size() == b.routes.size());
  for (std::size_t i = 0; i < a.routes.size(); ++i) {
    CHECK(a.routes[i].noisy_ee == b.routes[i].noisy_ee);
    CHECK(a.routes[i].noisy_error == b.routes[i].noisy_error);
    CHECK(a.routes[i].iterations == b.routes[i].iterations);
    CHECK(a.routes[i].success == b.routes[i].success);
  }
}

TEST_CASE("mean error grows with the noise level") {
  double prev = -1.0;
  for (double std_dev : {0.1, 0.4, 1.0}) {
    const NoiseModel noise{std_dev, 0.0, 4242};
    const TrialReport report =
        run_sorting(vision::sample_scene(), SortingScenario{}, noise);
    CHECK(report.aggregates.mean_euclid_xyz > prev);
    prev = report.aggregates.mean_euclid_xyz;
  }
}

TEST_CASE("noise perturbs only the physical pose, not the commanded chain") {
  const NoiseModel noise{1.5, 0.5, 77};
  const TrialReport noisy =
      run_sorting(vision::sample_scene(), SortingScenario{}, noise);
  const TrialReport clean =
      run_sorting(vision::sample_scene(), SortingScenario{}, zero_noise());
  REQUIRE(noisy.routes.size() == clean.routes.size());
  for (std::size_t i = 0; i < noisy.routes.size(); ++i) {
    CHECK(noisy.routes[i].iterations == clean.routes[i].iterations);
    CHECK(noisy.routes[i].ee == clean.routes[i].ee);
    CHECK(noisy.routes[i].noisy_error >= 0.0);
  }
}

TEST_CASE("run_trials derives per-trial seeds and merges in order") {
  TrialsOptions topts;
  topts.trials = 3;
  topts.base_seed = 11;
  const SortingScenario scenario;
  const NoiseModel noise{0.62, 0.25, 0};
  const MultiTrialReport multi = run_trials(topts, scenario, noise, RunOptions{});
  REQUIRE(multi.trials.size() == 3);
  CHECK(multi.combined.routes == 72);
  for (const TrialReport& t : multi.trials) CHECK(t.routes.size() == 24);

  // Same base seed reproduces; different trials differ (distinct scenes).
  const MultiTrialReport again = run_trials(topts, scenario, noise, RunOptions{});
  CHECK(again.combined.mean_euclid_xyz == multi.combined.mean_euclid_xyz);
  CHECK(multi.trials[0].routes[0].target != multi.trials[1].routes[0].target);
}

TEST_CASE("parallel trials match sequential trials exactly") {
  TrialsOptions seq;
  seq.trials = 4;
  seq.base_seed = 5;
  TrialsOptions par = seq;
  par.parallel = 4;
  const SortingScenario scenario;
  const NoiseModel noise{0.62, 0.25, 0};
  const MultiTrialReport a = run_trials(seq, scenario, noise, RunOptions{});
  const MultiTrialReport b = run_trials(par, scenario, noise, RunOptions{});
  REQUIRE(a.trials.size() == b.trials.size());
  for (std::size_t t = 0; t < a.trials.size(); ++t) {
    REQUIRE(a.trials[t].routes.size() == b.trials[t].routes.size());
    for (std::size_t i = 0; i < a.trials[t].routes.size(); ++i) {
      CHECK(a.trials[t].routes[i].noisy_error ==
            b.trials[t].routes[i].noisy_error);
      CHECK(a.trials[t].routes[i].iterations == b.trials[t].routes[i].iterations);
    }
  }
  CHECK(a.combined.mean_euclid_xyz == b.combined.mean_euclid_xyz);
}

TEST_CASE("fixed scene option reuses the scene across trials") {
  TrialsOptions topts;
  topts.trials = 2;
  topts.base_seed = 21;
  topts.fixed_scene = vision::sample_scene();
  const MultiTrialReport multi =
      run_trials(topts, SortingScenario{}, NoiseModel{0.62, 0.25, 0}, RunOptions{});
  REQUIRE(multi.trials.size() == 2);
  // Same targets, different noise draws.
  CHECK(multi.trials[0].routes[0].target == multi.trials[1].routes[0].target);
  CHECK(multi.trials[0].routes[0].noisy_ee != multi.trials[1].routes[0].noisy_ee);
}

TEST_CASE("trace observer sees one solve per executed route") {
  RunOptions opts;
  int traces = 0;
  int iterates = 0;
  opts.trace_observer = [&](const ik::IkTrace& trace) {
    ++traces;
    iterates += static_cast<int>(trace.iterates.size());
    CHECK(trace.converged);
  };
  const TrialReport report =
      run_sorting(vision::sample_scene(), SortingScenario{},
                  NoiseModel{0.0, 0.0, 3}, opts);
  CHECK(traces == 24);
  int recorded = 0;
  for (const auto& r : report.routes) recorded += r.iterations + 1;
  CHECK(iterates == recorded);
}
