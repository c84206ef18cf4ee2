// Command-line front end for the colour-sorting arm library: forward and
// inverse kinematics, object detection, noisy pick-and-place simulation, and
// route-error statistics. Numeric output uses a fixed four-decimal format.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sortarm/io.hpp"

using namespace sortarm;
namespace fs = std::filesystem;

namespace {

std::string join4(const Eigen::Ref<const Eigen::VectorXd>& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += io::fmt4(v(i));
  }
  return out;
}

JointVector to_joints(const std::vector<double>& values) {
  return Eigen::Map<const Eigen::VectorXd>(values.data(),
                                           static_cast<int>(values.size()));
}

Vec3 to_vec3(const std::vector<double>& values, const char* what) {
  if (values.size() != 3)
    throw std::invalid_argument(std::string(what) + ": expected 3 numbers, got " +
                                std::to_string(values.size()));
  return Vec3(values[0], values[1], values[2]);
}

/// --out flag beats the SORTARM_OUT environment variable beats the config.
fs::path resolve_out_dir(const std::string& flag_value,
                         const io::RunConfig& config) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("SORTARM_OUT"); env && *env) return env;
  return config.out_dir;
}

fs::path ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " +
                  ec.message());
  return dir;
}

void apply_calibration_flag(io::RunConfig& config, const std::string& name) {
  if (name.empty()) return;
  if (name == "proportional") {
    config.calibration = vision::Calibration::proportional();
  } else {
    config.calibration = vision::Calibration{};
  }
}

// -------------------------------------------------------------------- fk --

struct FkArgs {
  std::string config_path;
  std::vector<double> joints;
  std::string chain_path;
  bool transform = false;
};

io::RunConfig active_config(const std::string& config_path) {
  return config_path.empty() ? io::RunConfig{} : io::load_config(config_path);
}

void run_fk(const FkArgs& args) {
  io::RunConfig config = active_config(args.config_path);
  if (!args.chain_path.empty()) config.chain = io::load_chain(args.chain_path);

  const JointVector q = to_joints(args.joints);
  const Transform t = kin::forward_kinematics(config.chain, q);

  std::cout << "joints: " << join4(q) << '\n';
  std::cout << "full:   " << join4(config.chain.expand(q)) << '\n';
  std::cout << "ee:     " << join4(t.translation) << '\n';
  if (args.transform) {
    const Mat4 m = t.matrix();
    std::cout << "transform:\n";
    for (int r = 0; r < 4; ++r) {
      std::cout << "  " << io::fmt4(m(r, 0)) << ',' << io::fmt4(m(r, 1)) << ','
                << io::fmt4(m(r, 2)) << ',' << io::fmt4(m(r, 3)) << '\n';
    }
  }
}

// -------------------------------------------------------------------- ik --

struct IkArgs {
  std::string config_path;
  std::vector<double> target;
  std::vector<double> start;
  double kp = 0.0, kd = 0.0, tol = 0.0;
  int max_iter = 0;
  bool has_kp = false, has_kd = false, has_tol = false, has_max_iter = false;
  std::string limits_profile;
  std::string trace_path;
  std::vector<double> sweep_kp;
  std::string out_dir;
};

ik::SolveOptions solve_options(const io::RunConfig& config) {
  ik::SolveOptions opts;
  opts.gains = config.gains;
  opts.limits = config.limits;
  opts.box = config.box;
  opts.tol = config.tol;
  opts.max_iter = config.max_iter;
  return opts;
}

void run_ik(const IkArgs& args) {
  io::RunConfig config = active_config(args.config_path);
  if (!args.limits_profile.empty())
    io::set_limits_profile(config, args.limits_profile);
  if (args.has_kp) config.gains.kp = args.kp;
  if (args.has_kd) config.gains.kd = args.kd;
  if (args.has_tol) config.tol = args.tol;
  if (args.has_max_iter) config.max_iter = args.max_iter;

  const Vec3 target = to_vec3(args.target, "--target");
  const JointVector start = args.start.empty()
                                ? config.scenario.initial_joints
                                : to_joints(args.start);
  const ik::SolveOptions opts = solve_options(config);

  if (!args.sweep_kp.empty()) {
    const fs::path out = ensure_dir(resolve_out_dir(args.out_dir, config));
    std::cout << "kp,iterations,initial,final,converged,trace\n";
    for (double kp : args.sweep_kp) {
      ik::SolveOptions swept = opts;
      swept.gains.kp = kp;
      const ik::IkTrace trace = ik::solve(config.chain, start, target, swept);
      const fs::path path = out / ("trace_kp" + io::fmt4(kp) + ".csv");
      std::ofstream file(path);
      if (!file) throw IoError("cannot open for writing: " + path.string());
      io::write_trace_csv(trace, file);
      std::cout << io::fmt4(kp) << ',' << trace.iterations() << ','
                << io::fmt4(trace.initial_error()) << ','
                << io::fmt4(trace.final_error()) << ',' << int(trace.converged)
                << ',' << path.string() << '\n';
    }
    return;
  }

  const ik::IkTrace trace = ik::solve(config.chain, start, target, opts);
  std::cout << "target:     " << join4(target) << '\n';
  std::cout << "start:      " << join4(start) << '\n';
  std::cout << "iterations: " << trace.iterations() << '\n';
  std::cout << "initial:    " << io::fmt4(trace.initial_error()) << '\n';
  std::cout << "final:      " << io::fmt4(trace.final_error()) << '\n';
  std::cout << "converged:  " << (trace.converged ? "yes" : "no") << '\n';
  std::cout << "joints:     " << join4(trace.final_joints()) << '\n';
  std::cout << "ee:         " << join4(trace.final_ee()) << '\n';
  if (!args.trace_path.empty()) {
    std::ofstream file(args.trace_path);
    if (!file) throw IoError("cannot open for writing: " + args.trace_path);
    io::write_trace_csv(trace, file);
    std::cout << "trace:      " << args.trace_path << '\n';
  }
}

// ---------------------------------------------------------------- detect --

struct DetectArgs {
  std::string config_path;
  std::string input_path;
  int min_size = 100;
  double radius_px = 16.0;
  std::string calibration;
  std::string render_path;
  std::string output_path;
};

void run_detect(const DetectArgs& args) {
  io::RunConfig config = active_config(args.config_path);
  apply_calibration_flag(config, args.calibration);

  const fs::path input(args.input_path);
  vision::RasterImage image;
  if (input.extension() == ".ppm") {
    image = io::read_ppm(input);
  } else if (input.extension() == ".json") {
    image = vision::render_scene(io::load_scene(input), config.calibration,
                                 args.radius_px);
  } else {
    throw IoError("detect: --input must be a .ppm image or a .json scene, got " +
                  input.string());
  }
  if (!args.render_path.empty()) io::write_ppm(image, args.render_path);

  const auto objects = vision::detect_objects(image, config.rules,
                                              config.calibration, args.min_size);
  io::write_detection_csv(objects, std::cout);
  if (!args.output_path.empty()) {
    std::ofstream file(args.output_path);
    if (!file) throw IoError("cannot open for writing: " + args.output_path);
    io::write_detection_csv(objects, file);
  }
}

// -------------------------------------------------------------- simulate --

struct SimulateArgs {
  std::string config_path;
  int trials = 1;
  int objects = 12;
  std::uint64_t seed = 1;
  double noise_std = 0.0, noise_quant = 0.0;
  bool has_noise_std = false, has_noise_quant = false;
  std::string scene_path;
  bool sample_scene = false;
  int parallel = 1;
  std::string limits_profile;
  std::string out_dir;
};

void run_simulate(const SimulateArgs& args) {
  io::RunConfig config = active_config(args.config_path);
  if (!args.limits_profile.empty())
    io::set_limits_profile(config, args.limits_profile);
  if (args.has_noise_std) config.noise.std_dev = args.noise_std;
  if (args.has_noise_quant) config.noise.quant_step = args.noise_quant;
  if (args.trials < 1)
    throw std::invalid_argument("--trials must be at least 1");
  if (args.objects < 3 || args.objects % 3 != 0)
    throw std::invalid_argument(
        "--objects must be a positive multiple of 3 (one batch per colour)");
  if (args.parallel < 1)
    throw std::invalid_argument("--parallel must be at least 1");

  sim::TrialsOptions topts;
  topts.trials = args.trials;
  topts.base_seed = args.seed;
  topts.objects_per_color = args.objects / 3;
  topts.parallel = args.parallel;
  if (!args.scene_path.empty())
    topts.fixed_scene = io::load_scene(fs::path(args.scene_path));
  else if (args.sample_scene)
    topts.fixed_scene = vision::sample_scene();

  const sim::MultiTrialReport report = sim::run_trials(
      topts, config.scenario, config.noise, io::run_options(config));

  const fs::path out = ensure_dir(resolve_out_dir(args.out_dir, config));
  for (std::size_t i = 0; i < report.trials.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "routes_trial_%03zu.csv", i);
    io::write_route_csv(report.trials[i], out / name);
  }
  {
    const fs::path path = out / "aggregate.json";
    std::ofstream file(path);
    if (!file) throw IoError("cannot open for writing: " + path.string());
    file << io::aggregate_json(report);
  }

  const auto& c = report.combined;
  std::cout << "trials:             " << report.trials.size() << '\n';
  std::cout << "routes:             " << c.routes << " (skipped " << c.skipped
            << ")\n";
  std::cout << "converged:          " << c.converged << '\n';
  std::cout << "successes:          " << c.successes << '\n';
  std::cout << "success_rate:       " << io::fmt4(c.success_rate) << '\n';
  std::cout << "mean_iterations:    " << io::fmt4(c.mean_iterations) << '\n';
  std::cout << "mean_initial_error: " << io::fmt4(c.mean_initial_error) << '\n';
  std::cout << "mean_final_error:   " << io::fmt4(c.mean_final_error) << '\n';
  std::cout << "mean_euclid_xyz:    " << io::fmt4(c.mean_euclid_xyz) << '\n';
  std::cout << "wrote " << report.trials.size()
            << " route files and aggregate.json to " << out.string() << '\n';
}

// ----------------------------------------------------------------- stats --

struct StatsArgs {
  std::string config_path;
  std::vector<std::string> inputs;
  std::string dir;
  double bin_width = 0.05;
  double threshold = 0.0;
  bool has_threshold = false;
  std::string out_dir;
};

void run_stats(const StatsArgs& args) {
  io::RunConfig config = active_config(args.config_path);
  const double threshold =
      args.has_threshold ? args.threshold : config.success_threshold;

  std::vector<fs::path> files;
  for (const auto& input : args.inputs) files.emplace_back(input);
  if (!args.dir.empty()) {
    if (!fs::is_directory(args.dir))
      throw IoError("stats: --dir is not a directory: " + args.dir);
    for (const auto& entry : fs::directory_iterator(args.dir))
      if (entry.path().extension() == ".csv") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  }
  if (files.empty())
    throw std::invalid_argument("stats: pass route CSVs via --input or --dir");

  std::vector<sim::RouteRecord> routes;
  for (const auto& file : files) {
    const auto records = io::read_route_csv(file);
    routes.insert(routes.end(), records.begin(), records.end());
  }
  const auto samples = io::route_error_samples(routes);
  if (samples.size() < 2)
    throw InsufficientDataError("stats: need at least 2 executed routes, got " +
                                std::to_string(samples.size()));

  const stats::ErrorSummary summary = stats::summarize(samples);
  const fs::path out = ensure_dir(resolve_out_dir(args.out_dir, config));
  {
    std::ofstream file(out / "summary.json");
    if (!file) throw IoError("cannot open for writing: summary.json");
    file << io::summary_json(summary);
  }
  std::cout << "samples:  " << summary.count << '\n';
  std::cout << "mean_xyz: " << io::fmt4(summary.euclid_xyz.mean) << '\n';
  std::cout << "std_xyz:  " << io::fmt4(summary.euclid_xyz.std_dev) << '\n';
  std::cout << "max_xyz:  " << io::fmt4(summary.euclid_xyz.max) << '\n';

  if (samples.size() < 10) {
    std::cout << "note: " << samples.size()
              << " samples are too few for a distribution fit (need 10); "
                 "wrote the summary only\n";
    std::cout << "wrote summary.json to " << out.string() << '\n';
    return;
  }

  std::vector<double> xyz;
  xyz.reserve(samples.size());
  for (const auto& s : samples) xyz.push_back(s.euclid_xyz);

  const stats::Histogram hist = stats::histogram_pdf(xyz, args.bin_width);
  const stats::WeibullFit fit = stats::weibull_fit(xyz);
  const stats::SuccessEstimate estimate =
      stats::success_probability(xyz, threshold);
  {
    std::ofstream file(out / "histogram.csv");
    if (!file) throw IoError("cannot open for writing: histogram.csv");
    io::write_histogram_csv(hist, file);
  }
  {
    std::ofstream file(out / "fit.json");
    if (!file) throw IoError("cannot open for writing: fit.json");
    file << io::fit_json(fit, &estimate, threshold);
  }
  std::cout << "fit:      shape_k=" << io::fmt4(fit.shape)
            << " scale_lambda=" << io::fmt4(fit.scale) << '\n';
  std::cout << "success (threshold " << io::fmt4(threshold)
            << "): empirical=" << io::fmt4(estimate.empirical)
            << " weibull_cdf=" << io::fmt4(estimate.weibull_cdf) << '\n';
  std::cout << "wrote summary.json, histogram.csv and fit.json to "
            << out.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sortarm: colour-sorting robot arm toolkit"};
  app.require_subcommand(1);

  FkArgs fk_args;
  auto* fk = app.add_subcommand("fk", "Forward kinematics of a configuration");
  fk->add_option("--joints", fk_args.joints,
                 "Independent joint angles in degrees, comma separated")
      ->required()
      ->delimiter(',');
  fk->add_option("--chain", fk_args.chain_path, "Chain description (JSON)");
  fk->add_option("--config", fk_args.config_path, "Run configuration (JSON)");
  fk->add_flag("--transform", fk_args.transform,
               "Also print the homogeneous transform");
  fk->callback([&] { run_fk(fk_args); });

  IkArgs ik_args;
  auto* ik_cmd = app.add_subcommand("ik", "Solve inverse kinematics");
  ik_cmd->add_option("--target", ik_args.target,
                     "Cartesian target x,y,z in cm")
      ->required()
      ->delimiter(',');
  ik_cmd->add_option("--start", ik_args.start,
                     "Start joints in degrees (default: the ready pose)")
      ->delimiter(',');
  auto* kp_opt = ik_cmd->add_option("--kp", ik_args.kp, "Proportional gain");
  auto* kd_opt = ik_cmd->add_option("--kd", ik_args.kd, "Derivative gain");
  auto* tol_opt =
      ik_cmd->add_option("--tol", ik_args.tol, "Convergence tolerance in cm");
  auto* iter_opt =
      ik_cmd->add_option("--max-iter", ik_args.max_iter, "Iteration budget");
  ik_cmd->add_option("--limits", ik_args.limits_profile, "Joint limit profile")
      ->check(CLI::IsMember({"strict", "extended"}));
  ik_cmd->add_option("--trace", ik_args.trace_path,
                     "Write the iterate trace CSV here");
  ik_cmd->add_option("--sweep-kp", ik_args.sweep_kp,
                     "Solve once per gain and write per-gain trace CSVs")
      ->delimiter(',');
  ik_cmd->add_option("--out", ik_args.out_dir, "Output directory for sweeps");
  ik_cmd->add_option("--config", ik_args.config_path,
                     "Run configuration (JSON)");
  ik_cmd->callback([&] {
    ik_args.has_kp = kp_opt->count() > 0;
    ik_args.has_kd = kd_opt->count() > 0;
    ik_args.has_tol = tol_opt->count() > 0;
    ik_args.has_max_iter = iter_opt->count() > 0;
    run_ik(ik_args);
  });

  DetectArgs detect_args;
  auto* detect = app.add_subcommand("detect", "Detect coloured objects");
  detect
      ->add_option("--input", detect_args.input_path,
                   "A .ppm camera image or a .json scene to render first")
      ->required();
  detect->add_option("--min-size", detect_args.min_size,
                     "Minimum component size in pixels");
  detect->add_option("--radius", detect_args.radius_px,
                     "Disc radius in pixels when rendering a scene");
  detect
      ->add_option("--calibration", detect_args.calibration,
                   "Pixel-to-table mapping")
      ->check(CLI::IsMember({"affine", "proportional"}));
  detect->add_option("--render", detect_args.render_path,
                     "Save the analysed image as PPM");
  detect->add_option("--output", detect_args.output_path,
                     "Write the detection CSV here as well");
  detect->add_option("--config", detect_args.config_path,
                     "Run configuration (JSON)");
  detect->callback([&] { run_detect(detect_args); });

  SimulateArgs sim_args;
  auto* simulate =
      app.add_subcommand("simulate", "Run noisy pick-and-place trials");
  simulate->add_option("--trials", sim_args.trials, "Number of trials");
  simulate->add_option("--objects", sim_args.objects,
                       "Objects per trial (multiple of 3)");
  simulate->add_option("--seed", sim_args.seed,
                       "Base seed; trial i uses seed + i");
  auto* noise_std_opt = simulate->add_option(
      "--noise-std", sim_args.noise_std, "Joint noise std dev in degrees");
  auto* noise_quant_opt =
      simulate->add_option("--noise-quant", sim_args.noise_quant,
                           "Servo quantization step in degrees");
  auto* scene_opt = simulate->add_option(
      "--scene", sim_args.scene_path, "Fixed scene JSON reused by every trial");
  simulate
      ->add_flag("--sample-scene", sim_args.sample_scene,
                 "Reuse the bundled demonstration scene")
      ->excludes(scene_opt);
  simulate->add_option("--parallel", sim_args.parallel, "Worker threads");
  simulate
      ->add_option("--limits", sim_args.limits_profile, "Joint limit profile")
      ->check(CLI::IsMember({"strict", "extended"}));
  simulate->add_option("--out", sim_args.out_dir, "Output directory");
  simulate->add_option("--config", sim_args.config_path,
                       "Run configuration (JSON)");
  simulate->callback([&] {
    sim_args.has_noise_std = noise_std_opt->count() > 0;
    sim_args.has_noise_quant = noise_quant_opt->count() > 0;
    run_simulate(sim_args);
  });

  StatsArgs stats_args;
  auto* stats_cmd =
      app.add_subcommand("stats", "Summarise route CSVs and fit the errors");
  stats_cmd->add_option("--input", stats_args.inputs, "Route CSV files");
  stats_cmd->add_option("--dir", stats_args.dir,
                        "Read every .csv in this directory");
  stats_cmd->add_option("--bin-width", stats_args.bin_width,
                        "Histogram bin width in cm");
  auto* threshold_opt = stats_cmd->add_option(
      "--threshold", stats_args.threshold, "Success threshold in cm");
  stats_cmd->add_option("--out", stats_args.out_dir, "Output directory");
  stats_cmd->add_option("--config", stats_args.config_path,
                        "Run configuration (JSON)");
  stats_cmd->callback([&] {
    stats_args.has_threshold = threshold_opt->count() > 0;
    run_stats(stats_args);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const InvalidStartError& e) {
    std::cerr << "sortarm: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "sortarm: " << e.what() << '\n';
    return 2;
  } catch (const WorkspaceViolationError& e) {
    std::cerr << "sortarm: " << e.what() << '\n';
    return 3;
  } catch (const IoError& e) {
    std::cerr << "sortarm: " << e.what() << '\n';
    return 4;
  } catch (const InsufficientDataError& e) {
    std::cerr << "sortarm: " << e.what() << '\n';
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "sortarm: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
