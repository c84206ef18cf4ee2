#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "sortarm/ik.hpp"
#include "sortarm/sim.hpp"
#include "sortarm/stats.hpp"
#include "sortarm/vision.hpp"

namespace sortarm::io {

/// Fixed four-decimal rendering shared by the CSV artifacts and the CLI;
/// "-0.0000" is normalised to "0.0000".
std::string fmt4(double value);

// ---------------------------------------------------------------- images --

/// Reads a binary PPM (P6, maxval 255). Throws IoError on malformed input.
vision::RasterImage read_ppm(std::istream& in);
vision::RasterImage read_ppm(const std::filesystem::path& path);

void write_ppm(const vision::RasterImage& image, std::ostream& out);
void write_ppm(const vision::RasterImage& image,
               const std::filesystem::path& path);

// ---------------------------------------------------------------- scenes --

/// Scene JSON: {"objects": [{"color": "red", "x": -10.99, "y": 49.70}, ...]}
vision::Scene load_scene(std::istream& in);
vision::Scene load_scene(const std::filesystem::path& path);
void save_scene(const vision::Scene& scene, std::ostream& out);
void save_scene(const vision::Scene& scene, const std::filesystem::path& path);

// ---------------------------------------------------------------- chains --

/// Chain JSON: {"rows": [{"theta": 0, "alpha": 90, "a": 3, "d": 17.5,
/// "type": "revolute"}, ...], "coupling": {"dependent": 3,
/// "coeffs": [0, -1, -1]}}. The coupling is optional.
kin::DhChain load_chain(std::istream& in);
kin::DhChain load_chain(const std::filesystem::path& path);
void save_chain(const kin::DhChain& chain, std::ostream& out);

// ------------------------------------------------------------------- CSV --

/// Columns: iter,theta1..thetaN,x,y,z,error (one row per iterate, the start
/// pose first). All values to 4 decimals.
void write_trace_csv(const ik::IkTrace& trace, std::ostream& out);

/// Columns: no,object,pixel_x,pixel_y,world_x,world_y with per-colour ids
/// (R1, R2, ... G1, ... B1, ...) following the detection order.
void write_detection_csv(const std::vector<vision::DetectedObject>& objects,
                         std::ostream& out);

/// Columns: no,object,step,total,initial,final,target_x,target_y,target_z,
/// ee_x,ee_y,ee_z,noisy_x,noisy_y,noisy_z,converged,success,skipped.
void write_route_csv(const sim::TrialReport& report, std::ostream& out);
void write_route_csv(const sim::TrialReport& report,
                     const std::filesystem::path& path);

/// Parses a route CSV produced by write_route_csv. Throws IoError on header
/// or field mismatches.
std::vector<sim::RouteRecord> read_route_csv(std::istream& in);
std::vector<sim::RouteRecord> read_route_csv(const std::filesystem::path& path);

/// Columns: bin_center,density.
void write_histogram_csv(const stats::Histogram& hist, std::ostream& out);

/// Noisy-minus-target error samples of the executed (non-skipped) routes.
std::vector<stats::ErrorSample> route_error_samples(
    const std::vector<sim::RouteRecord>& routes);

// ------------------------------------------------------------------ JSON --

/// Per-field summary in a fixed key order; numbers rounded to 4 decimals.
std::string summary_json(const stats::ErrorSummary& summary);

/// Weibull fit parameters plus an optional success-probability block.
std::string fit_json(const stats::WeibullFit& fit,
                     const stats::SuccessEstimate* estimate = nullptr,
                     double threshold = 1.2);

/// Combined aggregates of a multi-trial run.
std::string aggregate_json(const sim::MultiTrialReport& report);

// ---------------------------------------------------------------- config --

/// Run-wide configuration with library defaults; every field can be
/// overridden from a JSON config file.
struct RunConfig {
  kin::DhChain chain = kin::sorting_arm_chain();
  ik::PdGains gains{};
  std::string limits_profile = "extended";  ///< "strict" | "extended" | "custom"
  ik::JointLimits limits = ik::extended_limits();
  ik::WorkspaceBox box{};
  double tol = 0.032;
  int max_iter = 200;
  vision::Calibration calibration{};
  vision::ColorRules rules{};
  sim::NoiseModel noise{};
  sim::SortingScenario scenario{};
  double success_threshold = 1.2;
  std::filesystem::path out_dir = ".";
};

/// Applies the named limit profile ("strict" or "extended") to a config.
void set_limits_profile(RunConfig& config, const std::string& profile);

/// Loads a JSON config; keys present override defaults, absent keys keep
/// them. Throws IoError on unreadable files or malformed values.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in);

/// sim::RunOptions view of a config (chain, gains, limits, box, tolerances,
/// calibration).
sim::RunOptions run_options(const RunConfig& config);

}  // namespace sortarm::io
