#include "sortarm/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include "json.hpp"

namespace sortarm::io {
namespace {

using nlohmann::json;

/// Rounds to four decimals for JSON output, normalising negative zero.
double r4(double v) {
  double r = std::round(v * 1e4) / 1e4;
  if (r == 0.0) r = 0.0;
  return r;
}

json parse_json(std::istream& in, const std::string& what) {
  try {
    return json::parse(in, nullptr, /*allow_exceptions=*/true,
                       /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& field, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw IoError("route csv: bad number '" + field + "' on line " +
                  std::to_string(lineno));
  }
}

int parse_int(const std::string& field, std::size_t lineno) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    throw IoError("route csv: bad integer '" + field + "' on line " +
                  std::to_string(lineno));
  }
}

}  // namespace

std::string fmt4(double value) {
  double r = value;
  if (std::abs(r) < 0.5e-4) r = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", r);
  return buf;
}

// ---------------------------------------------------------------- images --

namespace {

int next_pnm_int(std::istream& in, const char* what) {
  int c = in.peek();
  while (c != std::char_traits<char>::eof()) {
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
    c = in.peek();
  }
  int value = 0;
  if (!(in >> value)) throw IoError(std::string("ppm: missing ") + what);
  return value;
}

}  // namespace

vision::RasterImage read_ppm(std::istream& in) {
  std::string magic;
  in >> magic;
  if (magic != "P6") throw IoError("ppm: expected binary magic P6");
  const int width = next_pnm_int(in, "width");
  const int height = next_pnm_int(in, "height");
  const int maxval = next_pnm_int(in, "maxval");
  if (width <= 0 || height <= 0 || width > 32768 || height > 32768)
    throw IoError("ppm: bad dimensions " + std::to_string(width) + "x" +
                  std::to_string(height));
  if (maxval != 255) throw IoError("ppm: only maxval 255 is supported");
  in.get();  // the single whitespace byte before the raster

  vision::RasterImage image(width, height);
  std::vector<char> raw(image.pixels.size() * 3);
  in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size()))
    throw IoError("ppm: truncated pixel data");
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    image.pixels[i] = {static_cast<std::uint8_t>(raw[3 * i]),
                       static_cast<std::uint8_t>(raw[3 * i + 1]),
                       static_cast<std::uint8_t>(raw[3 * i + 2])};
  }
  return image;
}

vision::RasterImage read_ppm(const std::filesystem::path& path) {
  auto in = open_input(path, /*binary=*/true);
  return read_ppm(in);
}

void write_ppm(const vision::RasterImage& image, std::ostream& out) {
  if (image.width <= 0 || image.height <= 0)
    throw IoError("ppm: refusing to write an empty image");
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  for (const auto& px : image.pixels) {
    const char bytes[3] = {static_cast<char>(px.r), static_cast<char>(px.g),
                           static_cast<char>(px.b)};
    out.write(bytes, 3);
  }
  if (!out) throw IoError("ppm: write failed");
}

void write_ppm(const vision::RasterImage& image,
               const std::filesystem::path& path) {
  auto out = open_output(path, /*binary=*/true);
  write_ppm(image, out);
}

// ---------------------------------------------------------------- scenes --

vision::Scene load_scene(std::istream& in) {
  const json j = parse_json(in, "scene");
  try {
    vision::Scene scene;
    for (const auto& item : j.at("objects")) {
      vision::SceneObject obj;
      obj.color = vision::color_from_string(item.at("color").get<std::string>());
      obj.world = Vec2(item.at("x").get<double>(), item.at("y").get<double>());
      scene.objects.push_back(obj);
    }
    return scene;
  } catch (const json::exception& e) {
    throw IoError(std::string("scene: ") + e.what());
  }
}

vision::Scene load_scene(const std::filesystem::path& path) {
  auto in = open_input(path, /*binary=*/false);
  return load_scene(in);
}

void save_scene(const vision::Scene& scene, std::ostream& out) {
  json objects = json::array();
  for (const auto& obj : scene.objects) {
    objects.push_back({{"color", vision::to_string(obj.color)},
                       {"x", r4(obj.world.x())},
                       {"y", r4(obj.world.y())}});
  }
  out << json{{"objects", objects}}.dump(2) << '\n';
}

void save_scene(const vision::Scene& scene,
                const std::filesystem::path& path) {
  auto out = open_output(path, /*binary=*/false);
  save_scene(scene, out);
}

// ---------------------------------------------------------------- chains --

namespace {

kin::JointType joint_type_from_string(const std::string& name) {
  if (name == "revolute") return kin::JointType::Revolute;
  if (name == "prismatic") return kin::JointType::Prismatic;
  throw IoError("chain: unknown joint type '" + name + "'");
}

}  // namespace

kin::DhChain load_chain(std::istream& in) {
  const json j = parse_json(in, "chain");
  try {
    std::vector<kin::DhRow> rows;
    for (const auto& item : j.at("rows")) {
      kin::JointType type = kin::JointType::Revolute;
      if (item.contains("type"))
        type = joint_type_from_string(item.at("type").get<std::string>());
      rows.emplace_back(item.at("theta").get<double>(),
                        item.at("alpha").get<double>(),
                        item.at("a").get<double>(), item.at("d").get<double>(),
                        type);
    }
    std::optional<kin::Coupling> coupling;
    if (j.contains("coupling")) {
      kin::Coupling c;
      c.dependent = j.at("coupling").at("dependent").get<int>();
      c.coeffs = j.at("coupling").at("coeffs").get<std::vector<double>>();
      coupling = std::move(c);
    }
    return kin::DhChain(std::move(rows), std::move(coupling));
  } catch (const json::exception& e) {
    throw IoError(std::string("chain: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw IoError(std::string("chain: ") + e.what());
  }
}

kin::DhChain load_chain(const std::filesystem::path& path) {
  auto in = open_input(path, /*binary=*/false);
  return load_chain(in);
}

void save_chain(const kin::DhChain& chain, std::ostream& out) {
  json rows = json::array();
  for (const auto& row : chain.rows) {
    rows.push_back(
        {{"theta", row.theta_deg},
         {"alpha", row.alpha_deg},
         {"a", row.a},
         {"d", row.d},
         {"type",
          row.type == kin::JointType::Revolute ? "revolute" : "prismatic"}});
  }
  json j{{"rows", rows}};
  if (chain.coupling) {
    j["coupling"] = {{"dependent", chain.coupling->dependent},
                     {"coeffs", chain.coupling->coeffs}};
  }
  out << j.dump(2) << '\n';
}

// ------------------------------------------------------------------- CSV --

void write_trace_csv(const ik::IkTrace& trace, std::ostream& out) {
  const int joints =
      trace.iterates.empty() ? 0
                             : static_cast<int>(trace.iterates.front().full.size());
  out << "iter";
  for (int j = 0; j < joints; ++j) out << ",theta" << j + 1;
  out << ",x,y,z,error\n";
  for (std::size_t i = 0; i < trace.iterates.size(); ++i) {
    const auto& it = trace.iterates[i];
    out << i;
    for (int j = 0; j < joints; ++j) out << ',' << fmt4(it.full(j));
    out << ',' << fmt4(it.ee.x()) << ',' << fmt4(it.ee.y()) << ','
        << fmt4(it.ee.z()) << ',' << fmt4(it.error) << '\n';
  }
}

void write_detection_csv(const std::vector<vision::DetectedObject>& objects,
                         std::ostream& out) {
  out << "no,object,pixel_x,pixel_y,world_x,world_y\n";
  int counters[3] = {0, 0, 0};
  int no = 1;
  for (const auto& obj : objects) {
    const int c = static_cast<int>(obj.color);
    ++counters[c];
    out << no++ << ',' << "RGB"[c] << counters[c] << ',' << fmt4(obj.pixel.x())
        << ',' << fmt4(obj.pixel.y()) << ',' << fmt4(obj.world.x()) << ','
        << fmt4(obj.world.y()) << '\n';
  }
}

namespace {

constexpr const char* kRouteHeader =
    "no,object,step,total,initial,final,target_x,target_y,target_z,"
    "ee_x,ee_y,ee_z,noisy_x,noisy_y,noisy_z,converged,success,skipped";

const char* step_name(int step) { return step == 0 ? "pick" : "place"; }

int step_from_name(const std::string& name, std::size_t lineno) {
  if (name == "pick") return 0;
  if (name == "place") return 1;
  throw IoError("route csv: unknown step '" + name + "' on line " +
                std::to_string(lineno));
}

vision::ColorClass color_from_tag(const std::string& object_id,
                                  std::size_t lineno) {
  if (!object_id.empty()) {
    switch (object_id.front()) {
      case 'R': return vision::ColorClass::Red;
      case 'G': return vision::ColorClass::Green;
      case 'B': return vision::ColorClass::Blue;
      default: break;
    }
  }
  throw IoError("route csv: unknown object id '" + object_id + "' on line " +
                std::to_string(lineno));
}

}  // namespace

void write_route_csv(const sim::TrialReport& report, std::ostream& out) {
  out << kRouteHeader << '\n';
  int no = 1;
  for (const auto& r : report.routes) {
    out << no++ << ',' << r.object_id << ',' << step_name(r.step) << ','
        << r.iterations << ',' << fmt4(r.initial_error) << ','
        << fmt4(r.final_error) << ',' << fmt4(r.target.x()) << ','
        << fmt4(r.target.y()) << ',' << fmt4(r.target.z()) << ','
        << fmt4(r.ee.x()) << ',' << fmt4(r.ee.y()) << ',' << fmt4(r.ee.z())
        << ',' << fmt4(r.noisy_ee.x()) << ',' << fmt4(r.noisy_ee.y()) << ','
        << fmt4(r.noisy_ee.z()) << ',' << int(r.converged) << ','
        << int(r.success) << ',' << int(r.skipped) << '\n';
  }
}

void write_route_csv(const sim::TrialReport& report,
                     const std::filesystem::path& path) {
  auto out = open_output(path, /*binary=*/false);
  write_route_csv(report, out);
}

std::vector<sim::RouteRecord> read_route_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("route csv: empty stream");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kRouteHeader)
    throw IoError("route csv: unexpected header '" + line + "'");

  std::vector<sim::RouteRecord> records;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 18)
      throw IoError("route csv: expected 18 fields on line " +
                    std::to_string(lineno) + ", got " +
                    std::to_string(fields.size()));
    sim::RouteRecord r;
    r.object_id = fields[1];
    r.color = color_from_tag(r.object_id, lineno);
    r.step = step_from_name(fields[2], lineno);
    r.iterations = parse_int(fields[3], lineno);
    r.initial_error = parse_double(fields[4], lineno);
    r.final_error = parse_double(fields[5], lineno);
    r.target = Vec3(parse_double(fields[6], lineno),
                    parse_double(fields[7], lineno),
                    parse_double(fields[8], lineno));
    r.ee = Vec3(parse_double(fields[9], lineno),
                parse_double(fields[10], lineno),
                parse_double(fields[11], lineno));
    r.noisy_ee = Vec3(parse_double(fields[12], lineno),
                      parse_double(fields[13], lineno),
                      parse_double(fields[14], lineno));
    r.converged = parse_int(fields[15], lineno) != 0;
    r.success = parse_int(fields[16], lineno) != 0;
    r.skipped = parse_int(fields[17], lineno) != 0;
    r.noisy_error = (r.noisy_ee - r.target).norm();
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<sim::RouteRecord> read_route_csv(
    const std::filesystem::path& path) {
  auto in = open_input(path, /*binary=*/false);
  return read_route_csv(in);
}

void write_histogram_csv(const stats::Histogram& hist, std::ostream& out) {
  out << "bin_center,density\n";
  for (std::size_t bin = 0; bin < hist.density.size(); ++bin)
    out << fmt4(hist.center(bin)) << ',' << fmt4(hist.density[bin]) << '\n';
}

std::vector<stats::ErrorSample> route_error_samples(
    const std::vector<sim::RouteRecord>& routes) {
  std::vector<stats::ErrorSample> samples;
  samples.reserve(routes.size());
  for (const auto& r : routes) {
    if (r.skipped) continue;
    samples.push_back(stats::ErrorSample::from_delta(r.noisy_ee - r.target));
  }
  return samples;
}

// ------------------------------------------------------------------ JSON --

namespace {

json field_json(const stats::FieldSummary& f) {
  return {{"mean", r4(f.mean)},
          {"std", r4(f.std_dev)},
          {"max", r4(f.max)},
          {"min", r4(f.min)}};
}

}  // namespace

std::string summary_json(const stats::ErrorSummary& summary) {
  const json j{{"count", summary.count},
               {"x", field_json(summary.x)},
               {"y", field_json(summary.y)},
               {"z", field_json(summary.z)},
               {"euclid_xy", field_json(summary.euclid_xy)},
               {"euclid_xyz", field_json(summary.euclid_xyz)}};
  return j.dump(2) + "\n";
}

std::string fit_json(const stats::WeibullFit& fit,
                     const stats::SuccessEstimate* estimate,
                     double threshold) {
  json j{{"shape_k", r4(fit.shape)},
         {"scale_lambda", r4(fit.scale)},
         {"log_likelihood", r4(fit.log_likelihood)}};
  if (estimate) {
    j["success_probability"] = {{"threshold", r4(threshold)},
                                {"empirical", r4(estimate->empirical)},
                                {"weibull_cdf", r4(estimate->weibull_cdf)}};
  }
  return j.dump(2) + "\n";
}

std::string aggregate_json(const sim::MultiTrialReport& report) {
  const auto& c = report.combined;
  const json j{{"trials", report.trials.size()},
               {"routes", c.routes},
               {"converged", c.converged},
               {"skipped", c.skipped},
               {"successes", c.successes},
               {"success_rate", r4(c.success_rate)},
               {"mean_iterations", r4(c.mean_iterations)},
               {"mean_initial_error", r4(c.mean_initial_error)},
               {"mean_final_error", r4(c.mean_final_error)},
               {"mean_euclid_xyz", r4(c.mean_euclid_xyz)}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------- config --

void set_limits_profile(RunConfig& config, const std::string& profile) {
  if (profile == "strict") {
    config.limits = ik::strict_limits();
  } else if (profile == "extended") {
    config.limits = ik::extended_limits();
  } else {
    throw std::invalid_argument("unknown limits profile '" + profile +
                                "' (expected strict or extended)");
  }
  config.limits_profile = profile;
}

namespace {

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3)
    throw IoError("config: expected a 3-element array");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

std::vector<vision::HueBand> bands_from_json(const json& j) {
  std::vector<vision::HueBand> bands;
  for (const auto& pair : j) {
    if (!pair.is_array() || pair.size() != 2)
      throw IoError("config: hue bands must be [lo, hi] pairs");
    bands.push_back({pair[0].get<double>(), pair[1].get<double>()});
  }
  return bands;
}

void apply_calibration(vision::Calibration& cal, const json& j) {
  if (j.contains("model")) {
    const auto model = j.at("model").get<std::string>();
    if (model == "affine") {
      cal.model = vision::CalibrationModel::Affine;
    } else if (model == "proportional") {
      cal = vision::Calibration::proportional();
    } else {
      throw IoError("config: unknown calibration model '" + model + "'");
    }
  }
  if (j.contains("image_width")) cal.image_width = j.at("image_width").get<int>();
  if (j.contains("image_height"))
    cal.image_height = j.at("image_height").get<int>();
  if (j.contains("field_width")) cal.field_width = j.at("field_width").get<double>();
  if (j.contains("field_height"))
    cal.field_height = j.at("field_height").get<double>();
  if (j.contains("sx")) cal.sx = j.at("sx").get<double>();
  if (j.contains("sy")) cal.sy = j.at("sy").get<double>();
  if (j.contains("cx")) cal.cx = j.at("cx").get<double>();
  if (j.contains("cy")) cal.cy = j.at("cy").get<double>();
  if (j.contains("flip_y")) cal.flip_y = j.at("flip_y").get<bool>();
}

void apply_scenario(sim::SortingScenario& scenario, const json& j) {
  if (j.contains("placements")) {
    const auto& p = j.at("placements");
    if (p.contains("red")) scenario.placements[0] = vec3_from_json(p.at("red"));
    if (p.contains("green"))
      scenario.placements[1] = vec3_from_json(p.at("green"));
    if (p.contains("blue"))
      scenario.placements[2] = vec3_from_json(p.at("blue"));
  }
  if (j.contains("initial_joints")) {
    const auto values = j.at("initial_joints").get<std::vector<double>>();
    scenario.initial_joints =
        Eigen::Map<const Eigen::VectorXd>(values.data(),
                                          static_cast<int>(values.size()));
  }
  if (j.contains("gripper")) {
    const auto& g = j.at("gripper");
    if (g.contains("a4")) scenario.gripper.a4 = g.at("a4").get<double>();
    if (g.contains("a5_xy")) scenario.gripper.a5_xy = g.at("a5_xy").get<double>();
    if (g.contains("a5_z")) scenario.gripper.a5_z = g.at("a5_z").get<double>();
    if (g.contains("theta5_initial"))
      scenario.gripper.theta5_initial = g.at("theta5_initial").get<double>();
    if (g.contains("theta5_final"))
      scenario.gripper.theta5_final = g.at("theta5_final").get<double>();
    if (g.contains("clearance"))
      scenario.gripper.clearance = g.at("clearance").get<double>();
  }
}

RunConfig config_from_json(const json& j, const std::filesystem::path& base) {
  RunConfig config;
  if (j.contains("chain")) {
    const auto& c = j.at("chain");
    if (c.is_string()) {
      auto path = std::filesystem::path(c.get<std::string>());
      if (path.is_relative()) path = base / path;
      config.chain = load_chain(path);
    } else {
      std::istringstream inline_chain(c.dump());
      config.chain = load_chain(inline_chain);
    }
  }
  if (j.contains("gains")) {
    const auto& g = j.at("gains");
    if (g.contains("kp")) config.gains.kp = g.at("kp").get<double>();
    if (g.contains("kd")) config.gains.kd = g.at("kd").get<double>();
  }
  if (j.contains("limits")) {
    const auto& l = j.at("limits");
    if (l.is_string()) {
      try {
        set_limits_profile(config, l.get<std::string>());
      } catch (const std::invalid_argument& e) {
        throw IoError(std::string("config: ") + e.what());
      }
    } else {
      ik::JointLimits limits;
      for (const auto& pair : l) {
        if (!pair.is_array() || pair.size() != 2)
          throw IoError("config: joint limits must be [min, max] pairs");
        limits.push_back(ik::JointLimit::canonical(pair[0].get<double>(),
                                                   pair[1].get<double>()));
      }
      config.limits = std::move(limits);
      config.limits_profile = "custom";
    }
  }
  if (j.contains("box")) {
    if (j.at("box").contains("lo")) config.box.lo = vec3_from_json(j.at("box").at("lo"));
    if (j.at("box").contains("hi")) config.box.hi = vec3_from_json(j.at("box").at("hi"));
  }
  if (j.contains("tol")) config.tol = j.at("tol").get<double>();
  if (j.contains("max_iter")) config.max_iter = j.at("max_iter").get<int>();
  if (j.contains("calibration")) apply_calibration(config.calibration, j.at("calibration"));
  if (j.contains("rules")) {
    const auto& r = j.at("rules");
    if (r.contains("s_min")) config.rules.s_min = r.at("s_min").get<double>();
    if (r.contains("v_min")) config.rules.v_min = r.at("v_min").get<double>();
    if (r.contains("red")) config.rules.red = bands_from_json(r.at("red"));
    if (r.contains("green")) config.rules.green = bands_from_json(r.at("green"));
    if (r.contains("blue")) config.rules.blue = bands_from_json(r.at("blue"));
  }
  if (j.contains("noise")) {
    const auto& n = j.at("noise");
    if (n.contains("std_dev")) config.noise.std_dev = n.at("std_dev").get<double>();
    if (n.contains("quant_step"))
      config.noise.quant_step = n.at("quant_step").get<double>();
    if (n.contains("seed")) config.noise.seed = n.at("seed").get<std::uint64_t>();
  }
  if (j.contains("scenario")) apply_scenario(config.scenario, j.at("scenario"));
  if (j.contains("success_threshold"))
    config.success_threshold = j.at("success_threshold").get<double>();
  if (j.contains("out_dir"))
    config.out_dir = j.at("out_dir").get<std::string>();
  return config;
}

}  // namespace

RunConfig load_config(const std::filesystem::path& path) {
  auto in = open_input(path, /*binary=*/false);
  const json j = parse_json(in, "config " + path.string());
  try {
    return config_from_json(j, path.parent_path());
  } catch (const json::exception& e) {
    throw IoError("config " + path.string() + ": " + e.what());
  }
}

RunConfig parse_config(std::istream& in) {
  const json j = parse_json(in, "config");
  try {
    return config_from_json(j, std::filesystem::current_path());
  } catch (const json::exception& e) {
    throw IoError(std::string("config: ") + e.what());
  }
}

sim::RunOptions run_options(const RunConfig& config) {
  sim::RunOptions opts;
  opts.chain = config.chain;
  opts.gains = config.gains;
  opts.limits = config.limits;
  opts.box = config.box;
  opts.tol = config.tol;
  opts.max_iter = config.max_iter;
  opts.success_threshold = config.success_threshold;
  opts.calibration = config.calibration;
  return opts;
}

}  // namespace sortarm::io
