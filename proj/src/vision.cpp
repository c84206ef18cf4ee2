#include "sortarm/vision.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <tuple>

namespace sortarm::vision {

Hsv rgb_to_hsv(const Rgb& rgb) {
  const double r = rgb.r / 255.0, g = rgb.g / 255.0, b = rgb.b / 255.0;
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  const double delta = maxc - minc;

  Hsv out;
  out.v = maxc;
  out.s = maxc > 0.0 ? delta / maxc : 0.0;
  if (delta <= 0.0) {
    out.h = 0.0;
    return out;
  }
  double h;
  if (maxc == r)
    h = 60.0 * ((g - b) / delta);
  else if (maxc == g)
    h = 60.0 * ((b - r) / delta + 2.0);
  else
    h = 60.0 * ((r - g) / delta + 4.0);
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  out.h = h;
  return out;
}

std::string to_string(ColorClass c) {
  switch (c) {
    case ColorClass::Red: return "red";
    case ColorClass::Green: return "green";
    case ColorClass::Blue: return "blue";
  }
  return "red";
}

ColorClass color_from_string(const std::string& name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (lower == "red") return ColorClass::Red;
  if (lower == "green") return ColorClass::Green;
  if (lower == "blue") return ColorClass::Blue;
  throw IoError("unknown colour class: " + name);
}

const std::vector<HueBand>& ColorRules::bands(ColorClass c) const {
  switch (c) {
    case ColorClass::Red: return red;
    case ColorClass::Green: return green;
    case ColorClass::Blue: return blue;
  }
  return red;
}

std::optional<ColorClass> classify_pixel(const Hsv& hsv, const ColorRules& rules) {
  if (hsv.s < rules.s_min || hsv.v < rules.v_min) return std::nullopt;
  for (ColorClass c : {ColorClass::Red, ColorClass::Green, ColorClass::Blue})
    for (const HueBand& band : rules.bands(c))
      if (band.contains(hsv.h)) return c;
  return std::nullopt;
}

Mask median_filter_3x3(const Mask& mask) {
  Mask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      int ones = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        const int sy = std::clamp(y + dy, 0, mask.height - 1);
        for (int dx = -1; dx <= 1; ++dx) {
          const int sx = std::clamp(x + dx, 0, mask.width - 1);
          ones += mask.at(sx, sy);
        }
      }
      out.set(x, y, ones >= 5 ? 1 : 0);
    }
  }
  return out;
}

std::vector<Component> connected_components(const Mask& mask, int min_size) {
  std::vector<Component> out;
  if (mask.width <= 0 || mask.height <= 0) return out;
  std::vector<std::uint8_t> visited(mask.data.size(), 0);
  std::vector<std::pair<int, int>> stack;

  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      const std::size_t idx = static_cast<std::size_t>(y) * mask.width + x;
      if (!mask.data[idx] || visited[idx]) continue;
      // Flood-fill one 4-connected region.
      long long count = 0, sum_x = 0, sum_y = 0;
      visited[idx] = 1;
      stack.emplace_back(x, y);
      while (!stack.empty()) {
        const auto [px, py] = stack.back();
        stack.pop_back();
        ++count;
        sum_x += px;
        sum_y += py;
        constexpr int kOffsets[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
        for (const auto& off : kOffsets) {
          const int nx = px + off[0], ny = py + off[1];
          if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
          const std::size_t nidx = static_cast<std::size_t>(ny) * mask.width + nx;
          if (!mask.data[nidx] || visited[nidx]) continue;
          visited[nidx] = 1;
          stack.emplace_back(nx, ny);
        }
      }
      if (count >= min_size) {
        Component comp;
        comp.area = static_cast<double>(count);
        comp.centroid = Vec2(static_cast<double>(sum_x) / count,
                             static_cast<double>(sum_y) / count);
        out.push_back(comp);
      }
    }
  }
  return out;
}

Vec2 Calibration::project(const Vec2& pixel) const {
  if (model == CalibrationModel::Proportional)
    return Vec2(field_width / image_width * pixel.x(),
                field_height / image_height * pixel.y());
  const double half_w = image_width / 2.0, half_h = image_height / 2.0;
  const double wx = sx * (pixel.x() - half_w) + cx;
  const double dy = sy * (pixel.y() - half_h);
  return Vec2(wx, (flip_y ? -dy : dy) + cy);
}

Vec2 Calibration::unproject(const Vec2& world) const {
  if (model == CalibrationModel::Proportional)
    return Vec2(image_width / field_width * world.x(),
                image_height / field_height * world.y());
  const double half_w = image_width / 2.0, half_h = image_height / 2.0;
  const double px = (world.x() - cx) / sx + half_w;
  const double dy = world.y() - cy;
  return Vec2(px, (flip_y ? -dy : dy) / sy + half_h);
}

Calibration Calibration::proportional() {
  Calibration cal;
  cal.model = CalibrationModel::Proportional;
  return cal;
}

Calibration fit_affine(const std::vector<std::pair<Vec2, Vec2>>& pairs,
                       int image_width, int image_height) {
  if (pairs.size() < 2)
    throw std::invalid_argument("fit_affine: needs at least 2 pairs");
  const double half_w = image_width / 2.0, half_h = image_height / 2.0;

  // Independent 1-D least squares per axis: world = slope * centred_pixel + c.
  auto fit_axis = [&](auto pick_pixel, auto pick_world, double centre) {
    double sum_u = 0, sum_w = 0, sum_uu = 0, sum_uw = 0;
    const double n = static_cast<double>(pairs.size());
    for (const auto& [pixel, world] : pairs) {
      const double u = pick_pixel(pixel) - centre;
      const double w = pick_world(world);
      sum_u += u;
      sum_w += w;
      sum_uu += u * u;
      sum_uw += u * w;
    }
    const double det = n * sum_uu - sum_u * sum_u;
    if (std::abs(det) < 1e-12)
      throw std::invalid_argument("fit_affine: degenerate pixel coordinates");
    const double slope = (n * sum_uw - sum_u * sum_w) / det;
    const double intercept = (sum_w - slope * sum_u) / n;
    return std::pair<double, double>(slope, intercept);
  };

  const auto [slope_x, cx] = fit_axis([](const Vec2& p) { return p.x(); },
                                      [](const Vec2& w) { return w.x(); }, half_w);
  const auto [slope_y, cy] = fit_axis([](const Vec2& p) { return p.y(); },
                                      [](const Vec2& w) { return w.y(); }, half_h);

  Calibration cal;
  cal.model = CalibrationModel::Affine;
  cal.image_width = image_width;
  cal.image_height = image_height;
  cal.sx = slope_x;
  cal.flip_y = slope_y < 0.0;
  cal.sy = std::abs(slope_y);
  cal.cx = cx;
  cal.cy = cy;
  return cal;
}

std::vector<DetectedObject> detect_objects(const RasterImage& image,
                                           const ColorRules& rules,
                                           const Calibration& cal,
                                           int min_size) {
  std::vector<DetectedObject> out;
  for (ColorClass c : {ColorClass::Red, ColorClass::Green, ColorClass::Blue}) {
    Mask mask(image.width, image.height);
    for (int y = 0; y < image.height; ++y)
      for (int x = 0; x < image.width; ++x)
        if (classify_pixel(rgb_to_hsv(image.at(x, y)), rules) == c)
          mask.set(x, y, 1);
    const Mask filtered = median_filter_3x3(mask);
    for (const Component& comp : connected_components(filtered, min_size)) {
      DetectedObject obj;
      obj.color = c;
      obj.pixel = comp.centroid;
      obj.area = comp.area;
      obj.world = cal.project(comp.centroid);
      out.push_back(obj);
    }
  }
  std::sort(out.begin(), out.end(),
            [](const DetectedObject& a, const DetectedObject& b) {
              return std::make_tuple(static_cast<int>(a.color), a.pixel.y(),
                                     a.pixel.x()) <
                     std::make_tuple(static_cast<int>(b.color), b.pixel.y(),
                                     b.pixel.x());
            });
  return out;
}

namespace {

// Disc colours chosen so their hexcone hues land mid-band for the default
// detection rules (0, ~145, ~105 degrees).
Rgb class_color(ColorClass c) {
  switch (c) {
    case ColorClass::Red: return Rgb{255, 0, 0};
    case ColorClass::Green: return Rgb{0, 255, 106};
    case ColorClass::Blue: return Rgb{64, 255, 0};
  }
  return Rgb{255, 0, 0};
}

}  // namespace

RasterImage render_scene(const Scene& scene, const Calibration& cal,
                         double radius_px) {
  RasterImage img(cal.image_width, cal.image_height, Rgb{0, 0, 0});
  for (const SceneObject& obj : scene.objects) {
    const Vec2 centre = cal.unproject(obj.world);
    const Rgb color = class_color(obj.color);
    const int x0 = std::max(0, static_cast<int>(std::floor(centre.x() - radius_px)));
    const int x1 = std::min(img.width - 1,
                            static_cast<int>(std::ceil(centre.x() + radius_px)));
    const int y0 = std::max(0, static_cast<int>(std::floor(centre.y() - radius_px)));
    const int y1 = std::min(img.height - 1,
                            static_cast<int>(std::ceil(centre.y() + radius_px)));
    const double r2 = radius_px * radius_px;
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - centre.x(), dy = y - centre.y();
        if (dx * dx + dy * dy <= r2) img.at(x, y) = color;
      }
    }
  }
  return img;
}

Scene random_scene(std::mt19937_64& rng, int per_color, double min_dist) {
  std::uniform_real_distribution<double> ux(-12.0, 12.0);
  std::uniform_real_distribution<double> uy(40.0, 55.0);
  Scene scene;
  for (ColorClass c : {ColorClass::Red, ColorClass::Green, ColorClass::Blue}) {
    for (int i = 0; i < per_color; ++i) {
      bool placed = false;
      for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
        const Vec2 candidate(ux(rng), uy(rng));
        const bool clear = std::all_of(
            scene.objects.begin(), scene.objects.end(),
            [&](const SceneObject& o) {
              return (o.world - candidate).norm() >= min_dist;
            });
        if (clear) {
          scene.objects.push_back(SceneObject{c, candidate});
          placed = true;
        }
      }
      if (!placed)
        throw NumericError("random_scene: could not place an object without "
                           "violating the minimum spacing");
    }
  }
  return scene;
}

namespace {

struct SamplePoint {
  ColorClass color;
  double px, py;  // detected centroid, pixels
  double wx, wy;  // mapped table position, cm
};

// Detection results of one reference sorting run: 12 objects, 4 per class.
constexpr SamplePoint kSamplePoints[] = {
    {ColorClass::Red, 152.20, 148.73, -10.99, 49.70},
    {ColorClass::Red, 316.04, 84.49, -0.75, 53.72},
    {ColorClass::Red, 321.66, 271.90, -0.40, 42.01},
    {ColorClass::Red, 457.26, 196.63, 8.08, 46.71},
    {ColorClass::Green, 194.99, 83.06, -8.31, 53.81},
    {ColorClass::Green, 254.80, 182.75, -4.57, 47.58},
    {ColorClass::Green, 410.32, 89.99, 5.15, 53.38},
    {ColorClass::Green, 515.76, 257.85, 11.74, 42.88},
    {ColorClass::Blue, 166.68, 239.52, -10.08, 44.03},
    {ColorClass::Blue, 360.53, 166.94, 2.03, 48.57},
    {ColorClass::Blue, 438.88, 286.18, 6.93, 41.11},
    {ColorClass::Blue, 522.39, 114.16, 12.15, 51.86},
};

}  // namespace

Scene sample_scene() {
  Scene scene;
  for (const SamplePoint& p : kSamplePoints)
    scene.objects.push_back(SceneObject{p.color, Vec2(p.wx, p.wy)});
  return scene;
}

std::vector<std::pair<Vec2, Vec2>> sample_calibration_pairs() {
  std::vector<std::pair<Vec2, Vec2>> pairs;
  for (const SamplePoint& p : kSamplePoints)
    pairs.emplace_back(Vec2(p.px, p.py), Vec2(p.wx, p.wy));
  return pairs;
}

}  // namespace sortarm::vision
