#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sortarm/errors.hpp"
#include "sortarm/types.hpp"

namespace sortarm::vision {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
};

/// Row-major 8-bit RGB image.
struct RasterImage {
  int width = 0, height = 0;
  std::vector<Rgb> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, Rgb fill = Rgb{})
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Rgb& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgb& at(int x, int y) const {
    return pixels[static_cast<std::size_t>(y) * width + x];
  }
};

/// Hue in [0, 360) degrees (0 for achromatic pixels), saturation and value
/// in [0, 1].
struct Hsv {
  double h = 0.0, s = 0.0, v = 0.0;
};

/// Hexcone RGB -> HSV conversion.
Hsv rgb_to_hsv(const Rgb& rgb);

enum class ColorClass { Red, Green, Blue };

std::string to_string(ColorClass c);
/// Parses "red" / "green" / "blue" (case-insensitive); throws IoError.
ColorClass color_from_string(const std::string& name);

/// Inclusive hue interval in degrees.
struct HueBand {
  double lo = 0.0, hi = 0.0;
  bool contains(double h) const { return h >= lo && h <= hi; }
};

/// Classification thresholds: a pixel must clear the saturation and value
/// gates, then fall into one of a class's hue bands.
struct ColorRules {
  double s_min = 0.1;
  double v_min = 0.1;
  std::vector<HueBand> red = {{0.0, 20.0}, {280.0, 360.0}};
  std::vector<HueBand> green = {{130.0, 160.0}};
  std::vector<HueBand> blue = {{90.0, 120.0}};

  const std::vector<HueBand>& bands(ColorClass c) const;
};

/// Classifies one pixel; std::nullopt when no class matches.
std::optional<ColorClass> classify_pixel(const Hsv& hsv, const ColorRules& rules);

/// Row-major binary mask (0 or 1 per pixel).
struct Mask {
  int width = 0, height = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}

  std::uint8_t at(int x, int y) const {
    return data[static_cast<std::size_t>(y) * width + x];
  }
  void set(int x, int y, std::uint8_t v) {
    data[static_cast<std::size_t>(y) * width + x] = v;
  }
};

/// 3x3 binary median filter with edge replication (border samples clamp to
/// the nearest valid pixel).
Mask median_filter_3x3(const Mask& mask);

/// Connected region of a mask. The centroid is the mean of the member pixel
/// coordinates (pixels sit at integer positions).
struct Component {
  double area = 0.0;
  Vec2 centroid = Vec2::Zero();
};

/// 4-connected components with at least `min_size` pixels, in row-major
/// discovery order.
std::vector<Component> connected_components(const Mask& mask, int min_size);

enum class CalibrationModel { Proportional, Affine };

/// Pixel <-> table mapping. Proportional scales raw pixel coordinates by
/// field size over image size; Affine scales about the image centre with an
/// optional y flip (image y grows downwards, table y away from the base).
struct Calibration {
  CalibrationModel model = CalibrationModel::Affine;
  int image_width = 640, image_height = 480;
  // Proportional parameters: table field of view in cm.
  double field_width = 50.0, field_height = 37.5;
  // Affine parameters.
  double sx = 0.0625, sy = 0.0625;  ///< cm per pixel
  double cx = -0.5025, cy = 44.0;   ///< table point under the image centre
  bool flip_y = true;

  /// Pixel coordinates -> table cm.
  Vec2 project(const Vec2& pixel) const;
  /// Table cm -> pixel coordinates.
  Vec2 unproject(const Vec2& world) const;

  static Calibration proportional();
};

/// Least-squares fit of the Affine model from (pixel, world) pairs.
/// Requires at least 2 pairs with distinct x and y pixel coordinates.
Calibration fit_affine(const std::vector<std::pair<Vec2, Vec2>>& pairs,
                       int image_width = 640, int image_height = 480);

struct DetectedObject {
  ColorClass color = ColorClass::Red;
  Vec2 pixel = Vec2::Zero();  ///< centroid in image coordinates
  double area = 0.0;          ///< component size in pixels
  Vec2 world = Vec2::Zero();  ///< centroid mapped onto the table, cm
};

/// Full pipeline: classify every pixel, median-filter each class mask, take
/// 4-connected components of at least `min_size` pixels, and map centroids
/// through the calibration. Results are ordered by class (Red < Green <
/// Blue), then centroid y, then centroid x.
std::vector<DetectedObject> detect_objects(const RasterImage& image,
                                           const ColorRules& rules,
                                           const Calibration& cal,
                                           int min_size = 100);

/// Ground-truth object on the table.
struct SceneObject {
  ColorClass color = ColorClass::Red;
  Vec2 world = Vec2::Zero();  ///< cm
};

struct Scene {
  std::vector<SceneObject> objects;
};

/// Rasterises a scene as filled discs on a black background, using class
/// colours whose hues sit inside the default detection bands.
RasterImage render_scene(const Scene& scene, const Calibration& cal,
                         double radius_px = 16.0);

/// Uniformly places `per_color` objects of each class (Red first, then
/// Green, then Blue) with x in [-12, 12], y in [40, 55] and at least
/// `min_dist` cm between centres.
Scene random_scene(std::mt19937_64& rng, int per_color = 4,
                   double min_dist = 3.0);

/// Bundled 12-object demonstration layout (4 red, 4 green, 4 blue) as
/// measured by the detection stage in a reference sorting run.
Scene sample_scene();

/// The (pixel, table) centroid pairs behind sample_scene(), usable as
/// fit_affine input.
std::vector<std::pair<Vec2, Vec2>> sample_calibration_pairs();

}  // namespace sortarm::vision
