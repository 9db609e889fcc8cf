/*
 * Copyright 2026 The MRD-LiNet Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "mrdlinet/augment.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {

void AugmentationConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(fmt::format("augmentation: {}", what));
  };
  require(rescale > 0 && std::isfinite(rescale), "rescale must be positive");
  require(rotation_range >= 0 && rotation_range <= 180, "rotation_range must lie in [0, 180]");
  require(width_shift_range >= 0 && width_shift_range < 1, "width_shift_range must lie in [0, 1)");
  require(height_shift_range >= 0 && height_shift_range < 1,
          "height_shift_range must lie in [0, 1)");
  require(shear_range >= 0 && shear_range < 1, "shear_range must lie in [0, 1)");
  require(zoom_range >= 0 && zoom_range < 1, "zoom_range must lie in [0, 1)");
}

AugmentationConfig AugmentationConfig::rescale_only() {
  AugmentationConfig c;
  c.rotation_range = 0;
  c.width_shift_range = 0;
  c.height_shift_range = 0;
  c.shear_range = 0;
  c.zoom_range = 0;
  c.horizontal_flip = false;
  c.vertical_flip = false;
  return c;
}

nlohmann::json to_json(const AugmentationConfig& c) {
  return {{"rescale", c.rescale},
          {"rotation_range", c.rotation_range},
          {"width_shift_range", c.width_shift_range},
          {"height_shift_range", c.height_shift_range},
          {"shear_range", c.shear_range},
          {"zoom_range", c.zoom_range},
          {"horizontal_flip", c.horizontal_flip},
          {"vertical_flip", c.vertical_flip},
          {"fill_mode", "nearest"}};
}

AugmentationConfig augmentation_from_json(const nlohmann::json& json,
                                          AugmentationConfig c) {
  if (!json.is_object()) throw ConfigError("augmentation config must be a JSON object");
  static const std::set<std::string> known = {
      "rescale",     "rotation_range", "width_shift_range", "height_shift_range",
      "shear_range", "zoom_range",     "horizontal_flip",   "vertical_flip",
      "fill_mode"};
  for (const auto& [key, _] : json.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("augmentation: unknown key '{}'", key));
  }
  try {
    c.rescale = json.value("rescale", c.rescale);
    c.rotation_range = json.value("rotation_range", c.rotation_range);
    c.width_shift_range = json.value("width_shift_range", c.width_shift_range);
    c.height_shift_range = json.value("height_shift_range", c.height_shift_range);
    c.shear_range = json.value("shear_range", c.shear_range);
    c.zoom_range = json.value("zoom_range", c.zoom_range);
    c.horizontal_flip = json.value("horizontal_flip", c.horizontal_flip);
    c.vertical_flip = json.value("vertical_flip", c.vertical_flip);
    if (json.value("fill_mode", std::string("nearest")) != "nearest") {
      throw ConfigError("augmentation: only fill_mode 'nearest' is supported");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("augmentation: {}", e.what()));
  }
  c.validate();
  return c;
}

AffineDraw draw_augmentation(const AugmentationConfig& config, int height, int width,
                             Rng& rng) {
  // Every parameter consumes a draw even when disabled so that the stream
  // position does not depend on the configuration.
  AffineDraw d;
  d.rotation_degrees = rng.uniform(-config.rotation_range, config.rotation_range);
  d.shift_x = rng.uniform(-config.width_shift_range, config.width_shift_range) * width;
  d.shift_y = rng.uniform(-config.height_shift_range, config.height_shift_range) * height;
  d.shear = rng.uniform(-config.shear_range, config.shear_range);
  d.zoom = rng.uniform(1.0 - config.zoom_range, 1.0 + config.zoom_range);
  const bool flip_h = rng.bernoulli(0.5);
  const bool flip_v = rng.bernoulli(0.5);
  d.flip_horizontal = config.horizontal_flip && flip_h;
  d.flip_vertical = config.vertical_flip && flip_v;
  return d;
}

std::vector<float> apply_augmentation(const Image& image, const AffineDraw& d,
                                      double rescale) {
  const int h = image.height, w = image.width;
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double theta = d.rotation_degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta), sin_t = std::sin(theta);
  std::vector<float> out(size_t(h) * w * Image::kChannels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      // Walk the forward chain backwards from output to source.
      double px = x - cx, py = y - cy;
      if (d.flip_horizontal) px = -px;
      if (d.flip_vertical) py = -py;
      px -= d.shift_x;
      py -= d.shift_y;
      px /= d.zoom;
      py /= d.zoom;
      const double rx = cos_t * px + sin_t * py;
      const double ry = -sin_t * px + cos_t * py;
      const double sx = rx - d.shear * ry;
      const double sy = ry;
      const int src_x = std::clamp(static_cast<int>(std::lround(sx + cx)), 0, w - 1);
      const int src_y = std::clamp(static_cast<int>(std::lround(sy + cy)), 0, h - 1);
      for (int c = 0; c < Image::kChannels; ++c) {
        out[(size_t(y) * w + x) * Image::kChannels + c] =
            static_cast<float>(image.at(src_y, src_x, c) * rescale);
      }
    }
  }
  return out;
}

std::vector<float> augment(const Image& image, const AugmentationConfig& config, Rng& rng) {
  return apply_augmentation(image, draw_augmentation(config, image.height, image.width, rng),
                            config.rescale);
}

std::vector<float> rescale_image(const Image& image, double rescale) {
  std::vector<float> out(image.pixels.size());
  for (size_t i = 0; i < out.size(); ++i) {
    out[i] = static_cast<float>(image.pixels[i] * rescale);
  }
  return out;
}

uint64_t augmentation_seed(uint64_t seed, std::string_view sample_id, int epoch) {
  return derive_seed(derive_seed(seed, "augment", static_cast<uint64_t>(epoch)), sample_id);
}

}  // namespace mrdlinet
