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

#ifndef MRDLINET_AUGMENT_H_
#define MRDLINET_AUGMENT_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrdlinet/image.h"
#include "mrdlinet/rng.h"

namespace mrdlinet {

enum class FillMode { kNearest };

// Defaults are the reference augmentation settings. Zoom is not one of
// them and stays disabled unless set.
struct AugmentationConfig {
  double rescale = 1.0 / 255.0;
  double rotation_range = 30.0;  // degrees
  double width_shift_range = 0.2;  // fraction of width
  double height_shift_range = 0.2;  // fraction of height
  double shear_range = 0.2;  // dimensionless shear coefficient
  double zoom_range = 0.0;
  bool horizontal_flip = true;
  bool vertical_flip = true;
  FillMode fill_mode = FillMode::kNearest;

  void validate() const;
  // Geometry disabled: rescale only.
  static AugmentationConfig rescale_only();

  bool operator==(const AugmentationConfig&) const = default;
};

nlohmann::json to_json(const AugmentationConfig& config);
AugmentationConfig augmentation_from_json(const nlohmann::json& json,
                                          AugmentationConfig base = {});

// One random draw of the affine parameters.
struct AffineDraw {
  double rotation_degrees = 0;
  double shift_x = 0;  // pixels
  double shift_y = 0;
  double shear = 0;
  double zoom = 1;
  bool flip_horizontal = false;
  bool flip_vertical = false;
};

AffineDraw draw_augmentation(const AugmentationConfig& config, int height, int width,
                             Rng& rng);

// Applies shear -> rotation -> zoom -> shift -> flips about the patch centre
// by inverse mapping with nearest-neighbour sampling; out-of-bounds
// coordinates take the nearest edge pixel. Returns HWC floats scaled by
// `rescale`.
std::vector<float> apply_augmentation(const Image& image, const AffineDraw& draw,
                                      double rescale);

std::vector<float> augment(const Image& image, const AugmentationConfig& config, Rng& rng);

// Rescale only, no geometry: the evaluation / scoring preprocessing.
std::vector<float> rescale_image(const Image& image, double rescale = 1.0 / 255.0);

// Per-sample augmentation seed, independent of batch composition and of
// the thread that processes the sample.
uint64_t augmentation_seed(uint64_t seed, std::string_view sample_id, int epoch);

}  // namespace mrdlinet

#endif  // MRDLINET_AUGMENT_H_
