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

#include "mrdlinet/synth.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fmt/format.h"
#include "mrdlinet/error.h"
#include "mrdlinet/rng.h"

namespace mrdlinet {

void SynthConfig::validate() const {
  if (n_train < 2 || n_test < 2) throw ConfigError("synth: n_train and n_test must be >= 2");
  if (image_size < 2) throw ConfigError("synth: image_size must be >= 2");
  if (!(class_balance > 0 && class_balance < 1)) {
    throw ConfigError("synth: class_balance must lie in (0, 1)");
  }
  if (!(color_margin >= 0 && color_margin <= 100)) {
    throw ConfigError("synth: color_margin must lie in [0, 100]");
  }
}

std::vector<Label> synth_labels(int n, double class_balance, uint64_t seed) {
  const int stressed = static_cast<int>(std::lround(class_balance * n));
  std::vector<Label> labels(n, Label::kHealthy);
  std::fill_n(labels.begin(), stressed, Label::kStressed);
  Rng rng(derive_seed(seed, "synth-labels"));
  for (size_t i = labels.size(); i > 1; --i) std::swap(labels[i - 1], labels[rng.below(i)]);
  return labels;
}

Image synth_patch(Label label, int size, double color_margin, uint64_t seed) {
  Rng rng(seed);
  // Base colours: healthy is green, stressed yellow. Green sits
  // `color_margin` lower for stressed patches.
  const double healthy_g = 150.0 + color_margin / 2;
  double base[3];
  if (label == Label::kHealthy) {
    base[0] = 70;
    base[1] = healthy_g;
    base[2] = 55;
  } else {
    base[0] = 190;
    base[1] = healthy_g - color_margin;
    base[2] = 50;
  }
  for (double& b : base) b += rng.uniform(-12, 12);

  // Low-frequency canopy texture plus pixel noise.
  const double fx = rng.uniform(0.5, 3.0), fy = rng.uniform(0.5, 3.0);
  const double phase_x = rng.uniform(0, 2 * std::numbers::pi);
  const double phase_y = rng.uniform(0, 2 * std::numbers::pi);
  const double amplitude = rng.uniform(8, 20);
  Image image(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double wave =
          amplitude * std::sin(2 * std::numbers::pi * fx * x / size + phase_x) *
          std::cos(2 * std::numbers::pi * fy * y / size + phase_y);
      for (int c = 0; c < 3; ++c) {
        const double v = base[c] + wave * (c == 2 ? 0.3 : 1.0) + rng.uniform(-20, 20);
        image.at(y, x, c) = static_cast<uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return image;
}

std::vector<Sample> synth_samples(const SynthConfig& config, Split split) {
  config.validate();
  const int n = split == Split::kTrain ? config.n_train : config.n_test;
  const uint64_t split_seed = derive_seed(config.seed, split_name(split));
  const std::vector<Label> labels = synth_labels(n, config.class_balance, split_seed);
  std::vector<Sample> samples;
  samples.reserve(n);
  for (int i = 0; i < n; ++i) {
    samples.push_back({fmt::format("synth-{}-{:05d}", split_name(split), i), labels[i],
                       synth_patch(labels[i], config.image_size, config.color_margin,
                                   derive_seed(split_seed, "patch", i))});
  }
  return samples;
}

DatasetManifest synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  DatasetManifest manifest;
  manifest.seed = config.seed;
  std::error_code ec;
  for (Split split : {Split::kTrain, Split::kTest}) {
    const std::filesystem::path rel = std::filesystem::path("patches") / split_name(split);
    std::filesystem::create_directories(out_dir / rel, ec);
    if (ec) {
      throw IoError(fmt::format("cannot create {}: {}", (out_dir / rel).string(), ec.message()));
    }
    for (const Sample& s : synth_samples(config, split)) {
      const std::filesystem::path file = rel / (s.id + ".png");
      write_png(s.patch, out_dir / file);
      manifest.entries.push_back({s.id, file.generic_string(), s.label, split});
    }
  }
  write_manifest(manifest, out_dir / "manifest.csv");
  return manifest;
}

}  // namespace mrdlinet
