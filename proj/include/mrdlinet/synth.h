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

#ifndef MRDLINET_SYNTH_H_
#define MRDLINET_SYNTH_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "mrdlinet/dataset.h"

namespace mrdlinet {

// Stand-in for the aerial crop windows: healthy patches are green-dominant
// textured noise, stressed patches yellow-dominant. The healthy class has a
// mean green channel `color_margin` above the stressed class, which keeps
// the task learnable from colour statistics alone.
struct SynthConfig {
  int n_train = 200;
  int n_test = 50;
  int image_size = 64;
  double class_balance = 0.5;  // fraction of stressed samples
  double color_margin = 40.0;
  uint64_t seed = 7;

  void validate() const;
};

// round(balance * n) stressed labels, shuffled deterministically.
std::vector<Label> synth_labels(int n, double class_balance, uint64_t seed);

Image synth_patch(Label label, int size, double color_margin, uint64_t seed);

// In-memory samples for one split.
std::vector<Sample> synth_samples(const SynthConfig& config, Split split);

// Writes patches/<split>/<id>.png and manifest.csv under `out_dir`; returns
// the manifest (paths relative to `out_dir`).
DatasetManifest synth_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace mrdlinet

#endif  // MRDLINET_SYNTH_H_
