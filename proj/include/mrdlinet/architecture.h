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

#ifndef MRDLINET_ARCHITECTURE_H_
#define MRDLINET_ARCHITECTURE_H_

#include <vector>

#include "json.hpp"

namespace mrdlinet {

struct BottleneckSpec {
  int filters = 16;
  int expansion_factor = 1;
  int stride = 1;

  bool operator==(const BottleneckSpec&) const = default;
};

struct DenseBlockSpec {
  int num_layers = 4;
  int growth_rate = 32;

  bool operator==(const DenseBlockSpec&) const = default;
};

// Declarative description of the network. The defaults give the reference
// layer sequence: stem -> four bottlenecks -> dense block -> transition ->
// bottleneck -> GAP -> Dense(128) -> Dense(1).
//
// `scale_factor` shrinks every filter, growth and unit count (floor, min 1)
// for desk-scale experiments; expansion factors, strides and layer counts
// are left alone.
struct ArchitectureConfig {
  int input_height = 224;
  int input_width = 224;
  // 32 by default; 36 is the other commonly listed stem width.
  int stem_filters = 32;
  std::vector<BottleneckSpec> pre_dense = {{16, 1, 1}, {24, 6, 2}, {24, 6, 1}, {32, 6, 2}};
  DenseBlockSpec dense_block;
  double transition_reduction = 0.5;
  std::vector<BottleneckSpec> post_transition = {{32, 6, 1}};
  int head_units = 128;
  double scale_factor = 1.0;
  // Running-statistics momentum of every batch-norm layer. Short runs need
  // a smaller value for the inference statistics to converge.
  double batch_norm_momentum = 0.99;

  static constexpr int kInputChannels = 3;

  // Throws ConfigError on out-of-range values.
  void validate() const;

  // floor(count * scale_factor), at least 1.
  int scaled(int count) const;

  bool operator==(const ArchitectureConfig&) const = default;
};

// Channels after floor(reduction * channels); throws ConfigError when zero.
int transition_channels(int in_channels, double reduction);

nlohmann::json to_json(const ArchitectureConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ArchitectureConfig architecture_from_json(const nlohmann::json& json);

}  // namespace mrdlinet

#endif  // MRDLINET_ARCHITECTURE_H_
