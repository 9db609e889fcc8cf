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

#include "mrdlinet/architecture.h"

#include <cmath>
#include <set>
#include <string>

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {
namespace {

void validate_spec(const BottleneckSpec& spec, const char* where) {
  if (spec.filters < 1 || spec.expansion_factor < 1) {
    throw ConfigError(fmt::format("{}: filters and expansion_factor must be >= 1", where));
  }
  if (spec.stride != 1 && spec.stride != 2) {
    throw ConfigError(fmt::format("{}: stride must be 1 or 2, got {}", where, spec.stride));
  }
}

nlohmann::json spec_to_json(const BottleneckSpec& spec) {
  return {{"filters", spec.filters},
          {"expansion_factor", spec.expansion_factor},
          {"stride", spec.stride}};
}

void reject_unknown(const nlohmann::json& json, const std::set<std::string>& known,
                    const char* where) {
  for (const auto& [key, _] : json.items()) {
    if (!known.contains(key)) {
      throw ConfigError(fmt::format("{}: unknown key '{}'", where, key));
    }
  }
}

BottleneckSpec spec_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw ConfigError("bottleneck spec must be an object");
  reject_unknown(json, {"filters", "expansion_factor", "stride"}, "bottleneck spec");
  BottleneckSpec spec;
  spec.filters = json.value("filters", spec.filters);
  spec.expansion_factor = json.value("expansion_factor", spec.expansion_factor);
  spec.stride = json.value("stride", spec.stride);
  return spec;
}

std::vector<BottleneckSpec> specs_from_json(const nlohmann::json& json) {
  if (!json.is_array()) throw ConfigError("bottleneck list must be an array");
  std::vector<BottleneckSpec> specs;
  for (const auto& item : json) specs.push_back(spec_from_json(item));
  return specs;
}

}  // namespace

void ArchitectureConfig::validate() const {
  if (input_height < 1 || input_width < 1) throw ConfigError("input size must be positive");
  if (stem_filters < 1) throw ConfigError("stem_filters must be >= 1");
  if (!(batch_norm_momentum >= 0 && batch_norm_momentum < 1)) {
    throw ConfigError("batch_norm_momentum must lie in [0, 1)");
  }
  if (!(scale_factor > 0) || !std::isfinite(scale_factor)) {
    throw ConfigError("scale_factor must be positive");
  }
  if (!(transition_reduction > 0 && transition_reduction <= 1)) {
    throw ConfigError(fmt::format("transition_reduction must lie in (0, 1], got {}",
                                  transition_reduction));
  }
  for (const auto& s : pre_dense) validate_spec(s, "pre_dense");
  for (const auto& s : post_transition) validate_spec(s, "post_transition");
  if (dense_block.num_layers < 0) throw ConfigError("dense_block.num_layers must be >= 0");
  if (dense_block.growth_rate < 1) throw ConfigError("dense_block.growth_rate must be >= 1");
  if (head_units < 1) throw ConfigError("head_units must be >= 1");
}

int ArchitectureConfig::scaled(int count) const {
  const double v = std::floor(static_cast<double>(count) * scale_factor + 1e-9);
  return std::max(1, static_cast<int>(v));
}

int transition_channels(int in_channels, double reduction) {
  const int out = static_cast<int>(std::floor(reduction * in_channels + 1e-9));
  if (out < 1) {
    throw ConfigError(fmt::format(
        "transition reduction {} leaves no channels out of {}", reduction, in_channels));
  }
  return out;
}

nlohmann::json to_json(const ArchitectureConfig& config) {
  nlohmann::json pre = nlohmann::json::array();
  for (const auto& s : config.pre_dense) pre.push_back(spec_to_json(s));
  nlohmann::json post = nlohmann::json::array();
  for (const auto& s : config.post_transition) post.push_back(spec_to_json(s));
  return {{"input_size", {config.input_height, config.input_width}},
          {"stem_filters", config.stem_filters},
          {"pre_dense", pre},
          {"dense_block",
           {{"num_layers", config.dense_block.num_layers},
            {"growth_rate", config.dense_block.growth_rate}}},
          {"transition_reduction", config.transition_reduction},
          {"post_transition", post},
          {"head_units", config.head_units},
          {"scale_factor", config.scale_factor},
          {"batch_norm_momentum", config.batch_norm_momentum}};
}

ArchitectureConfig architecture_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw ConfigError("architecture config must be a JSON object");
  reject_unknown(json,
                 {"input_size", "stem_filters", "pre_dense", "dense_block",
                  "transition_reduction", "post_transition", "head_units", "scale_factor",
                  "batch_norm_momentum"},
                 "architecture config");
  ArchitectureConfig c;
  try {
    if (json.contains("input_size")) {
      const auto& size = json.at("input_size");
      if (!size.is_array() || size.size() != 2) {
        throw ConfigError("input_size must be [height, width]");
      }
      c.input_height = size[0].get<int>();
      c.input_width = size[1].get<int>();
    }
    c.stem_filters = json.value("stem_filters", c.stem_filters);
    if (json.contains("pre_dense")) c.pre_dense = specs_from_json(json.at("pre_dense"));
    if (json.contains("post_transition")) {
      c.post_transition = specs_from_json(json.at("post_transition"));
    }
    if (json.contains("dense_block")) {
      const auto& db = json.at("dense_block");
      reject_unknown(db, {"num_layers", "growth_rate"}, "dense_block");
      c.dense_block.num_layers = db.value("num_layers", c.dense_block.num_layers);
      c.dense_block.growth_rate = db.value("growth_rate", c.dense_block.growth_rate);
    }
    c.transition_reduction = json.value("transition_reduction", c.transition_reduction);
    c.head_units = json.value("head_units", c.head_units);
    c.scale_factor = json.value("scale_factor", c.scale_factor);
    c.batch_norm_momentum = json.value("batch_norm_momentum", c.batch_norm_momentum);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("architecture config: {}", e.what()));
  }
  c.validate();
  return c;
}

}  // namespace mrdlinet
