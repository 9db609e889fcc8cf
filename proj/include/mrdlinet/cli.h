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

#ifndef MRDLINET_CLI_H_
#define MRDLINET_CLI_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "json.hpp"
#include "mrdlinet/architecture.h"
#include "mrdlinet/augment.h"
#include "mrdlinet/synth.h"
#include "mrdlinet/trainer.h"

namespace mrdlinet {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numeric or internal failure
inline constexpr int kExitConfig = 2;   // bad flags, config, or input content
inline constexpr int kExitIo = 3;       // unreadable or unwritable paths

// Everything a subcommand can be configured with. Resolution order is
// built-in default, then the --config file, then command-line flags. The
// single `seed` drives every random stream; train.seed and synth.seed always
// equal it after resolution.
struct RunConfig {
  uint64_t seed = 7;
  ArchitectureConfig model;
  TrainConfig train;
  AugmentationConfig augmentation;
  double unlearn_fraction = 0.05;
  SynthConfig synth;

  void validate() const;
};

// {seed, model, train, augmentation, unlearn{fraction}, synth{...}}.
nlohmann::json to_json(const RunConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& json);
RunConfig read_run_config(const std::filesystem::path& path);

// Parses and runs one subcommand; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mrdlinet

#endif  // MRDLINET_CLI_H_
