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

#ifndef MRDLINET_UNLEARNER_H_
#define MRDLINET_UNLEARNER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mrdlinet/augment.h"
#include "mrdlinet/classifier.h"
#include "mrdlinet/dataset.h"
#include "mrdlinet/model.h"
#include "mrdlinet/trainer.h"

namespace mrdlinet {

// Which gradient the influence score is taken from. Both differentiate the
// per-sample BCE loss.
enum class GradTarget { kParameters, kInput };

std::string_view grad_target_name(GradTarget target);
GradTarget parse_grad_target(std::string_view name);

// Gradient of the BCE loss of one sample, flattened. `input` is a batch of
// one. With kParameters the result concatenates dL/dtheta over trainable
// parameters in store order; with kInput it is dL/dx. The model runs with
// inference statistics, so the result does not depend on any other sample.
// Throws UninitializedStatisticsError for a model whose statistics were never
// populated and NumericError on a non-finite gradient.
template <typename T>
std::vector<T> sample_gradient(Classifier<T>& model, const Tensor<T>& input, Label label,
                               GradTarget target);

// Euclidean norm, accumulated in double.
template <typename T>
double influence_score(std::span<const T> flat_gradient);

struct InfluenceRecord {
  std::string sample_id;
  Label label = Label::kHealthy;
  double score = 0;
  GradTarget target = GradTarget::kParameters;
};

// One record per sample in input order. Each worker scores against its own
// clone of the model, so results match the serial run bit for bit. If any
// samples fail, every failure is collected into one error.
template <typename T>
std::vector<InfluenceRecord> score_dataset(const Classifier<T>& model,
                                           std::span<const Sample> samples, GradTarget target,
                                           int workers = 1);

// `sample_id,label,score` with 17 significant digits.
std::string format_scores(std::span<const InfluenceRecord> records);
void write_scores(std::span<const InfluenceRecord> records, const std::filesystem::path& path);
std::vector<InfluenceRecord> parse_scores_text(const std::string& text);
std::vector<InfluenceRecord> read_scores(const std::filesystem::path& path);

struct RemovalPlan {
  double fraction = 0.05;
  std::vector<std::string> removed_ids;   // ascending (score, id)
  std::vector<std::string> retained_ids;  // original order
  std::string score_file_hash;            // SHA-256 hex of the scores file
};

// Removes the floor(fraction * N) lowest-scoring samples, ties broken by
// sample id. A zero count yields an empty (valid) plan.
RemovalPlan select_removal(std::span<const InfluenceRecord> records, double fraction);

nlohmann::json to_json(const RemovalPlan& plan);
RemovalPlan removal_plan_from_json(const nlohmann::json& json);
void write_removal_plan(const RemovalPlan& plan, const std::filesystem::path& path);
RemovalPlan read_removal_plan(const std::filesystem::path& path);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

struct EpochAttestation {
  int epoch = 0;
  int64_t batches = 0;
  int64_t samples_seen = 0;
  int64_t removed_id_occurrences = 0;
};

struct RetrainAudit {
  std::vector<std::string> removed_ids;
  int64_t original_set_size = 0;
  int64_t retrain_set_size = 0;
  std::vector<EpochAttestation> epochs;

  int64_t total_violations() const;
};

nlohmann::json to_json(const RetrainAudit& audit);

struct RetrainResult {
  Model<float> model;
  TrainLog log;
  RetrainAudit audit;
};

// Trains a freshly initialised model (seeded from config.seed) on the
// samples whose ids are not in plan.removed_ids, recording every batch in
// the audit. Throws ValidationError when the plan names unknown ids.
RetrainResult unlearn_retrain(const ArchitectureConfig& architecture,
                              std::span<const Sample> samples, const RemovalPlan& plan,
                              const AugmentationConfig& augmentation, const TrainConfig& config);

}  // namespace mrdlinet

#endif  // MRDLINET_UNLEARNER_H_
