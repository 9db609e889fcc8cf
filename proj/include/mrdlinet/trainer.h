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

#ifndef MRDLINET_TRAINER_H_
#define MRDLINET_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrdlinet/augment.h"
#include "mrdlinet/dataset.h"
#include "mrdlinet/model.h"

namespace mrdlinet {

struct TrainConfig {
  int batch_size = 128;
  int epochs = 50;
  double init_lr = 1e-3;
  double decay_rate = 0.9;
  // The learning rate decays by `decay_rate` every
  // decay_epochs * steps_per_epoch optimizer steps.
  double decay_epochs = 2.0;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-7;
  uint64_t seed = 0;
  // Stratified hold-out carved from the training samples; 0 disables it.
  double val_fraction = 0.1;
  bool augment = true;
  // Threads used to assemble batches and run validation. Results do not
  // depend on it.
  int workers = 1;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& json, TrainConfig base = {});

// floor(num_train_samples / batch_size); the trailing partial batch is
// dropped.
int64_t steps_per_epoch(int64_t num_train_samples, int64_t batch_size);

// init_lr * decay_rate^(step / decay_every), continuous exponent.
double lr_at(int64_t step, double init_lr, double decay_rate, double decay_every);

struct TrainLogRow {
  int epoch = 0;
  double train_loss = 0;
  double train_accuracy = 0;
  std::optional<double> val_loss;
  std::optional<double> val_accuracy;
  double lr = 0;  // learning rate after the epoch's last step
  int64_t wall_ms = 0;
};

struct TrainLog {
  std::vector<TrainLogRow> rows;
};

// `epoch,train_loss,train_acc,val_loss,val_acc,lr,wall_ms`; absent
// validation values are left empty. Reals use 17 significant digits.
std::string format_trainlog(const TrainLog& log);
void write_trainlog(const TrainLog& log, const std::filesystem::path& path);

// Bias-corrected Adam:
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2,
//   p <- p - lr * m_hat / (sqrt(v_hat) + eps).
// Only trainable parameters are touched. A parameter without a gradient is
// treated as having a zero gradient.
template <typename T>
class Adam {
 public:
  Adam(double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-7)
      : beta1_(beta1), beta2_(beta2), epsilon_(epsilon) {}

  void step(ParameterStore<T>& params, double lr);
  int64_t step_count() const { return step_; }

 private:
  double beta1_, beta2_, epsilon_;
  int64_t step_ = 0;
  std::vector<std::vector<T>> first_moment_;
  std::vector<std::vector<T>> second_moment_;
};

// Called once per optimizer step with the ids that make up the batch.
using BatchObserver =
    std::function<void(int epoch, int64_t step, const std::vector<std::string>& ids)>;

// Batch input tensor [N, H, W, 3] for the given samples; augmented with
// per-sample seeds when `augmentation` is set, rescale-only otherwise.
Tensor<float> assemble_batch(std::span<const Sample> samples, std::span<const size_t> indices,
                             const AugmentationConfig* augmentation, uint64_t seed, int epoch,
                             int workers);

// Mini-batch training with BCE and Adam. Batch norm runs in train mode for
// updates and infer mode for validation. Validation sees rescale-only
// inputs.
TrainLog train(Model<float>& model, std::span<const Sample> samples,
               const AugmentationConfig& augmentation, const TrainConfig& config,
               const BatchObserver& observer = {});

extern template class Adam<float>;
extern template class Adam<double>;

}  // namespace mrdlinet

#endif  // MRDLINET_TRAINER_H_
