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

#include "mrdlinet/trainer.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>

#include "fmt/format.h"
#include "mrdlinet/error.h"
#include "mrdlinet/loss.h"
#include "mrdlinet/parallel.h"
#include "mrdlinet/rng.h"

namespace mrdlinet {
namespace {

struct EpochMetrics {
  double loss = 0;
  double accuracy = 0;
};

Tensor<float> label_tensor(std::span<const Sample> samples, std::span<const size_t> indices) {
  std::vector<float> labels;
  labels.reserve(indices.size());
  for (size_t i : indices) labels.push_back(static_cast<float>(samples[i].label));
  return Tensor<float>({static_cast<int64_t>(indices.size()), 1}, std::move(labels));
}

int count_correct(const Tensor<float>& predictions, const Tensor<float>& labels) {
  int correct = 0;
  for (int64_t i = 0; i < predictions.numel(); ++i) {
    const float predicted = predictions.data()[i] > 0.5f ? 1.0f : 0.0f;
    correct += predicted == labels.data()[i];
  }
  return correct;
}

EpochMetrics evaluate_split(Model<float>& model, std::span<const Sample> samples,
                            std::span<const size_t> indices, int batch_size, int workers) {
  NoGradGuard no_grad;
  double loss_sum = 0;
  int correct = 0;
  for (size_t begin = 0; begin < indices.size(); begin += batch_size) {
    const size_t end = std::min(indices.size(), begin + batch_size);
    const auto batch = indices.subspan(begin, end - begin);
    const Tensor<float> x = assemble_batch(samples, batch, nullptr, 0, 0, workers);
    const Tensor<float> y = label_tensor(samples, batch);
    const Tensor<float> p = model.forward(x, Mode::kInfer);
    loss_sum += static_cast<double>(bce_loss(p, y).item()) * batch.size();
    correct += count_correct(p, y);
  }
  return {loss_sum / indices.size(), static_cast<double>(correct) / indices.size()};
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

void TrainConfig::validate() const {
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (epochs < 1) throw ConfigError(fmt::format("epochs must be >= 1, got {}", epochs));
  if (!(init_lr > 0)) throw ConfigError("init_lr must be positive");
  if (!(decay_rate > 0 && decay_rate <= 1)) throw ConfigError("decay_rate must lie in (0, 1]");
  if (!(decay_epochs > 0)) throw ConfigError("decay_epochs must be positive");
  if (!(adam_beta1 >= 0 && adam_beta1 < 1) || !(adam_beta2 >= 0 && adam_beta2 < 1)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0)) throw ConfigError("adam_epsilon must be positive");
  if (!(val_fraction >= 0 && val_fraction <= 0.5)) {
    throw ConfigError("val_fraction must lie in [0, 0.5]");
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
}

nlohmann::json to_json(const TrainConfig& c) {
  return {{"batch_size", c.batch_size},     {"epochs", c.epochs},
          {"init_lr", c.init_lr},           {"decay_rate", c.decay_rate},
          {"decay_epochs", c.decay_epochs}, {"adam_beta1", c.adam_beta1},
          {"adam_beta2", c.adam_beta2},     {"adam_epsilon", c.adam_epsilon},
          {"seed", c.seed},                 {"val_fraction", c.val_fraction},
          {"augment", c.augment},           {"workers", c.workers}};
}

TrainConfig train_config_from_json(const nlohmann::json& json, TrainConfig c) {
  if (!json.is_object()) throw ConfigError("train config must be a JSON object");
  static const std::set<std::string> known = {
      "batch_size", "epochs",     "init_lr",      "decay_rate", "decay_epochs", "adam_beta1",
      "adam_beta2", "adam_epsilon", "seed",       "val_fraction", "augment",    "workers"};
  for (const auto& [key, _] : json.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("train config: unknown key '{}'", key));
  }
  try {
    c.batch_size = json.value("batch_size", c.batch_size);
    c.epochs = json.value("epochs", c.epochs);
    c.init_lr = json.value("init_lr", c.init_lr);
    c.decay_rate = json.value("decay_rate", c.decay_rate);
    c.decay_epochs = json.value("decay_epochs", c.decay_epochs);
    c.adam_beta1 = json.value("adam_beta1", c.adam_beta1);
    c.adam_beta2 = json.value("adam_beta2", c.adam_beta2);
    c.adam_epsilon = json.value("adam_epsilon", c.adam_epsilon);
    c.seed = json.value("seed", c.seed);
    c.val_fraction = json.value("val_fraction", c.val_fraction);
    c.augment = json.value("augment", c.augment);
    c.workers = json.value("workers", c.workers);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("train config: {}", e.what()));
  }
  c.validate();
  return c;
}

int64_t steps_per_epoch(int64_t num_train_samples, int64_t batch_size) {
  if (num_train_samples < 1 || batch_size < 1) {
    throw ConfigError("steps_per_epoch: sample count and batch size must be >= 1");
  }
  return num_train_samples / batch_size;
}

double lr_at(int64_t step, double init_lr, double decay_rate, double decay_every) {
  return init_lr * std::pow(decay_rate, static_cast<double>(step) / decay_every);
}

std::string format_trainlog(const TrainLog& log) {
  std::string out = "epoch,train_loss,train_acc,val_loss,val_acc,lr,wall_ms\n";
  for (const auto& r : log.rows) {
    out += fmt::format("{},{},{},{},{},{},{}\n", r.epoch, format_real(r.train_loss),
                       format_real(r.train_accuracy),
                       r.val_loss ? format_real(*r.val_loss) : "",
                       r.val_accuracy ? format_real(*r.val_accuracy) : "", format_real(r.lr),
                       r.wall_ms);
  }
  return out;
}

void write_trainlog(const TrainLog& log, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
  out << format_trainlog(log);
  if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

template <typename T>
void Adam<T>::step(ParameterStore<T>& params, double lr) {
  const auto& entries = params.entries();
  if (first_moment_.empty()) {
    for (const auto& p : entries) {
      first_moment_.emplace_back(p.trainable ? p.tensor.numel() : 0, T(0));
      second_moment_.emplace_back(p.trainable ? p.tensor.numel() : 0, T(0));
    }
  }
  if (first_moment_.size() != entries.size()) {
    throw DimensionError("Adam: parameter store changed between steps");
  }
  ++step_;
  const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t k = 0; k < entries.size(); ++k) {
    if (!entries[k].trainable) continue;
    Tensor<T> tensor = entries[k].tensor;
    auto& m = first_moment_[k];
    auto& v = second_moment_[k];
    if (static_cast<int64_t>(m.size()) != tensor.numel()) {
      throw DimensionError(fmt::format("Adam: moment shape mismatch for '{}'", entries[k].name));
    }
    const auto grad = tensor.grad();
    std::span<T> w = tensor.mutable_data();
    for (size_t i = 0; i < w.size(); ++i) {
      const double g = grad.empty() ? 0.0 : static_cast<double>(grad[i]);
      const double mi = beta1_ * m[i] + (1.0 - beta1_) * g;
      const double vi = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      const double m_hat = mi / correction1;
      const double v_hat = vi / correction2;
      w[i] = static_cast<T>(w[i] - lr * m_hat / (std::sqrt(v_hat) + epsilon_));
    }
  }
}

Tensor<float> assemble_batch(std::span<const Sample> samples, std::span<const size_t> indices,
                             const AugmentationConfig* augmentation, uint64_t seed, int epoch,
                             int workers) {
  if (indices.empty()) throw ContractError("assemble_batch: empty batch");
  const Image& first = samples[indices[0]].patch;
  const int64_t h = first.height, w = first.width;
  const size_t stride = size_t(h) * w * Image::kChannels;
  std::vector<float> values(indices.size() * stride);
  parallel_for(indices.size(), workers, [&](size_t, size_t k) {
    const Sample& s = samples[indices[k]];
    if (s.patch.height != h || s.patch.width != w) {
      throw DimensionError(fmt::format("sample '{}' is {}x{}, batch expects {}x{}", s.id,
                                       s.patch.height, s.patch.width, h, w));
    }
    std::vector<float> pixels;
    if (augmentation) {
      Rng rng(augmentation_seed(seed, s.id, epoch));
      pixels = augment(s.patch, *augmentation, rng);
    } else {
      pixels = rescale_image(s.patch);
    }
    std::copy(pixels.begin(), pixels.end(), values.begin() + k * stride);
  });
  return Tensor<float>({static_cast<int64_t>(indices.size()), h, w, Image::kChannels},
                       std::move(values));
}

TrainLog train(Model<float>& model, std::span<const Sample> samples,
               const AugmentationConfig& augmentation, const TrainConfig& config,
               const BatchObserver& observer) {
  config.validate();
  augmentation.validate();
  if (samples.empty()) throw ConfigError("train: no training samples");

  SplitIndices split;
  if (config.val_fraction > 0) {
    std::vector<Label> labels;
    for (const auto& s : samples) labels.push_back(s.label);
    split = split_validation(labels, config.val_fraction, derive_seed(config.seed, "validation"));
  } else {
    split.train.resize(samples.size());
    std::iota(split.train.begin(), split.train.end(), size_t{0});
  }

  const int64_t spe = steps_per_epoch(static_cast<int64_t>(split.train.size()), config.batch_size);
  if (spe < 1) {
    throw ConfigError(fmt::format("batch size {} exceeds the {} training samples",
                                  config.batch_size, split.train.size()));
  }
  const double decay_every = config.decay_epochs * static_cast<double>(spe);

  Adam<float> optimizer(config.adam_beta1, config.adam_beta2, config.adam_epsilon);
  ParameterStore<float>& params = model.parameters();
  const AugmentationConfig* aug = config.augment ? &augmentation : nullptr;

  TrainLog log;
  int64_t global_step = 0;
  std::vector<size_t> order = split.train;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    // Reshuffle from the base order so each epoch's permutation only depends
    // on (seed, epoch).
    order = split.train;
    Rng shuffle_rng(derive_seed(config.seed, "shuffle", static_cast<uint64_t>(epoch)));
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[shuffle_rng.below(i)]);

    double loss_sum = 0;
    int correct = 0;
    int64_t seen = 0;
    for (int64_t step = 0; step < spe; ++step) {
      const std::span<const size_t> batch(order.data() + step * config.batch_size,
                                          static_cast<size_t>(config.batch_size));
      if (observer) {
        std::vector<std::string> ids;
        ids.reserve(batch.size());
        for (size_t i : batch) ids.push_back(samples[i].id);
        observer(epoch, global_step, ids);
      }
      const Tensor<float> x =
          assemble_batch(samples, batch, aug, config.seed, epoch, config.workers);
      const Tensor<float> y = label_tensor(samples, batch);
      const double lr = lr_at(global_step, config.init_lr, config.decay_rate, decay_every);
      try {
        params.zero_grad();
        const Tensor<float> p = model.forward(x, Mode::kTrain);
        const Tensor<float> loss = bce_loss(p, y);
        loss.backward();
        optimizer.step(params, lr);
        loss_sum += static_cast<double>(loss.item()) * batch.size();
        correct += count_correct(p, y);
        seen += static_cast<int64_t>(batch.size());
      } catch (const NumericError& e) {
        throw NumericError(fmt::format("epoch {}, batch {} (global step {}): {}", epoch,
                                       step, global_step, e.what()));
      }
      ++global_step;
    }

    TrainLogRow row;
    row.epoch = epoch;
    row.train_loss = loss_sum / seen;
    row.train_accuracy = static_cast<double>(correct) / seen;
    if (!split.validation.empty()) {
      const EpochMetrics val = evaluate_split(model, samples, split.validation,
                                              config.batch_size, config.workers);
      row.val_loss = val.loss;
      row.val_accuracy = val.accuracy;
    }
    row.lr = lr_at(global_step, config.init_lr, config.decay_rate, decay_every);
    row.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - start)
                      .count();
    log.rows.push_back(row);
  }
  params.zero_grad();
  return log;
}

template class Adam<float>;
template class Adam<double>;

}  // namespace mrdlinet
