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

#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "mrdlinet/error.h"
#include "mrdlinet/loss.h"
#include "mrdlinet/serialization.h"
#include "mrdlinet/synth.h"
#include "mrdlinet/trainer.h"
#include "testing/oracles.h"

namespace mrdlinet {
namespace {

TEST(Schedule, StepsPerEpochDropsThePartialBatch) {
  EXPECT_EQ(steps_per_epoch(1500, 128), 11);
  EXPECT_EQ(steps_per_epoch(128, 128), 1);
  EXPECT_EQ(steps_per_epoch(100, 128), 0);
  EXPECT_EQ(steps_per_epoch(20115, 128), 157);
  EXPECT_THROW(steps_per_epoch(10, 0), ConfigError);
}

TEST(Schedule, LearningRateDecaysContinuously) {
  const double every = 2 * 11;
  EXPECT_EQ(lr_at(0, 1e-3, 0.9, every), 1e-3);
  EXPECT_NEAR(lr_at(2 * 22, 1e-3, 0.9, every), 0.00081, 1e-12);
  EXPECT_NEAR(lr_at(11, 1e-3, 0.9, every), 1e-3 * std::sqrt(0.9), 1e-15);
  for (int64_t s = 1; s < 1000; ++s) {
    EXPECT_LT(lr_at(s, 1e-3, 0.9, every), lr_at(s - 1, 1e-3, 0.9, every));
  }
  EXPECT_EQ(lr_at(500, 1e-3, 1.0, every), 1e-3);
}

TEST(Loss, BinaryCrossEntropyValues) {
  const auto half = bce_loss(Tensor<double>({1, 1}, {0.5}), Tensor<double>({1, 1}, {1}));
  EXPECT_NEAR(half.item(), std::log(2.0), 1e-12);
  EXPECT_NEAR(half.item(), 0.693147, 1e-6);
  const auto pair =
      bce_loss(Tensor<double>({2, 1}, {0.9, 0.2}), Tensor<double>({2, 1}, {1, 0}));
  EXPECT_NEAR(pair.item(), -(std::log(0.9) + std::log(0.8)) / 2, 1e-12);
  EXPECT_NEAR(pair.item(), 0.164252, 1e-6);
}

TEST(Loss, ClampKeepsTheLossFinite) {
  const auto sure_wrong =
      bce_loss(Tensor<double>({1, 1}, {0.0}), Tensor<double>({1, 1}, {1}));
  EXPECT_NEAR(sure_wrong.item(), -std::log(kProbabilityClamp), 1e-9);
}

TEST(Loss, RejectsBadLabelsAndShapes) {
  EXPECT_THROW(bce_loss(Tensor<double>({1, 1}, {0.5}), Tensor<double>({1, 1}, {0.5})),
               ValidationError);
  EXPECT_THROW(bce_loss(Tensor<double>({2, 1}, {0.5, 0.5}), Tensor<double>({1, 1}, {1})),
               DimensionError);
}

// Hand-unrolled Adam on f(w) = w^2 starting from w = 1.
TEST(Adam, MatchesScalarReference) {
  ParameterStore<double> store;
  Tensor<double> w = store.add("w", Tensor<double>({1}, {1.0}), true);
  Adam<double> adam(0.9, 0.999, 1e-7);
  double ref = 1.0, m = 0, v = 0;
  for (int t = 1; t <= 10; ++t) {
    store.zero_grad();
    sum(mul(w, w)).backward();
    adam.step(store, 0.1);
    const double g = 2 * ref;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double m_hat = m / (1 - std::pow(0.9, t)), v_hat = v / (1 - std::pow(0.999, t));
    ref -= 0.1 * m_hat / (std::sqrt(v_hat) + 1e-7);
    EXPECT_NEAR(w.data()[0], ref, 1e-12) << "step " << t;
  }
  EXPECT_EQ(adam.step_count(), 10);
}

TEST(Adam, ZeroGradientAndFrozenTensorsStayPut) {
  ParameterStore<double> store;
  Tensor<double> w = store.add("w", Tensor<double>({2}, {0.5, -0.5}), true);
  Tensor<double> stat = store.add("stat", Tensor<double>({1}, {3.0}), false);
  Adam<double> adam;
  adam.step(store, 0.1);
  EXPECT_EQ(w.data()[0], 0.5);
  EXPECT_EQ(w.data()[1], -0.5);
  EXPECT_EQ(stat.data()[0], 3.0);
}

TEST(TrainLog, CsvLeavesAbsentValidationEmpty) {
  TrainLog log;
  log.rows.push_back({1, 0.5, 0.75, std::nullopt, std::nullopt, 0.001, 12});
  log.rows.push_back({2, 0.25, 1.0, 0.3, 0.9, 0.0009, 13});
  EXPECT_EQ(format_trainlog(log),
            "epoch,train_loss,train_acc,val_loss,val_acc,lr,wall_ms\n"
            "1,0.5,0.75,,,0.001,12\n"
            "2,0.25,1,0.29999999999999999,0.90000000000000002,0.00089999999999999998,13\n");
}

SynthConfig small_synth(uint64_t seed, int n, int size) {
  SynthConfig c;
  c.n_train = n;
  c.n_test = 20;
  c.image_size = size;
  c.seed = seed;
  return c;
}

TrainConfig quick_config(uint64_t seed, int epochs, int batch) {
  TrainConfig c;
  c.epochs = epochs;
  c.batch_size = batch;
  c.seed = seed;
  c.val_fraction = 0;
  c.augment = false;
  return c;
}

TEST(Train, RejectsImpossibleSchedules) {
  Model<float> model(testing::tiny_architecture(), 0);
  const auto samples = synth_samples(small_synth(1, 10, 16), Split::kTrain);
  TrainConfig c = quick_config(0, 1, 128);
  EXPECT_THROW(train(model, samples, AugmentationConfig::rescale_only(), c), ConfigError);
  c = quick_config(0, 0, 4);
  EXPECT_THROW(train(model, samples, AugmentationConfig::rescale_only(), c), ConfigError);
  EXPECT_THROW(train(model, {}, AugmentationConfig::rescale_only(), quick_config(0, 1, 4)),
               ConfigError);
}

TEST(Train, WrongPatchSizeIsADimensionError) {
  Model<float> model(testing::tiny_architecture(), 0);
  const auto samples = synth_samples(small_synth(1, 8, 12), Split::kTrain);
  EXPECT_THROW(train(model, samples, AugmentationConfig::rescale_only(), quick_config(0, 1, 4)),
               DimensionError);
}

TEST(Train, ObserverSeesEveryKeptSampleOncePerEpoch) {
  Model<float> model(testing::tiny_architecture(), 0);
  const auto samples = synth_samples(small_synth(2, 30, 16), Split::kTrain);
  std::map<int, std::multiset<std::string>> seen;
  int64_t last_step = -1;
  const TrainLog log = train(model, samples, AugmentationConfig{}, quick_config(3, 2, 8),
                             [&](int epoch, int64_t step, const std::vector<std::string>& ids) {
                               EXPECT_EQ(step, last_step + 1);
                               last_step = step;
                               EXPECT_EQ(ids.size(), 8u);
                               seen[epoch].insert(ids.begin(), ids.end());
                             });
  ASSERT_EQ(log.rows.size(), 2u);
  EXPECT_EQ(last_step, 2 * 3 - 1);
  for (const auto& [epoch, ids] : seen) {
    EXPECT_EQ(ids.size(), 24u);
    EXPECT_EQ(std::set<std::string>(ids.begin(), ids.end()).size(), 24u);
  }
  for (const auto& row : log.rows) {
    EXPECT_FALSE(row.val_loss.has_value());
    EXPECT_FALSE(row.val_accuracy.has_value());
  }
  EXPECT_TRUE(model.statistics_initialized());
}

TEST(Train, ValidationColumnsAppearWithAHoldOut) {
  Model<float> model(testing::tiny_architecture(), 0);
  const auto samples = synth_samples(small_synth(2, 40, 16), Split::kTrain);
  TrainConfig c = quick_config(3, 1, 8);
  c.val_fraction = 0.1;
  const TrainLog log = train(model, samples, AugmentationConfig::rescale_only(), c);
  ASSERT_TRUE(log.rows[0].val_accuracy.has_value());
  EXPECT_GE(*log.rows[0].val_accuracy, 0.0);
  EXPECT_LE(*log.rows[0].val_accuracy, 1.0);
}

std::string train_bytes(int workers, bool augment) {
  Model<float> model(testing::tiny_architecture(), 4);
  const auto samples = synth_samples(small_synth(5, 32, 16), Split::kTrain);
  TrainConfig c = quick_config(6, 2, 8);
  c.workers = workers;
  c.augment = augment;
  c.val_fraction = 0.25;
  const TrainLog log = train(model, samples, AugmentationConfig{}, c);
  TrainLog stripped = log;
  for (auto& row : stripped.rows) row.wall_ms = 0;
  return serialize_model(model) + format_trainlog(stripped);
}

TEST(Train, DeterministicAndIndependentOfWorkerCount) {
  const std::string once = train_bytes(1, true);
  EXPECT_EQ(train_bytes(1, true), once);
  EXPECT_EQ(train_bytes(2, true), once);
  EXPECT_NE(train_bytes(1, false), once);
}

// Property: a few epochs of training lower the training loss.
TEST(Train, LossDecreasesAcrossSeeds) {
  int decreased = 0;
  for (uint64_t seed = 0; seed < 100; ++seed) {
    Model<float> model(testing::tiny_architecture(), seed);
    const auto samples = synth_samples(small_synth(seed + 100, 32, 16), Split::kTrain);
    TrainConfig c = quick_config(seed, 8, 8);
    c.init_lr = 3e-3;
    const TrainLog log = train(model, samples, AugmentationConfig::rescale_only(), c);
    decreased += log.rows.back().train_loss < log.rows.front().train_loss;
  }
  EXPECT_GE(decreased, 95);
}

TEST(Train, SeparableDataIsLearned) {
  ArchitectureConfig arch;
  arch.input_height = arch.input_width = 32;
  arch.scale_factor = 0.25;
  arch.batch_norm_momentum = 0.9;
  Model<float> model(arch, 7);
  SynthConfig synth = small_synth(7, 160, 32);
  synth.n_test = 40;
  TrainConfig c = quick_config(7, 10, 16);
  train(model, synth_samples(synth, Split::kTrain), AugmentationConfig::rescale_only(), c);
  const auto test = synth_samples(synth, Split::kTest);
  std::vector<size_t> all(test.size());
  std::iota(all.begin(), all.end(), 0);
  NoGradGuard no_grad;
  const Tensor<float> p =
      model.forward(assemble_batch(test, all, nullptr, 0, 0, 1), Mode::kInfer);
  int correct = 0;
  for (size_t i = 0; i < test.size(); ++i) {
    correct += (p.data()[i] > 0.5f) == (test[i].label == Label::kStressed);
  }
  EXPECT_GT(correct / double(test.size()), 0.95);
}

TEST(TrainConfig, JsonRoundTripAndUnknownKeys) {
  TrainConfig c;
  c.epochs = 3;
  c.augment = false;
  const TrainConfig back = train_config_from_json(to_json(c));
  EXPECT_EQ(to_json(back), to_json(c));
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"epoch", 3}}), ConfigError);
  EXPECT_THROW(train_config_from_json(nlohmann::json{{"epochs", 0}}), ConfigError);
}

}  // namespace
}  // namespace mrdlinet
