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

#include <cstring>
#include <fstream>

#include <gtest/gtest.h>

#include "mrdlinet/error.h"
#include "mrdlinet/serialization.h"
#include "testing/oracles.h"
#include "testing/temp_dir.h"

namespace mrdlinet {
namespace {

Model<float> calibrated_tiny(uint64_t seed) {
  Model<float> m(testing::tiny_architecture(), seed);
  std::mt19937_64 gen(seed);
  const auto v = testing::uniform_values(gen, 4 * 16 * 16 * 3, 0, 1);
  m.forward(Tensor<float>({4, 16, 16, 3}, std::vector<float>(v.begin(), v.end())),
            Mode::kTrain);
  return m;
}

Tensor<float> probe() {
  std::mt19937_64 gen(99);
  const auto v = testing::uniform_values(gen, 3 * 16 * 16 * 3, 0, 1);
  return Tensor<float>({3, 16, 16, 3}, std::vector<float>(v.begin(), v.end()));
}

TEST(Serialization, RoundTripIsByteIdentical) {
  const Model<float> m = calibrated_tiny(1);
  const std::string bytes = serialize_model(m);
  const Model<float> back = deserialize_model<float>(bytes);
  EXPECT_EQ(serialize_model(back), bytes);
  EXPECT_EQ(back.config(), m.config());
  EXPECT_TRUE(back.statistics_initialized());
}

TEST(Serialization, LoadedModelPredictsIdentically) {
  Model<float> m = calibrated_tiny(2);
  testing::TempDir dir("serialization");
  save_model(m, dir / "model.bin");
  Model<float> back = load_model<float>(dir / "model.bin");
  NoGradGuard no_grad;
  const Tensor<float> ya = m.forward(probe(), Mode::kInfer);
  const Tensor<float> yb = back.forward(probe(), Mode::kInfer);
  const auto a = ya.data(), b = yb.data();
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(std::memcmp(a.data(), b.data(), a.size() * sizeof(float)), 0);
}

TEST(Serialization, EveryParameterSurvives) {
  const Model<float> m = calibrated_tiny(3);
  const Model<float> back = deserialize_model<float>(serialize_model(m));
  const auto& want = m.parameters().entries();
  const auto& got = back.parameters().entries();
  ASSERT_EQ(want.size(), got.size());
  for (size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(got[i].name, want[i].name);
    EXPECT_EQ(got[i].trainable, want[i].trainable);
    const auto x = want[i].tensor.data(), y = got[i].tensor.data();
    EXPECT_TRUE(std::equal(x.begin(), x.end(), y.begin())) << want[i].name;
  }
}

TEST(Serialization, UncalibratedFlagIsPreserved) {
  const Model<float> m(testing::tiny_architecture(), 4);
  EXPECT_FALSE(deserialize_model<float>(serialize_model(m)).statistics_initialized());
}

TEST(Serialization, DoubleModelsRoundTrip) {
  const Model<double> m(testing::tiny_architecture(), 5);
  const std::string bytes = serialize_model(m);
  EXPECT_EQ(serialize_model(deserialize_model<double>(bytes)), bytes);
  EXPECT_THROW(deserialize_model<float>(bytes), ParseError);
}

TEST(Serialization, RejectsCorruptInput) {
  const std::string bytes = serialize_model(calibrated_tiny(6));
  EXPECT_THROW(deserialize_model<float>(""), ParseError);
  EXPECT_THROW(deserialize_model<float>(bytes.substr(0, 4)), ParseError);
  EXPECT_THROW(deserialize_model<float>(bytes.substr(0, 40)), ParseError);
  EXPECT_THROW(deserialize_model<float>(bytes.substr(0, bytes.size() - 1)), ParseError);
  std::string garbled = bytes;
  garbled[10] = '#';
  EXPECT_THROW(deserialize_model<float>(garbled), ParseError);
}

TEST(Serialization, MissingFileIsAnIoError) {
  testing::TempDir dir("serialization-missing");
  EXPECT_THROW(load_model<float>(dir / "absent.bin"), IoError);
  EXPECT_THROW(save_model(calibrated_tiny(7), dir / "no" / "such" / "dir.bin"), IoError);
}

}  // namespace
}  // namespace mrdlinet
