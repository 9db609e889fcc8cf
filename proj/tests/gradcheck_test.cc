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

#include <gtest/gtest.h>

#include "testing/gradcheck_cases.h"

namespace mrdlinet {
namespace {

using testing::gradcheck;
using testing::make_model_case;
using testing::make_op_case;

constexpr double kTolerance = 1e-4;

// Guards against a vacuous pass when every unit is dead.
double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Five random cases per op kind, 105 in total.
TEST(GradCheck, EveryOpMatchesCentralDifferences) {
  int cases = 0;
  for (int kind = 0; kind < testing::kOpKinds; ++kind) {
    for (uint64_t seed = 1; seed <= 5; ++seed) {
      const testing::OpCase c = make_op_case(kind, seed * 7919 + kind);
      const auto r = gradcheck(c.leaves, c.loss);
      EXPECT_LT(r.max_error, kTolerance) << c.name << " seed " << seed;
      ++cases;
    }
  }
  EXPECT_GE(cases, 100);
}

TEST(GradCheck, AddOnSmallTensorsIsTight) {
  Tensor<double> a({2, 2}, {0.3, -0.7, 0.1, 0.9}, true);
  Tensor<double> b({2, 2}, {-0.2, 0.5, 0.8, -0.4}, true);
  Tensor<double> w({2, 2}, {1.5, -2.0, 0.25, 3.0});
  const auto r = gradcheck({a, b}, [&] { return sum(mul(add(a, b), w)); });
  EXPECT_LT(r.max_error, 1e-6);
}

TEST(GradCheck, TinyModelParametersInferenceMode) {
  const auto mc = make_model_case(11, 2, Mode::kInfer);
  const auto r = testing::gradcheck_model(mc);
  EXPECT_LT(r.max_error, kTolerance);
  EXPECT_GT(norm(r.analytic), 0.0);
}

TEST(GradCheck, TinyModelParametersTrainMode) {
  const auto mc = make_model_case(12, 4, Mode::kTrain);
  const auto r = testing::gradcheck_model(mc);
  EXPECT_LT(r.max_error, kTolerance);
  EXPECT_GT(norm(r.analytic), 0.0);
}

TEST(GradCheck, TinyModelInput) {
  const auto mc = make_model_case(13, 2, Mode::kInfer);
  const auto r = testing::gradcheck_model(mc, /*wrt_input=*/true);
  EXPECT_LT(r.max_error, kTolerance);
  EXPECT_GT(norm(r.analytic), 0.0);
}

}  // namespace
}  // namespace mrdlinet
