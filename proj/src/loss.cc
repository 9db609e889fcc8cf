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

#include "mrdlinet/loss.h"

#include <algorithm>
#include <cmath>

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& predictions, const Tensor<T>& labels) {
  if (predictions.shape() != labels.shape() || predictions.numel() == 0) {
    throw DimensionError(fmt::format("bce_loss: predictions {} vs labels {}",
                                     shape_string(predictions.shape()),
                                     shape_string(labels.shape())));
  }
  const auto p = predictions.data();
  const auto y = labels.data();
  const int64_t n = predictions.numel();
  const T lo = static_cast<T>(kProbabilityClamp);
  const T hi = static_cast<T>(1.0 - kProbabilityClamp);
  Accumulator<T> total = 0;
  for (int64_t i = 0; i < n; ++i) {
    if (y[i] != T(0) && y[i] != T(1)) {
      throw ValidationError(fmt::format("bce_loss: label {} is not 0 or 1", y[i]));
    }
    const Accumulator<T> pc = std::clamp(p[i], lo, hi);
    total -= y[i] == T(1) ? std::log(pc) : std::log1p(-pc);
  }
  auto backward = [predictions, labels, n, lo, hi](std::span<const T> grad_out,
                                                   std::span<const std::span<T>> grads) {
    std::span<T> dp = grads[0];
    if (dp.empty()) return;
    const auto p = predictions.data();
    const auto y = labels.data();
    const T scale = grad_out[0] / static_cast<T>(n);
    for (int64_t i = 0; i < n; ++i) {
      const T pc = std::clamp(p[i], lo, hi);
      dp[i] += scale * (y[i] == T(1) ? -T(1) / pc : T(1) / (T(1) - pc));
    }
  };
  return Tensor<T>::from_op("bce_loss", Shape{}, {static_cast<T>(total / n)},
                            {predictions, labels}, std::move(backward));
}

template Tensor<float> bce_loss(const Tensor<float>&, const Tensor<float>&);
template Tensor<double> bce_loss(const Tensor<double>&, const Tensor<double>&);
template Tensor<long double> bce_loss(const Tensor<long double>&,
                                     const Tensor<long double>&);

}  // namespace mrdlinet
