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

#ifndef MRDLINET_LOSS_H_
#define MRDLINET_LOSS_H_

#include "mrdlinet/tensor.h"

namespace mrdlinet {

inline constexpr double kProbabilityClamp = 1e-7;

// Mean binary cross-entropy -[y ln p + (1 - y) ln(1 - p)] over the batch.
// Predictions are clamped to [1e-7, 1 - 1e-7]; the gradient is evaluated at
// the clamped value. Labels must be exactly 0 or 1.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& predictions, const Tensor<T>& labels);

}  // namespace mrdlinet

#endif  // MRDLINET_LOSS_H_
