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

#ifndef MRDLINET_OPS_H_
#define MRDLINET_OPS_H_

#include <cstdint>

#include "mrdlinet/tensor.h"

namespace mrdlinet {

enum class Padding { kSame, kValid };

// Output extent of a strided window along one axis. `same` follows the
// ceil(in / stride) rule, `valid` floor((in - k) / stride) + 1.
int64_t conv_output_extent(int64_t in, int64_t kernel, int stride, Padding padding);

// input [N,H,W,Cin], kernel [kh,kw,Cin,Cout] -> [N,H',W',Cout]. No bias.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, int stride,
                 Padding padding);

// input [N,H,W,C], kernel [kh,kw,C] -> [N,H',W',C]. One filter per channel.
template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& input, const Tensor<T>& kernel,
                           int stride, Padding padding);

inline constexpr double kBatchNormEpsilon = 1e-3;
inline constexpr double kBatchNormMomentum = 0.99;

// Running averages owned by a batch-norm layer. `moving_variance` starts at
// one and `moving_mean` at zero; `initialized` flips on the first train-mode
// pass. Each train pass folds in the batch statistics as
// moving = momentum * moving + (1 - momentum) * batch.
template <typename T>
struct RunningStats {
  Tensor<T> moving_mean;
  Tensor<T> moving_variance;
  bool initialized = false;
  double momentum = kBatchNormMomentum;
};

// Per-channel normalization over N, H and W. In train mode the batch
// statistics are used and folded into `stats` with its momentum; in infer
// mode the running statistics are used and must be initialized.
template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, const Tensor<T>& gamma,
                     const Tensor<T>& beta, RunningStats<T>& stats, Mode mode);

enum class Activation { kRelu, kRelu6, kSigmoid };

// Subgradients: relu'(0) = 0, relu6'(0) = relu6'(6) = 0.
template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind);

// 2x2 average pooling with stride 2. Odd trailing rows/columns are dropped.
template <typename T>
Tensor<T> avg_pool2x2(const Tensor<T>& input);

// [N,H,W,C] -> [N,C].
template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input);

// [N,D] x [D,U] -> [N,U].
template <typename T>
Tensor<T> matmul(const Tensor<T>& input, const Tensor<T>& weight);

// [N,D] x [D,U] + [U] -> [N,U].
template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight,
                const Tensor<T>& bias);

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b);

// Channels [begin, end) of an NHWC tensor.
template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, int64_t begin, int64_t end);

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);

// Elementwise product of equally shaped tensors.
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);

// Sum of all elements as a scalar.
template <typename T>
Tensor<T> sum(const Tensor<T>& input);

}  // namespace mrdlinet

#endif  // MRDLINET_OPS_H_
