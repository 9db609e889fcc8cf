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

#ifndef MRDLINET_LAYERS_H_
#define MRDLINET_LAYERS_H_

#include <string>
#include <vector>

#include "mrdlinet/architecture.h"
#include "mrdlinet/ops.h"
#include "mrdlinet/parameter_store.h"
#include "mrdlinet/rng.h"
#include "mrdlinet/tensor.h"

namespace mrdlinet {

// One entry per layer boundary visited by a forward pass.
struct LayerTrace {
  std::string name;
  Shape output_shape;
  bool skip_connection = false;
};
using Trace = std::vector<LayerTrace>;

// Seeded He-uniform initialization: U(-sqrt(6 / fan_in), +sqrt(6 / fan_in)).
template <typename T>
class Initializer {
 public:
  explicit Initializer(uint64_t seed) : rng_(seed) {}
  Tensor<T> he_uniform(Shape shape, int64_t fan_in);

 private:
  Rng rng_;
};

template <typename T>
class BatchNormLayer {
 public:
  BatchNormLayer() = default;
  // Registers gamma (ones), beta (zeros), moving_mean (zeros) and
  // moving_variance (ones) under `name/`.
  BatchNormLayer(ParameterStore<T>& store, const std::string& name, int channels);

  Tensor<T> forward(const Tensor<T>& x, Mode mode) {
    return batch_norm(x, gamma_, beta_, stats_, mode);
  }

  Tensor<T>& gamma() { return gamma_; }
  Tensor<T>& beta() { return beta_; }
  RunningStats<T>& stats() { return stats_; }
  const RunningStats<T>& stats() const { return stats_; }

 private:
  Tensor<T> gamma_;
  Tensor<T> beta_;
  RunningStats<T> stats_;
};

// Bias-free convolution (every conv here feeds a batch norm).
template <typename T>
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(ParameterStore<T>& store, const std::string& name, int kernel_size,
              int in_channels, int out_channels, int stride, Initializer<T>& init);

  Tensor<T> forward(const Tensor<T>& x) const {
    return conv2d(x, kernel_, stride_, Padding::kSame);
  }
  Tensor<T>& kernel() { return kernel_; }
  const Tensor<T>& kernel() const { return kernel_; }

 private:
  Tensor<T> kernel_;
  int stride_ = 1;
};

template <typename T>
class DepthwiseConv2dLayer {
 public:
  DepthwiseConv2dLayer() = default;
  DepthwiseConv2dLayer(ParameterStore<T>& store, const std::string& name, int channels,
                       int stride, Initializer<T>& init);

  Tensor<T> forward(const Tensor<T>& x) const {
    return depthwise_conv2d(x, kernel_, stride_, Padding::kSame);
  }
  Tensor<T>& kernel() { return kernel_; }

 private:
  Tensor<T> kernel_;
  int stride_ = 1;
};

template <typename T>
class DenseLayer {
 public:
  DenseLayer() = default;
  DenseLayer(ParameterStore<T>& store, const std::string& name, int in_features,
             int units, Initializer<T>& init);

  Tensor<T> forward(const Tensor<T>& x) const { return dense(x, weight_, bias_); }

 private:
  Tensor<T> weight_;
  Tensor<T> bias_;
};

// Expand (1x1 conv, filters * expansion_factor channels) -> BN -> ReLU6 ->
// 3x3 depthwise (stride) -> BN -> ReLU6 -> project (1x1 conv, filters) ->
// BN, with no activation after the projection. The identity skip is added
// iff stride == 1 and the input already has `filters` channels.
template <typename T>
class BottleneckBlock {
 public:
  BottleneckBlock(ParameterStore<T>& store, const std::string& name, int in_channels,
                  const BottleneckSpec& spec, Initializer<T>& init);

  Tensor<T> forward(const Tensor<T>& x, Mode mode, Trace* trace = nullptr);

  const std::string& name() const { return name_; }
  bool has_skip() const { return skip_; }
  int in_channels() const { return in_channels_; }
  int expanded_channels() const { return expanded_; }
  int out_channels() const { return spec_.filters; }
  int stride() const { return spec_.stride; }

  Conv2dLayer<T>& project() { return project_; }
  BatchNormLayer<T>& project_bn() { return project_bn_; }

  template <typename F>
  void visit_batch_norms(F&& f) {
    f(expand_bn_);
    f(depthwise_bn_);
    f(project_bn_);
  }

 private:
  std::string name_;
  BottleneckSpec spec_;
  int in_channels_;
  int expanded_;
  bool skip_;
  Conv2dLayer<T> expand_;
  BatchNormLayer<T> expand_bn_;
  DepthwiseConv2dLayer<T> depthwise_;
  BatchNormLayer<T> depthwise_bn_;
  Conv2dLayer<T> project_;
  BatchNormLayer<T> project_bn_;
};

// num_layers units of BN -> ReLU -> 3x3 conv(growth_rate), each unit's
// output concatenated onto the running feature map.
template <typename T>
class DenseBlock {
 public:
  DenseBlock() = default;
  DenseBlock(ParameterStore<T>& store, const std::string& name, int in_channels,
             int num_layers, int growth_rate, Initializer<T>& init);

  Tensor<T> forward(const Tensor<T>& x, Mode mode, Trace* trace = nullptr);

  int out_channels() const { return out_channels_; }
  const std::vector<Conv2dLayer<T>>& convs() const { return convs_; }

  template <typename F>
  void visit_batch_norms(F&& f) {
    for (auto& bn : norms_) f(bn);
  }

 private:
  std::string name_;
  int out_channels_ = 0;
  std::vector<BatchNormLayer<T>> norms_;
  std::vector<Conv2dLayer<T>> convs_;
};

// BN -> ReLU -> 1x1 conv to floor(reduction * C) channels -> 2x2 avg pool.
template <typename T>
class TransitionLayer {
 public:
  TransitionLayer() = default;
  TransitionLayer(ParameterStore<T>& store, const std::string& name, int in_channels,
                  double reduction, Initializer<T>& init);

  Tensor<T> forward(const Tensor<T>& x, Mode mode, Trace* trace = nullptr);

  int out_channels() const { return out_channels_; }

  template <typename F>
  void visit_batch_norms(F&& f) {
    f(bn_);
  }

 private:
  std::string name_;
  int out_channels_ = 0;
  BatchNormLayer<T> bn_;
  Conv2dLayer<T> conv_;
};

}  // namespace mrdlinet

#endif  // MRDLINET_LAYERS_H_
