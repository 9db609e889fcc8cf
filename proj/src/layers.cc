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

#include "mrdlinet/layers.h"

#include <cmath>

namespace mrdlinet {
namespace {

template <typename T>
void record(Trace* trace, const std::string& name, const Tensor<T>& out,
            bool skip = false) {
  if (trace) trace->push_back({name, out.shape(), skip});
}

}  // namespace

template <typename T>
Tensor<T> Initializer<T>::he_uniform(Shape shape, int64_t fan_in) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::vector<T> values(shape_numel(shape));
  for (T& v : values) v = static_cast<T>(rng_.uniform(-limit, limit));
  return Tensor<T>(std::move(shape), std::move(values));
}

template <typename T>
BatchNormLayer<T>::BatchNormLayer(ParameterStore<T>& store, const std::string& name,
                                  int channels) {
  gamma_ = store.add(name + "/gamma", Tensor<T>::full({channels}, T(1)), true);
  beta_ = store.add(name + "/beta", Tensor<T>::zeros({channels}), true);
  stats_.moving_mean = store.add(name + "/moving_mean", Tensor<T>::zeros({channels}), false);
  stats_.moving_variance =
      store.add(name + "/moving_variance", Tensor<T>::full({channels}, T(1)), false);
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(ParameterStore<T>& store, const std::string& name,
                            int kernel_size, int in_channels, int out_channels,
                            int stride, Initializer<T>& init)
    : stride_(stride) {
  kernel_ = store.add(name + "/kernel",
                      init.he_uniform({kernel_size, kernel_size, in_channels, out_channels},
                                      int64_t{kernel_size} * kernel_size * in_channels),
                      true);
}

template <typename T>
DepthwiseConv2dLayer<T>::DepthwiseConv2dLayer(ParameterStore<T>& store,
                                              const std::string& name, int channels,
                                              int stride, Initializer<T>& init)
    : stride_(stride) {
  kernel_ = store.add(name + "/depthwise_kernel", init.he_uniform({3, 3, channels}, 9), true);
}

template <typename T>
DenseLayer<T>::DenseLayer(ParameterStore<T>& store, const std::string& name,
                          int in_features, int units, Initializer<T>& init) {
  weight_ = store.add(name + "/kernel", init.he_uniform({in_features, units}, in_features),
                      true);
  bias_ = store.add(name + "/bias", Tensor<T>::zeros({units}), true);
}

template <typename T>
BottleneckBlock<T>::BottleneckBlock(ParameterStore<T>& store, const std::string& name,
                                    int in_channels, const BottleneckSpec& spec,
                                    Initializer<T>& init)
    : name_(name),
      spec_(spec),
      in_channels_(in_channels),
      expanded_(spec.filters * spec.expansion_factor),
      skip_(spec.stride == 1 && in_channels == spec.filters),
      expand_(store, name + "/expand", 1, in_channels, expanded_, 1, init),
      expand_bn_(store, name + "/expand_bn", expanded_),
      depthwise_(store, name + "/depthwise", expanded_, spec.stride, init),
      depthwise_bn_(store, name + "/depthwise_bn", expanded_),
      project_(store, name + "/project", 1, expanded_, spec.filters, 1, init),
      project_bn_(store, name + "/project_bn", spec.filters) {}

template <typename T>
Tensor<T> BottleneckBlock<T>::forward(const Tensor<T>& x, Mode mode, Trace* trace) {
  Tensor<T> h = activation(expand_bn_.forward(expand_.forward(x), mode), Activation::kRelu6);
  h = activation(depthwise_bn_.forward(depthwise_.forward(h), mode), Activation::kRelu6);
  h = project_bn_.forward(project_.forward(h), mode);
  if (skip_) h = add(h, x);
  record(trace, name_, h, skip_);
  return h;
}

template <typename T>
DenseBlock<T>::DenseBlock(ParameterStore<T>& store, const std::string& name,
                          int in_channels, int num_layers, int growth_rate,
                          Initializer<T>& init)
    : name_(name), out_channels_(in_channels) {
  for (int i = 0; i < num_layers; ++i) {
    const std::string unit = name + "/unit_" + std::to_string(i + 1);
    norms_.emplace_back(store, unit + "/bn", out_channels_);
    convs_.emplace_back(store, unit + "/conv", 3, out_channels_, growth_rate, 1, init);
    out_channels_ += growth_rate;
  }
}

template <typename T>
Tensor<T> DenseBlock<T>::forward(const Tensor<T>& x, Mode mode, Trace* trace) {
  Tensor<T> current = x;
  for (size_t i = 0; i < convs_.size(); ++i) {
    Tensor<T> y = convs_[i].forward(
        activation(norms_[i].forward(current, mode), Activation::kRelu));
    current = concat_channels(current, y);
  }
  record(trace, name_, current);
  return current;
}

template <typename T>
TransitionLayer<T>::TransitionLayer(ParameterStore<T>& store, const std::string& name,
                                    int in_channels, double reduction,
                                    Initializer<T>& init)
    : name_(name),
      out_channels_(transition_channels(in_channels, reduction)),
      bn_(store, name + "/bn", in_channels),
      conv_(store, name + "/conv", 1, in_channels, out_channels_, 1, init) {}

template <typename T>
Tensor<T> TransitionLayer<T>::forward(const Tensor<T>& x, Mode mode, Trace* trace) {
  Tensor<T> h = conv_.forward(activation(bn_.forward(x, mode), Activation::kRelu));
  h = avg_pool2x2(h);
  record(trace, name_, h);
  return h;
}

template class Initializer<float>;
template class Initializer<double>;
template class Initializer<long double>;
template class BatchNormLayer<float>;
template class BatchNormLayer<double>;
template class BatchNormLayer<long double>;
template class Conv2dLayer<float>;
template class Conv2dLayer<double>;
template class Conv2dLayer<long double>;
template class DepthwiseConv2dLayer<float>;
template class DepthwiseConv2dLayer<double>;
template class DepthwiseConv2dLayer<long double>;
template class DenseLayer<float>;
template class DenseLayer<double>;
template class DenseLayer<long double>;
template class BottleneckBlock<float>;
template class BottleneckBlock<double>;
template class BottleneckBlock<long double>;
template class DenseBlock<float>;
template class DenseBlock<double>;
template class DenseBlock<long double>;
template class TransitionLayer<float>;
template class TransitionLayer<double>;
template class TransitionLayer<long double>;

}  // namespace mrdlinet
