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

#include "mrdlinet/model.h"

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {

template <typename T>
Model<T>::Model(const ArchitectureConfig& config, uint64_t seed) : config_(config) {
  config_.validate();
  Initializer<T> init(derive_seed(seed, "model-init"));
  const ArchitectureConfig& c = config_;

  int channels = c.scaled(c.stem_filters);
  stem_conv_ = Conv2dLayer<T>(params_, "stem/conv", 3, ArchitectureConfig::kInputChannels,
                              channels, 2, init);
  stem_bn_ = BatchNormLayer<T>(params_, "stem/bn", channels);

  int index = 1;
  auto add_bottleneck = [&](const BottleneckSpec& raw) {
    BottleneckSpec spec = raw;
    spec.filters = c.scaled(raw.filters);
    bottlenecks_.emplace_back(params_, fmt::format("bottleneck_{}", index++), channels,
                              spec, init);
    channels = spec.filters;
  };
  for (const auto& spec : c.pre_dense) add_bottleneck(spec);
  num_pre_dense_ = bottlenecks_.size();

  dense_block_ = DenseBlock<T>(params_, "dense_block", channels, c.dense_block.num_layers,
                               c.scaled(c.dense_block.growth_rate), init);
  channels = dense_block_.out_channels();
  transition_ = TransitionLayer<T>(params_, "transition", channels,
                                   c.transition_reduction, init);
  channels = transition_.out_channels();

  for (const auto& spec : c.post_transition) add_bottleneck(spec);

  const int units = c.scaled(c.head_units);
  head_ = DenseLayer<T>(params_, "head", channels, units, init);
  output_ = DenseLayer<T>(params_, "output", units, 1, init);
  visit_batch_norms([&](BatchNormLayer<T>& bn) { bn.stats().momentum = c.batch_norm_momentum; });
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input, Mode mode, Trace* trace) {
  const Shape& s = input.shape();
  if (s.size() != 4 || s[1] != config_.input_height || s[2] != config_.input_width ||
      s[3] != ArchitectureConfig::kInputChannels) {
    throw DimensionError(fmt::format("model expects [N,{},{},3] input, got {}",
                                     config_.input_height, config_.input_width,
                                     shape_string(s)));
  }
  if (trace) trace->push_back({"input", s, false});
  Tensor<T> h = activation(stem_bn_.forward(stem_conv_.forward(input), mode),
                           Activation::kRelu6);
  if (trace) trace->push_back({"stem", h.shape(), false});
  for (size_t i = 0; i < num_pre_dense_; ++i) h = bottlenecks_[i].forward(h, mode, trace);
  h = dense_block_.forward(h, mode, trace);
  h = transition_.forward(h, mode, trace);
  for (size_t i = num_pre_dense_; i < bottlenecks_.size(); ++i) {
    h = bottlenecks_[i].forward(h, mode, trace);
  }
  h = global_avg_pool(h);
  if (trace) trace->push_back({"global_avg_pool", h.shape(), false});
  h = activation(head_.forward(h), Activation::kRelu);
  if (trace) trace->push_back({"head", h.shape(), false});
  h = activation(output_.forward(h), Activation::kSigmoid);
  if (trace) trace->push_back({"output", h.shape(), false});
  return h;
}

template <typename T>
template <typename F>
void Model<T>::visit_batch_norms(F&& f) {
  f(stem_bn_);
  for (auto& b : bottlenecks_) b.visit_batch_norms(f);
  dense_block_.visit_batch_norms(f);
  transition_.visit_batch_norms(f);
}

template <typename T>
bool Model<T>::statistics_initialized() const {
  bool all = true;
  const_cast<Model*>(this)->visit_batch_norms(
      [&](BatchNormLayer<T>& bn) { all = all && bn.stats().initialized; });
  return all;
}

template <typename T>
void Model<T>::set_statistics_initialized(bool value) {
  visit_batch_norms([&](BatchNormLayer<T>& bn) { bn.stats().initialized = value; });
}

template <typename T>
Model<T> Model<T>::copy() const {
  Model out(config_, 0);
  out.params_.copy_values_from(params_);
  out.set_statistics_initialized(statistics_initialized());
  return out;
}

template <typename T>
std::unique_ptr<Classifier<T>> Model<T>::clone() const {
  return std::make_unique<Model>(copy());
}

template <typename T>
ParameterCount count_parameters(const ParameterStore<T>& params) {
  ParameterCount count;
  for (const auto& p : params.entries()) {
    count.rows.push_back({p.name, p.tensor.shape(), p.tensor.numel(), p.trainable});
    (p.trainable ? count.trainable : count.non_trainable) += p.tensor.numel();
  }
  return count;
}

template class Model<float>;
template class Model<double>;
template class Model<long double>;
template ParameterCount count_parameters(const ParameterStore<float>&);
template ParameterCount count_parameters(const ParameterStore<double>&);

}  // namespace mrdlinet
