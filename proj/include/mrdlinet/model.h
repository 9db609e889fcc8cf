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

#ifndef MRDLINET_MODEL_H_
#define MRDLINET_MODEL_H_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "mrdlinet/architecture.h"
#include "mrdlinet/classifier.h"
#include "mrdlinet/layers.h"
#include "mrdlinet/parameter_store.h"

namespace mrdlinet {

// The full network built from an ArchitectureConfig. Parameters are
// registered in layer order, which fixes gradient concatenation and file
// layout.
template <typename T>
class Model final : public Classifier<T> {
 public:
  Model(const ArchitectureConfig& config, uint64_t seed);
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // input [N, input_height, input_width, 3] -> [N, 1] in (0, 1).
  Tensor<T> forward(const Tensor<T>& input, Mode mode) override {
    return forward(input, mode, nullptr);
  }
  Tensor<T> forward(const Tensor<T>& input, Mode mode, Trace* trace);

  ParameterStore<T>& parameters() override { return params_; }
  const ParameterStore<T>& parameters() const override { return params_; }

  bool statistics_initialized() const override;
  void set_statistics_initialized(bool value);

  std::unique_ptr<Classifier<T>> clone() const override;
  Model copy() const;

  const ArchitectureConfig& config() const { return config_; }
  const std::vector<BottleneckBlock<T>>& bottlenecks() const { return bottlenecks_; }
  const DenseBlock<T>& dense_block() const { return dense_block_; }

 private:
  template <typename F>
  void visit_batch_norms(F&& f);

  ArchitectureConfig config_;
  ParameterStore<T> params_;
  Conv2dLayer<T> stem_conv_;
  BatchNormLayer<T> stem_bn_;
  // Pre-dense blocks first, then post-transition blocks.
  std::vector<BottleneckBlock<T>> bottlenecks_;
  size_t num_pre_dense_ = 0;
  DenseBlock<T> dense_block_;
  TransitionLayer<T> transition_;
  DenseLayer<T> head_;
  DenseLayer<T> output_;
};

template <typename T>
Model<T> build_model(const ArchitectureConfig& config, uint64_t seed) {
  return Model<T>(config, seed);
}

struct ParameterRow {
  std::string name;
  Shape shape;
  int64_t count = 0;
  bool trainable = true;
};

struct ParameterCount {
  int64_t trainable = 0;
  int64_t non_trainable = 0;
  std::vector<ParameterRow> rows;
};

template <typename T>
ParameterCount count_parameters(const ParameterStore<T>& params);

template <typename T>
ParameterCount count_parameters(const Model<T>& model) {
  return count_parameters(model.parameters());
}

extern template class Model<float>;
extern template class Model<double>;
extern template class Model<long double>;

}  // namespace mrdlinet

#endif  // MRDLINET_MODEL_H_
