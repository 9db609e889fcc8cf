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

#ifndef MRDLINET_CLASSIFIER_H_
#define MRDLINET_CLASSIFIER_H_

#include <memory>

#include "mrdlinet/parameter_store.h"
#include "mrdlinet/tensor.h"

namespace mrdlinet {

// A differentiable binary classifier: maps a batch of inputs to [N,1]
// probabilities of the positive (stressed) class. Influence scoring and
// evaluation only depend on this surface.
template <typename T>
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual Tensor<T> forward(const Tensor<T>& input, Mode mode) = 0;

  virtual ParameterStore<T>& parameters() = 0;
  virtual const ParameterStore<T>& parameters() const = 0;

  // False while inference-mode statistics (batch-norm running averages)
  // have never been populated.
  virtual bool statistics_initialized() const = 0;

  // Independent deep copy, safe to drive from another thread.
  virtual std::unique_ptr<Classifier<T>> clone() const = 0;
};

}  // namespace mrdlinet

#endif  // MRDLINET_CLASSIFIER_H_
