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

#ifndef MRDLINET_PARAMETER_STORE_H_
#define MRDLINET_PARAMETER_STORE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mrdlinet/tensor.h"

namespace mrdlinet {

template <typename T>
struct NamedParameter {
  std::string name;
  Tensor<T> tensor;
  bool trainable = true;
};

// Named parameter tensors in insertion order. The order is part of the
// contract: gradient concatenation and serialization both follow it.
template <typename T>
class ParameterStore {
 public:
  // Registers a tensor. Trainable tensors get requires_grad set.
  Tensor<T> add(std::string name, Tensor<T> tensor, bool trainable);

  const Tensor<T>& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  const std::vector<NamedParameter<T>>& entries() const { return entries_; }
  size_t size() const { return entries_.size(); }

  int64_t trainable_count() const;
  int64_t non_trainable_count() const;

  void zero_grad();

  // Copies values (not handles) from `other`; names, order and shapes must
  // match exactly.
  void copy_values_from(const ParameterStore& other);

 private:
  std::vector<NamedParameter<T>> entries_;
  std::map<std::string, size_t> index_;
};

extern template class ParameterStore<float>;
extern template class ParameterStore<double>;
extern template class ParameterStore<long double>;

}  // namespace mrdlinet

#endif  // MRDLINET_PARAMETER_STORE_H_
