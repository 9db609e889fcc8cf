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

#include "mrdlinet/parameter_store.h"

#include <algorithm>
#include <utility>

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {

template <typename T>
Tensor<T> ParameterStore<T>::add(std::string name, Tensor<T> tensor, bool trainable) {
  if (index_.contains(name)) {
    throw ContractError(fmt::format("duplicate parameter name '{}'", name));
  }
  if (!tensor.is_leaf()) throw ContractError("parameters must be leaf tensors");
  tensor.set_requires_grad(trainable);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), tensor, trainable});
  return tensor;
}

template <typename T>
const Tensor<T>& ParameterStore<T>::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw ContractError(fmt::format("unknown parameter '{}'", name));
  return entries_[it->second].tensor;
}

template <typename T>
int64_t ParameterStore<T>::trainable_count() const {
  int64_t n = 0;
  for (const auto& p : entries_) n += p.trainable ? p.tensor.numel() : 0;
  return n;
}

template <typename T>
int64_t ParameterStore<T>::non_trainable_count() const {
  int64_t n = 0;
  for (const auto& p : entries_) n += p.trainable ? 0 : p.tensor.numel();
  return n;
}

template <typename T>
void ParameterStore<T>::zero_grad() {
  for (auto& p : entries_) p.tensor.zero_grad();
}

template <typename T>
void ParameterStore<T>::copy_values_from(const ParameterStore& other) {
  if (other.entries_.size() != entries_.size()) {
    throw ContractError("parameter stores differ in size");
  }
  for (size_t i = 0; i < entries_.size(); ++i) {
    auto& dst = entries_[i];
    const auto& src = other.entries_[i];
    if (dst.name != src.name || dst.tensor.shape() != src.tensor.shape()) {
      throw ContractError(fmt::format("parameter mismatch at '{}' vs '{}'", dst.name,
                                      src.name));
    }
    std::ranges::copy(src.tensor.data(), dst.tensor.mutable_data().begin());
  }
}

template class ParameterStore<float>;
template class ParameterStore<double>;
template class ParameterStore<long double>;

}  // namespace mrdlinet
