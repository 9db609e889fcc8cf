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

#include "mrdlinet/tensor.h"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {
namespace {

thread_local bool g_grad_enabled = true;

template <typename T>
bool all_finite(std::span<const T> values) {
  return std::all_of(values.begin(), values.end(),
                     [](T v) { return std::isfinite(v); });
}

}  // namespace

int64_t shape_numel(const Shape& shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    if (d < 0) throw DimensionError("negative extent in shape " + shape_string(shape));
    n *= d;
  }
  return n;
}

std::string shape_string(const Shape& shape) {
  return fmt::format("[{}]", fmt::join(shape, ","));
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }
bool NoGradGuard::grad_enabled() { return g_grad_enabled; }

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad) {
  if (shape_numel(shape) != static_cast<int64_t>(values.size())) {
    throw DimensionError(fmt::format("shape {} holds {} values, got {}",
                                     shape_string(shape), shape_numel(shape),
                                     values.size()));
  }
  impl_ = std::make_shared<internal::TensorImpl<T>>();
  impl_->shape = std::move(shape);
  impl_->data = std::move(values);
  impl_->requires_grad = requires_grad;
}

template <typename T>
Tensor<T> Tensor<T>::zeros(Shape shape, bool requires_grad) {
  return full(std::move(shape), T(0), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  const int64_t n = shape_numel(shape);
  return Tensor(std::move(shape), std::vector<T>(n, value), requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::scalar(T value, bool requires_grad) {
  return Tensor(Shape{}, std::vector<T>{value}, requires_grad);
}

template <typename T>
int64_t Tensor<T>::dim(int axis) const {
  if (axis < 0) axis += rank();
  if (axis < 0 || axis >= rank()) {
    throw DimensionError(fmt::format("axis {} out of range for shape {}", axis,
                                     shape_string(shape())));
  }
  return impl_->shape[axis];
}

template <typename T>
std::span<T> Tensor<T>::mutable_data() {
  if (!is_leaf()) throw ContractError("cannot mutate the output of a recorded op");
  return impl_->data;
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) {
    throw ContractError("item() on tensor of shape " + shape_string(shape()));
  }
  return impl_->data[0];
}

template <typename T>
void Tensor<T>::set_requires_grad(bool value) {
  if (!is_leaf() && !value) {
    throw ContractError("cannot clear requires_grad on a recorded op output");
  }
  impl_->requires_grad = value;
}

template <typename T>
std::string Tensor<T>::op_name() const {
  return impl_->grad_fn ? impl_->grad_fn->op : std::string();
}

template <typename T>
void Tensor<T>::zero_grad() {
  impl_->grad.clear();
}

template <typename T>
Tensor<T> Tensor<T>::clone() const {
  return Tensor(impl_->shape, impl_->data, is_leaf() && impl_->requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::from_op(std::string op, Shape shape, std::vector<T> values,
                             std::vector<Tensor> inputs,
                             internal::BackwardFn<T> backward) {
  if (!all_finite<T>(values)) {
    throw NumericError(fmt::format("{} produced a non-finite value", op));
  }
  Tensor out(std::move(shape), std::move(values));
  if (!g_grad_enabled) return out;
  const bool track = std::any_of(inputs.begin(), inputs.end(),
                                 [](const Tensor& t) { return t.requires_grad(); });
  if (!track) return out;
  auto fn = std::make_shared<internal::GradFn<T>>();
  fn->op = std::move(op);
  fn->inputs.reserve(inputs.size());
  for (const Tensor& t : inputs) fn->inputs.push_back(t.impl_);
  fn->backward = std::move(backward);
  out.impl_->grad_fn = std::move(fn);
  out.impl_->requires_grad = true;
  return out;
}

template <typename T>
void Tensor<T>::backward() const {
  using Impl = internal::TensorImpl<T>;
  if (numel() != 1) {
    throw ContractError("backward() requires a scalar, got shape " +
                        shape_string(shape()));
  }
  if (!std::isfinite(impl_->data[0])) {
    throw NumericError("backward() on a non-finite loss");
  }
  if (!impl_->requires_grad) return;

  // Iterative post-order DFS gives a topological order.
  std::vector<Impl*> order;
  std::unordered_set<Impl*> visited;
  std::vector<std::pair<Impl*, size_t>> stack;
  stack.emplace_back(impl_.get(), 0);
  visited.insert(impl_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    const size_t n_inputs = node->grad_fn ? node->grad_fn->inputs.size() : 0;
    if (next < n_inputs) {
      Impl* child = node->grad_fn->inputs[next++].get();
      if (child->requires_grad && visited.insert(child).second) {
        stack.emplace_back(child, 0);
      }
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  // Gradients of this pass live in `pending` so that previously
  // accumulated values never get propagated a second time.
  std::unordered_map<Impl*, std::vector<T>> pending;
  pending[impl_.get()] = std::vector<T>(1, T(1));
  std::vector<std::span<T>> input_spans;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Impl* node = *it;
    auto found = pending.find(node);
    if (found == pending.end()) continue;
    std::vector<T> grad = std::move(found->second);
    pending.erase(found);

    if (node->grad.empty()) {
      node->grad = grad;
    } else {
      for (size_t i = 0; i < grad.size(); ++i) node->grad[i] += grad[i];
    }
    if (!node->grad_fn) continue;

    input_spans.clear();
    for (const auto& input : node->grad_fn->inputs) {
      if (!input->requires_grad) {
        input_spans.emplace_back();
        continue;
      }
      auto& buffer = pending[input.get()];
      if (buffer.empty()) buffer.assign(input->data.size(), T(0));
      input_spans.emplace_back(buffer);
    }
    node->grad_fn->backward(std::span<const T>(grad), input_spans);
  }
}

template class Tensor<float>;
template class Tensor<double>;
template class Tensor<long double>;

}  // namespace mrdlinet
