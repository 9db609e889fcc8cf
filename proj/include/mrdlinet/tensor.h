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

#ifndef MRDLINET_TENSOR_H_
#define MRDLINET_TENSOR_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

namespace mrdlinet {

// Accumulator for reductions: at least double, wider when T is wider.
template <typename T>
using Accumulator = std::conditional_t<(sizeof(T) > sizeof(double)), T, double>;

// Ordered list of extents. Image tensors use NHWC layout.
using Shape = std::vector<int64_t>;

int64_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

// Whether batch-norm layers use batch statistics (and update their running
// averages) or the stored running statistics.
enum class Mode { kTrain, kInfer };

template <typename T>
class Tensor;

namespace internal {

template <typename T>
struct TensorImpl;

// Backward closure of one recorded op. `grad_output` is dL/d(output); the
// closure adds dL/d(input_i) into `grad_inputs[i]`, which is empty when
// input i does not require a gradient. Closures must accumulate (+=), since
// the same buffer is handed out twice when an op consumes a tensor twice.
template <typename T>
using BackwardFn = std::function<void(std::span<const T> grad_output,
                                      std::span<const std::span<T>> grad_inputs)>;

template <typename T>
struct GradFn {
  std::string op;
  std::vector<std::shared_ptr<TensorImpl<T>>> inputs;
  BackwardFn<T> backward;
};

template <typename T>
struct TensorImpl {
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until a backward pass reaches this tensor
  bool requires_grad = false;
  std::shared_ptr<GradFn<T>> grad_fn;
};

}  // namespace internal

// Disables graph recording on the current thread while alive. Ops still
// compute values; their results simply carry no backward closure.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

  static bool grad_enabled();

 private:
  bool previous_;
};

// Reference-counted n-dimensional array with optional reverse-mode gradient
// tracking. Copies share storage (handle semantics), use clone() for a deep
// copy. A default-constructed Tensor is undefined and only valid as a
// placeholder.
//
// Every op checks its output for NaN/Inf and throws NumericError.
template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int rank() const { return static_cast<int>(impl_->shape.size()); }
  int64_t dim(int axis) const;
  int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

  std::span<const T> data() const { return impl_->data; }
  // Writable view; only leaves (tensors not produced by a recorded op) may
  // be mutated in place.
  std::span<T> mutable_data();
  T item() const;

  bool requires_grad() const { return impl_->requires_grad; }
  void set_requires_grad(bool value);
  bool is_leaf() const { return impl_->grad_fn == nullptr; }
  // Name of the op that produced this tensor, empty for leaves.
  std::string op_name() const;

  bool has_grad() const { return !impl_->grad.empty(); }
  std::span<const T> grad() const { return impl_->grad; }
  // Resets the accumulated gradient. backward() accumulates, so callers
  // that need isolated gradients must zero between passes.
  void zero_grad();

  // Populates grad on every tensor in the graph that requires one, adding
  // to any previously accumulated value. The tensor must be a finite
  // scalar.
  void backward() const;

  // Deep copy of values without graph history.
  Tensor clone() const;

  // Builds an op result. The backward closure is only attached when grad
  // mode is on and at least one input requires a gradient.
  static Tensor from_op(std::string op, Shape shape, std::vector<T> values,
                        std::vector<Tensor> inputs,
                        internal::BackwardFn<T> backward);

  internal::TensorImpl<T>* impl() const { return impl_.get(); }

  bool same_storage(const Tensor& other) const { return impl_ == other.impl_; }

 private:
  std::shared_ptr<internal::TensorImpl<T>> impl_;
};

extern template class Tensor<float>;
extern template class Tensor<double>;
// Extended precision, used as a finite-difference reference in tests.
extern template class Tensor<long double>;

}  // namespace mrdlinet

#endif  // MRDLINET_TENSOR_H_
