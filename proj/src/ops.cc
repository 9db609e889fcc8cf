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

#include "mrdlinet/ops.h"

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "fmt/format.h"
#include "mrdlinet/error.h"

namespace mrdlinet {
namespace {

void require_rank(const Shape& shape, int rank, const char* op, const char* what) {
  if (static_cast<int>(shape.size()) != rank) {
    throw DimensionError(fmt::format("{}: {} must have rank {}, got {}", op, what,
                                     rank, shape_string(shape)));
  }
}

void require_defined_stride(int stride, const char* op) {
  if (stride < 1) throw DimensionError(fmt::format("{}: stride must be >= 1", op));
}

// Geometry shared by conv2d and depthwise_conv2d.
struct WindowGeometry {
  int64_t n, h, w, c;
  int64_t kh, kw;
  int64_t out_h, out_w;
  int64_t pad_top, pad_left;
  int stride;
};

WindowGeometry window_geometry(const Shape& in, int64_t kh, int64_t kw, int stride,
                               Padding padding, const char* op) {
  WindowGeometry g{in[0], in[1], in[2], in[3], kh, kw, 0, 0, 0, 0, stride};
  if (kh < 1 || kw < 1) throw DimensionError(fmt::format("{}: empty kernel", op));
  if (padding == Padding::kValid && (kh > g.h || kw > g.w)) {
    throw DimensionError(fmt::format("{}: kernel {}x{} exceeds input {}x{}", op, kh,
                                     kw, g.h, g.w));
  }
  g.out_h = conv_output_extent(g.h, kh, stride, padding);
  g.out_w = conv_output_extent(g.w, kw, stride, padding);
  if (padding == Padding::kSame) {
    g.pad_top = std::max<int64_t>((g.out_h - 1) * stride + kh - g.h, 0) / 2;
    g.pad_left = std::max<int64_t>((g.out_w - 1) * stride + kw - g.w, 0) / 2;
  }
  return g;
}

}  // namespace

int64_t conv_output_extent(int64_t in, int64_t kernel, int stride, Padding padding) {
  if (stride < 1) throw DimensionError("stride must be >= 1");
  if (padding == Padding::kSame) return (in + stride - 1) / stride;
  if (kernel > in) return 0;
  return (in - kernel) / stride + 1;
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernel, int stride,
                 Padding padding) {
  require_rank(input.shape(), 4, "conv2d", "input");
  require_rank(kernel.shape(), 4, "conv2d", "kernel");
  require_defined_stride(stride, "conv2d");
  const int64_t cin = input.dim(3);
  const int64_t cout = kernel.dim(3);
  if (kernel.dim(2) != cin) {
    throw DimensionError(fmt::format("conv2d: input has {} channels, kernel expects {}",
                                     cin, kernel.dim(2)));
  }
  const WindowGeometry g =
      window_geometry(input.shape(), kernel.dim(0), kernel.dim(1), stride, padding,
                      "conv2d");

  std::vector<T> out(g.n * g.out_h * g.out_w * cout, T(0));
  const T* x = input.data().data();
  const T* k = kernel.data().data();
  for (int64_t n = 0; n < g.n; ++n) {
    for (int64_t oy = 0; oy < g.out_h; ++oy) {
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        T* o = out.data() + ((n * g.out_h + oy) * g.out_w + ox) * cout;
        for (int64_t ky = 0; ky < g.kh; ++ky) {
          const int64_t iy = oy * stride - g.pad_top + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int64_t kx = 0; kx < g.kw; ++kx) {
            const int64_t ix = ox * stride - g.pad_left + kx;
            if (ix < 0 || ix >= g.w) continue;
            const T* xp = x + ((n * g.h + iy) * g.w + ix) * cin;
            const T* kp = k + (ky * g.kw + kx) * cin * cout;
            for (int64_t ci = 0; ci < cin; ++ci) {
              const T v = xp[ci];
              const T* kr = kp + ci * cout;
              for (int64_t co = 0; co < cout; ++co) o[co] += v * kr[co];
            }
          }
        }
      }
    }
  }

  auto backward = [input, kernel, g, cin, cout](std::span<const T> grad_out,
                                                std::span<const std::span<T>> grads) {
    std::span<T> dx = grads[0];
    std::span<T> dk = grads[1];
    const T* x = input.data().data();
    const T* k = kernel.data().data();
    for (int64_t n = 0; n < g.n; ++n) {
      for (int64_t oy = 0; oy < g.out_h; ++oy) {
        for (int64_t ox = 0; ox < g.out_w; ++ox) {
          const T* go = grad_out.data() + ((n * g.out_h + oy) * g.out_w + ox) * cout;
          for (int64_t ky = 0; ky < g.kh; ++ky) {
            const int64_t iy = oy * g.stride - g.pad_top + ky;
            if (iy < 0 || iy >= g.h) continue;
            for (int64_t kx = 0; kx < g.kw; ++kx) {
              const int64_t ix = ox * g.stride - g.pad_left + kx;
              if (ix < 0 || ix >= g.w) continue;
              const int64_t x_offset = ((n * g.h + iy) * g.w + ix) * cin;
              const int64_t k_offset = (ky * g.kw + kx) * cin * cout;
              for (int64_t ci = 0; ci < cin; ++ci) {
                const T* kr = k + k_offset + ci * cout;
                if (!dx.empty()) {
                  T acc = 0;
                  for (int64_t co = 0; co < cout; ++co) acc += go[co] * kr[co];
                  dx[x_offset + ci] += acc;
                }
                if (!dk.empty()) {
                  const T v = x[x_offset + ci];
                  T* dkr = dk.data() + k_offset + ci * cout;
                  for (int64_t co = 0; co < cout; ++co) dkr[co] += v * go[co];
                }
              }
            }
          }
        }
      }
    }
  };
  return Tensor<T>::from_op("conv2d", {g.n, g.out_h, g.out_w, cout}, std::move(out),
                            {input, kernel}, std::move(backward));
}

template <typename T>
Tensor<T> depthwise_conv2d(const Tensor<T>& input, const Tensor<T>& kernel,
                           int stride, Padding padding) {
  require_rank(input.shape(), 4, "depthwise_conv2d", "input");
  require_rank(kernel.shape(), 3, "depthwise_conv2d", "kernel");
  require_defined_stride(stride, "depthwise_conv2d");
  const int64_t c = input.dim(3);
  if (kernel.dim(2) != c) {
    throw DimensionError(fmt::format(
        "depthwise_conv2d: input has {} channels, kernel has {}", c, kernel.dim(2)));
  }
  const WindowGeometry g = window_geometry(input.shape(), kernel.dim(0), kernel.dim(1),
                                           stride, padding, "depthwise_conv2d");

  std::vector<T> out(g.n * g.out_h * g.out_w * c, T(0));
  const T* x = input.data().data();
  const T* k = kernel.data().data();
  for (int64_t n = 0; n < g.n; ++n) {
    for (int64_t oy = 0; oy < g.out_h; ++oy) {
      for (int64_t ox = 0; ox < g.out_w; ++ox) {
        T* o = out.data() + ((n * g.out_h + oy) * g.out_w + ox) * c;
        for (int64_t ky = 0; ky < g.kh; ++ky) {
          const int64_t iy = oy * stride - g.pad_top + ky;
          if (iy < 0 || iy >= g.h) continue;
          for (int64_t kx = 0; kx < g.kw; ++kx) {
            const int64_t ix = ox * stride - g.pad_left + kx;
            if (ix < 0 || ix >= g.w) continue;
            const T* xp = x + ((n * g.h + iy) * g.w + ix) * c;
            const T* kp = k + (ky * g.kw + kx) * c;
            for (int64_t ch = 0; ch < c; ++ch) o[ch] += xp[ch] * kp[ch];
          }
        }
      }
    }
  }

  auto backward = [input, kernel, g, c](std::span<const T> grad_out,
                                        std::span<const std::span<T>> grads) {
    std::span<T> dx = grads[0];
    std::span<T> dk = grads[1];
    const T* x = input.data().data();
    const T* k = kernel.data().data();
    for (int64_t n = 0; n < g.n; ++n) {
      for (int64_t oy = 0; oy < g.out_h; ++oy) {
        for (int64_t ox = 0; ox < g.out_w; ++ox) {
          const T* go = grad_out.data() + ((n * g.out_h + oy) * g.out_w + ox) * c;
          for (int64_t ky = 0; ky < g.kh; ++ky) {
            const int64_t iy = oy * g.stride - g.pad_top + ky;
            if (iy < 0 || iy >= g.h) continue;
            for (int64_t kx = 0; kx < g.kw; ++kx) {
              const int64_t ix = ox * g.stride - g.pad_left + kx;
              if (ix < 0 || ix >= g.w) continue;
              const int64_t x_offset = ((n * g.h + iy) * g.w + ix) * c;
              const int64_t k_offset = (ky * g.kw + kx) * c;
              if (!dx.empty()) {
                for (int64_t ch = 0; ch < c; ++ch) dx[x_offset + ch] += go[ch] * k[k_offset + ch];
              }
              if (!dk.empty()) {
                for (int64_t ch = 0; ch < c; ++ch) dk[k_offset + ch] += go[ch] * x[x_offset + ch];
              }
            }
          }
        }
      }
    }
  };
  return Tensor<T>::from_op("depthwise_conv2d", {g.n, g.out_h, g.out_w, c},
                            std::move(out), {input, kernel}, std::move(backward));
}

template <typename T>
Tensor<T> batch_norm(const Tensor<T>& input, const Tensor<T>& gamma,
                     const Tensor<T>& beta, RunningStats<T>& stats, Mode mode) {
  if (input.rank() < 2) {
    throw DimensionError("batch_norm: input must have a channel axis, got " +
                         shape_string(input.shape()));
  }
  const int64_t c = input.dim(-1);
  const int64_t m = input.numel() / std::max<int64_t>(c, 1);
  const std::initializer_list<const Tensor<T>*> per_channel = {
      &gamma, &beta, &stats.moving_mean, &stats.moving_variance};
  for (const Tensor<T>* t : per_channel) {
    if (t->shape() != Shape{c}) {
      throw DimensionError(fmt::format("batch_norm: expected per-channel shape [{}], got {}",
                                       c, shape_string(t->shape())));
    }
  }

  const T* x = input.data().data();
  std::vector<T> mean(c), inv_std(c);
  if (mode == Mode::kTrain) {
    if (m < 2) {
      throw DimensionError(fmt::format(
          "batch_norm: train mode needs >= 2 elements per channel, got {}", m));
    }
    using Acc = Accumulator<T>;
    std::vector<Acc> sum(c, 0.0), sum_sq(c, 0.0);
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t ch = 0; ch < c; ++ch) sum[ch] += x[i * c + ch];
    }
    for (int64_t ch = 0; ch < c; ++ch) sum[ch] /= static_cast<Acc>(m);
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t ch = 0; ch < c; ++ch) {
        const Acc d = x[i * c + ch] - sum[ch];
        sum_sq[ch] += d * d;
      }
    }
    std::span<T> running_mean = stats.moving_mean.mutable_data();
    std::span<T> running_var = stats.moving_variance.mutable_data();
    for (int64_t ch = 0; ch < c; ++ch) {
      const Acc var = sum_sq[ch] / static_cast<Acc>(m);
      mean[ch] = static_cast<T>(sum[ch]);
      inv_std[ch] = static_cast<T>(1.0 / std::sqrt(var + kBatchNormEpsilon));
      running_mean[ch] = static_cast<T>(stats.momentum * running_mean[ch] +
                                        (1.0 - stats.momentum) * sum[ch]);
      running_var[ch] = static_cast<T>(stats.momentum * running_var[ch] +
                                       (1.0 - stats.momentum) * var);
    }
    stats.initialized = true;
  } else {
    if (!stats.initialized) {
      throw UninitializedStatisticsError(
          "batch_norm: inference requested before any training pass");
    }
    for (int64_t ch = 0; ch < c; ++ch) {
      mean[ch] = stats.moving_mean.data()[ch];
      inv_std[ch] = static_cast<T>(
          1.0 / std::sqrt(static_cast<Accumulator<T>>(stats.moving_variance.data()[ch]) +
                          kBatchNormEpsilon));
    }
  }

  std::vector<T> xhat(input.numel());
  std::vector<T> out(input.numel());
  const T* g = gamma.data().data();
  const T* b = beta.data().data();
  for (int64_t i = 0; i < m; ++i) {
    for (int64_t ch = 0; ch < c; ++ch) {
      const int64_t j = i * c + ch;
      xhat[j] = (x[j] - mean[ch]) * inv_std[ch];
      out[j] = g[ch] * xhat[j] + b[ch];
    }
  }

  auto backward = [gamma, xhat = std::move(xhat), inv_std, c, m, mode](
                      std::span<const T> grad_out, std::span<const std::span<T>> grads) {
    std::span<T> dx = grads[0];
    std::span<T> dgamma = grads[1];
    std::span<T> dbeta = grads[2];
    std::vector<T> sum_dy(c, T(0)), sum_dy_xhat(c, T(0));
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t ch = 0; ch < c; ++ch) {
        const int64_t j = i * c + ch;
        sum_dy[ch] += grad_out[j];
        sum_dy_xhat[ch] += grad_out[j] * xhat[j];
      }
    }
    if (!dgamma.empty()) {
      for (int64_t ch = 0; ch < c; ++ch) dgamma[ch] += sum_dy_xhat[ch];
    }
    if (!dbeta.empty()) {
      for (int64_t ch = 0; ch < c; ++ch) dbeta[ch] += sum_dy[ch];
    }
    if (dx.empty()) return;
    const T* g = gamma.data().data();
    if (mode == Mode::kInfer) {
      for (int64_t i = 0; i < m; ++i) {
        for (int64_t ch = 0; ch < c; ++ch) {
          dx[i * c + ch] += grad_out[i * c + ch] * g[ch] * inv_std[ch];
        }
      }
      return;
    }
    const T inv_m = T(1) / static_cast<T>(m);
    for (int64_t i = 0; i < m; ++i) {
      for (int64_t ch = 0; ch < c; ++ch) {
        const int64_t j = i * c + ch;
        dx[j] += g[ch] * inv_std[ch] *
                 (grad_out[j] - inv_m * sum_dy[ch] - xhat[j] * inv_m * sum_dy_xhat[ch]);
      }
    }
  };
  return Tensor<T>::from_op("batch_norm", input.shape(), std::move(out),
                            {input, gamma, beta}, std::move(backward));
}

template <typename T>
Tensor<T> activation(const Tensor<T>& input, Activation kind) {
  const auto x = input.data();
  std::vector<T> out(x.size());
  switch (kind) {
    case Activation::kRelu:
      for (size_t i = 0; i < x.size(); ++i) out[i] = x[i] > T(0) ? x[i] : T(0);
      break;
    case Activation::kRelu6:
      for (size_t i = 0; i < x.size(); ++i) out[i] = std::clamp(x[i], T(0), T(6));
      break;
    case Activation::kSigmoid:
      for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] >= T(0)) {
          out[i] = T(1) / (T(1) + std::exp(-x[i]));
        } else {
          const T e = std::exp(x[i]);
          out[i] = e / (T(1) + e);
        }
      }
      break;
  }
  const char* name = kind == Activation::kRelu    ? "relu"
                     : kind == Activation::kRelu6 ? "relu6"
                                                  : "sigmoid";
  // Sigmoid's derivative is expressed through its output.
  std::vector<T> saved = kind == Activation::kSigmoid ? out : std::vector<T>();
  auto backward = [input, kind, saved = std::move(saved)](
                      std::span<const T> grad_out, std::span<const std::span<T>> grads) {
    std::span<T> dx = grads[0];
    const auto x = input.data();
    for (size_t i = 0; i < dx.size(); ++i) {
      T d;
      switch (kind) {
        case Activation::kRelu:
          d = x[i] > T(0) ? T(1) : T(0);
          break;
        case Activation::kRelu6:
          d = (x[i] > T(0) && x[i] < T(6)) ? T(1) : T(0);
          break;
        default:
          d = saved[i] * (T(1) - saved[i]);
          break;
      }
      dx[i] += grad_out[i] * d;
    }
  };
  return Tensor<T>::from_op(name, input.shape(), std::move(out), {input},
                            std::move(backward));
}

template <typename T>
Tensor<T> avg_pool2x2(const Tensor<T>& input) {
  require_rank(input.shape(), 4, "avg_pool2x2", "input");
  const int64_t n = input.dim(0), h = input.dim(1), w = input.dim(2), c = input.dim(3);
  if (h < 2 || w < 2) {
    throw DimensionError("avg_pool2x2: spatial extent must be >= 2, got " +
                         shape_string(input.shape()));
  }
  const int64_t oh = h / 2, ow = w / 2;
  std::vector<T> out(n * oh * ow * c, T(0));
  const T* x = input.data().data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t y = 0; y < oh; ++y) {
      for (int64_t xo = 0; xo < ow; ++xo) {
        T* o = out.data() + ((b * oh + y) * ow + xo) * c;
        for (int64_t dy = 0; dy < 2; ++dy) {
          for (int64_t dx = 0; dx < 2; ++dx) {
            const T* xp = x + ((b * h + 2 * y + dy) * w + 2 * xo + dx) * c;
            for (int64_t ch = 0; ch < c; ++ch) o[ch] += xp[ch];
          }
        }
        for (int64_t ch = 0; ch < c; ++ch) o[ch] *= T(0.25);
      }
    }
  }
  auto backward = [n, h, w, c, oh, ow](std::span<const T> grad_out,
                                       std::span<const std::span<T>> grads) {
    std::span<T> dx = grads[0];
    for (int64_t b = 0; b < n; ++b) {
      for (int64_t y = 0; y < oh; ++y) {
        for (int64_t xo = 0; xo < ow; ++xo) {
          const T* go = grad_out.data() + ((b * oh + y) * ow + xo) * c;
          for (int64_t dy = 0; dy < 2; ++dy) {
            for (int64_t dxo = 0; dxo < 2; ++dxo) {
              T* dp = dx.data() + ((b * h + 2 * y + dy) * w + 2 * xo + dxo) * c;
              for (int64_t ch = 0; ch < c; ++ch) dp[ch] += T(0.25) * go[ch];
            }
          }
        }
      }
    }
  };
  return Tensor<T>::from_op("avg_pool2x2", {n, oh, ow, c}, std::move(out), {input},
                            std::move(backward));
}

template <typename T>
Tensor<T> global_avg_pool(const Tensor<T>& input) {
  require_rank(input.shape(), 4, "global_avg_pool", "input");
  const int64_t n = input.dim(0), c = input.dim(3);
  const int64_t area = input.dim(1) * input.dim(2);
  if (area == 0) {
    throw DimensionError("global_avg_pool: zero-area input " + shape_string(input.shape()));
  }
  std::vector<T> out(n * c, T(0));
  const T* x = input.data().data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t p = 0; p < area; ++p) {
      const T* xp = x + (b * area + p) * c;
      for (int64_t ch = 0; ch < c; ++ch) out[b * c + ch] += xp[ch];
    }
  }
  const T inv_area = T(1) / static_cast<T>(area);
  for (T& v : out) v *= inv_area;
  auto backward = [n, c, area, inv_area](std::span<const T> grad_out,
                                         std::span<const std::span<T>> grads) {
    std::span<T> dx = grads[0];
    for (int64_t b = 0; b < n; ++b) {
      for (int64_t p = 0; p < area; ++p) {
        T* dp = dx.data() + (b * area + p) * c;
        for (int64_t ch = 0; ch < c; ++ch) dp[ch] += grad_out[b * c + ch] * inv_area;
      }
    }
  };
  return Tensor<T>::from_op("global_avg_pool", {n, c}, std::move(out), {input},
                            std::move(backward));
}

namespace {

template <typename T>
std::vector<T> matmul_values(const Tensor<T>& input, const Tensor<T>& weight,
                             const char* op) {
  require_rank(input.shape(), 2, op, "input");
  require_rank(weight.shape(), 2, op, "weight");
  const int64_t n = input.dim(0), d = input.dim(1), u = weight.dim(1);
  if (weight.dim(0) != d) {
    throw DimensionError(fmt::format("{}: inner dimensions {} and {} differ", op, d,
                                     weight.dim(0)));
  }
  std::vector<T> out(n * u, T(0));
  const T* x = input.data().data();
  const T* wt = weight.data().data();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = 0; k < d; ++k) {
      const T v = x[i * d + k];
      for (int64_t j = 0; j < u; ++j) out[i * u + j] += v * wt[k * u + j];
    }
  }
  return out;
}

template <typename T>
void matmul_backward(const Tensor<T>& input, const Tensor<T>& weight,
                     std::span<const T> grad_out, std::span<T> dx, std::span<T> dw) {
  const int64_t n = input.dim(0), d = input.dim(1), u = weight.dim(1);
  const T* x = input.data().data();
  const T* wt = weight.data().data();
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t k = 0; k < d; ++k) {
      const T* go = grad_out.data() + i * u;
      if (!dx.empty()) {
        T acc = 0;
        for (int64_t j = 0; j < u; ++j) acc += go[j] * wt[k * u + j];
        dx[i * d + k] += acc;
      }
      if (!dw.empty()) {
        const T v = x[i * d + k];
        for (int64_t j = 0; j < u; ++j) dw[k * u + j] += v * go[j];
      }
    }
  }
}

}  // namespace

template <typename T>
Tensor<T> matmul(const Tensor<T>& input, const Tensor<T>& weight) {
  std::vector<T> out = matmul_values(input, weight, "matmul");
  auto backward = [input, weight](std::span<const T> grad_out,
                                  std::span<const std::span<T>> grads) {
    matmul_backward(input, weight, grad_out, grads[0], grads[1]);
  };
  return Tensor<T>::from_op("matmul", {input.dim(0), weight.dim(1)}, std::move(out),
                            {input, weight}, std::move(backward));
}

template <typename T>
Tensor<T> dense(const Tensor<T>& input, const Tensor<T>& weight, const Tensor<T>& bias) {
  std::vector<T> out = matmul_values(input, weight, "dense");
  const int64_t n = input.dim(0), u = weight.dim(1);
  if (bias.shape() != Shape{u}) {
    throw DimensionError(fmt::format("dense: bias must be [{}], got {}", u,
                                     shape_string(bias.shape())));
  }
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < u; ++j) out[i * u + j] += bias.data()[j];
  }
  auto backward = [input, weight, n, u](std::span<const T> grad_out,
                                        std::span<const std::span<T>> grads) {
    matmul_backward(input, weight, grad_out, grads[0], grads[1]);
    std::span<T> db = grads[2];
    if (db.empty()) return;
    for (int64_t i = 0; i < n; ++i) {
      for (int64_t j = 0; j < u; ++j) db[j] += grad_out[i * u + j];
    }
  };
  return Tensor<T>::from_op("dense", {n, u}, std::move(out), {input, weight, bias},
                            std::move(backward));
}

template <typename T>
Tensor<T> concat_channels(const Tensor<T>& a, const Tensor<T>& b) {
  require_rank(a.shape(), 4, "concat_channels", "a");
  require_rank(b.shape(), 4, "concat_channels", "b");
  for (int axis = 0; axis < 3; ++axis) {
    if (a.dim(axis) != b.dim(axis)) {
      throw DimensionError(fmt::format("concat_channels: {} vs {}", shape_string(a.shape()),
                                       shape_string(b.shape())));
    }
  }
  const int64_t ca = a.dim(3), cb = b.dim(3), c = ca + cb;
  const int64_t rows = a.dim(0) * a.dim(1) * a.dim(2);
  std::vector<T> out(rows * c);
  for (int64_t p = 0; p < rows; ++p) {
    std::copy_n(a.data().data() + p * ca, ca, out.data() + p * c);
    std::copy_n(b.data().data() + p * cb, cb, out.data() + p * c + ca);
  }
  auto backward = [rows, ca, cb, c](std::span<const T> grad_out,
                                    std::span<const std::span<T>> grads) {
    for (int64_t p = 0; p < rows; ++p) {
      const T* go = grad_out.data() + p * c;
      if (!grads[0].empty()) {
        for (int64_t ch = 0; ch < ca; ++ch) grads[0][p * ca + ch] += go[ch];
      }
      if (!grads[1].empty()) {
        for (int64_t ch = 0; ch < cb; ++ch) grads[1][p * cb + ch] += go[ca + ch];
      }
    }
  };
  return Tensor<T>::from_op("concat_channels", {a.dim(0), a.dim(1), a.dim(2), c},
                            std::move(out), {a, b}, std::move(backward));
}

template <typename T>
Tensor<T> slice_channels(const Tensor<T>& input, int64_t begin, int64_t end) {
  require_rank(input.shape(), 4, "slice_channels", "input");
  const int64_t c = input.dim(3);
  if (begin < 0 || end > c || begin > end) {
    throw DimensionError(fmt::format("slice_channels: [{}, {}) outside {} channels",
                                     begin, end, c));
  }
  const int64_t width = end - begin;
  const int64_t rows = input.dim(0) * input.dim(1) * input.dim(2);
  std::vector<T> out(rows * width);
  for (int64_t p = 0; p < rows; ++p) {
    std::copy_n(input.data().data() + p * c + begin, width, out.data() + p * width);
  }
  auto backward = [rows, c, begin, width](std::span<const T> grad_out,
                                          std::span<const std::span<T>> grads) {
    for (int64_t p = 0; p < rows; ++p) {
      for (int64_t ch = 0; ch < width; ++ch) {
        grads[0][p * c + begin + ch] += grad_out[p * width + ch];
      }
    }
  };
  return Tensor<T>::from_op("slice_channels",
                            {input.dim(0), input.dim(1), input.dim(2), width},
                            std::move(out), {input}, std::move(backward));
}

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("add: {} vs {}", shape_string(a.shape()),
                                     shape_string(b.shape())));
  }
  std::vector<T> out(a.numel());
  for (int64_t i = 0; i < a.numel(); ++i) out[i] = a.data()[i] + b.data()[i];
  auto backward = [](std::span<const T> grad_out, std::span<const std::span<T>> grads) {
    for (const std::span<T>& g : grads) {
      for (size_t i = 0; i < g.size(); ++i) g[i] += grad_out[i];
    }
  };
  return Tensor<T>::from_op("add", a.shape(), std::move(out), {a, b},
                            std::move(backward));
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(fmt::format("mul: {} vs {}", shape_string(a.shape()),
                                     shape_string(b.shape())));
  }
  std::vector<T> out(a.numel());
  for (int64_t i = 0; i < a.numel(); ++i) out[i] = a.data()[i] * b.data()[i];
  auto backward = [a, b](std::span<const T> grad_out, std::span<const std::span<T>> grads) {
    for (size_t i = 0; i < grads[0].size(); ++i) grads[0][i] += grad_out[i] * b.data()[i];
    for (size_t i = 0; i < grads[1].size(); ++i) grads[1][i] += grad_out[i] * a.data()[i];
  };
  return Tensor<T>::from_op("mul", a.shape(), std::move(out), {a, b},
                            std::move(backward));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& input) {
  T total = 0;
  for (T v : input.data()) total += v;
  auto backward = [](std::span<const T> grad_out, std::span<const std::span<T>> grads) {
    for (T& g : grads[0]) g += grad_out[0];
  };
  return Tensor<T>::from_op("sum", Shape{}, std::vector<T>{total}, {input},
                            std::move(backward));
}

#define MRDLINET_INSTANTIATE_OPS(T)                                                   \
  template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, int, Padding);      \
  template Tensor<T> depthwise_conv2d(const Tensor<T>&, const Tensor<T>&, int,       \
                                      Padding);                                      \
  template Tensor<T> batch_norm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, \
                                RunningStats<T>&, Mode);                             \
  template Tensor<T> activation(const Tensor<T>&, Activation);                      \
  template Tensor<T> avg_pool2x2(const Tensor<T>&);                                  \
  template Tensor<T> global_avg_pool(const Tensor<T>&);                              \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                     \
  template Tensor<T> dense(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&);    \
  template Tensor<T> concat_channels(const Tensor<T>&, const Tensor<T>&);            \
  template Tensor<T> slice_channels(const Tensor<T>&, int64_t, int64_t);             \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                        \
  template Tensor<T> sum(const Tensor<T>&);

MRDLINET_INSTANTIATE_OPS(float)
MRDLINET_INSTANTIATE_OPS(double)
MRDLINET_INSTANTIATE_OPS(long double)

#undef MRDLINET_INSTANTIATE_OPS

}  // namespace mrdlinet
