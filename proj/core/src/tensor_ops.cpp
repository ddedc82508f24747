// Copyright 2026 The tae Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <limits>
#include <vector>

#include "linalg.hpp"
#include "tae/ops.hpp"

namespace tae {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shape " + to_string(a.shape()) +
                     " != " + to_string(b.shape()));
  }
}

}  // namespace

Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b) {
  Tensor out = Tensor::zeros_like(a);
  switch (kind) {
    case Elementwise::sigmoid:
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = detail::logistic(a[i]);
      break;
    case Elementwise::tanh:
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::tanh(a[i]);
      break;
    case Elementwise::hadamard:
      require_same_shape(a, b, "hadamard");
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
      break;
    case Elementwise::add:
      require_same_shape(a, b, "add");
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
      break;
  }
  return out;
}

Tensor sigmoid(const Tensor& a) { return elementwise(Elementwise::sigmoid, a); }
Tensor tanh(const Tensor& a) { return elementwise(Elementwise::tanh, a); }
Tensor hadamard(const Tensor& a, const Tensor& b) {
  return elementwise(Elementwise::hadamard, a, b);
}
Tensor add(const Tensor& a, const Tensor& b) {
  return elementwise(Elementwise::add, a, b);
}

void ConvSpec::validate() const {
  if (in_channels == 0 || out_channels == 0) {
    throw ShapeError("ConvSpec: channel counts must be positive");
  }
  if (kernel_h % 2 == 0 || kernel_w % 2 == 0) {
    throw ShapeError("ConvSpec: kernel extents must be odd for same padding");
  }
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& kernel,
              const Tensor& bias) {
  spec.validate();
  require_rank(input, 3, "conv2d input");
  if (input.extent(0) != spec.in_channels) {
    throw ShapeError("conv2d: input has " + std::to_string(input.extent(0)) +
                     " channels, spec expects " +
                     std::to_string(spec.in_channels));
  }
  if (kernel.shape() != spec.kernel_shape()) {
    throw ShapeError("conv2d: kernel shape " + to_string(kernel.shape()) +
                     " != " + to_string(spec.kernel_shape()));
  }
  if (!bias.empty() && bias.shape() != Shape{spec.out_channels}) {
    throw ShapeError("conv2d: bias shape " + to_string(bias.shape()));
  }
  const std::size_t h = input.extent(1), w = input.extent(2), hw = h * w;
  const std::size_t k = spec.in_channels * spec.kernel_h * spec.kernel_w;

  std::vector<double> cols(k * hw);
  detail::im2col(input.data(), spec.in_channels, h, w, spec.kernel_h,
                 spec.kernel_w, cols.data(), hw);
  Tensor out({spec.out_channels, h, w});
  auto y = detail::map(out.data(), spec.out_channels, hw, hw);
  y.noalias() = detail::cmap(kernel.data(), spec.out_channels, k, k) *
                detail::cmap(cols.data(), k, hw, hw);
  if (!bias.empty()) {
    for (std::size_t c = 0; c < spec.out_channels; ++c) {
      y.row(static_cast<Eigen::Index>(c)).array() += bias[c];
    }
  }
  return out;
}

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            const Tensor& grad_output) {
  require_rank(input, 3, "conv2d_backward input");
  require_rank(kernel, 4, "conv2d_backward kernel");
  require_rank(grad_output, 3, "conv2d_backward grad_output");
  const std::size_t cin = input.extent(0), h = input.extent(1),
                    w = input.extent(2), hw = h * w;
  const std::size_t cout = kernel.extent(0), kh = kernel.extent(2),
                    kw = kernel.extent(3);
  if (kernel.extent(1) != cin || grad_output.shape() != Shape{cout, h, w}) {
    throw ShapeError("conv2d_backward: inconsistent shapes input " +
                     to_string(input.shape()) + ", kernel " +
                     to_string(kernel.shape()) + ", grad_output " +
                     to_string(grad_output.shape()));
  }
  ConvSpec{cin, cout, kh, kw}.validate();
  const std::size_t k = cin * kh * kw;

  std::vector<double> cols(k * hw);
  detail::im2col(input.data(), cin, h, w, kh, kw, cols.data(), hw);
  const auto gy = detail::cmap(grad_output.data(), cout, hw, hw);

  Conv2dGrads g{Tensor::zeros_like(input), Tensor::zeros_like(kernel),
                Tensor({cout})};
  detail::map(g.kernel.data(), cout, k, k).noalias() =
      gy * detail::cmap(cols.data(), k, hw, hw).transpose();
  for (std::size_t c = 0; c < cout; ++c) {
    g.bias[c] = detail::ordered_sum(grad_output.data() + c * hw, hw);
  }
  std::vector<double> dcols(k * hw);
  detail::map(dcols.data(), k, hw, hw).noalias() =
      detail::cmap(kernel.data(), cout, k, k).transpose() * gy;
  detail::col2im_add(dcols.data(), hw, cin, h, w, kh, kw, g.input.data());
  return g;
}

namespace {

struct UpsampleGeometry {
  std::size_t cin, cout, h, w, k, stride, pad;
};

UpsampleGeometry upsample_geometry(const Tensor& input, const Tensor& kernel,
                                   std::size_t stride, const char* what) {
  require_rank(input, 3, what);
  require_rank(kernel, 4, what);
  if (stride == 0) throw ShapeError(std::string(what) + ": stride must be >= 1");
  const std::size_t k = kernel.extent(2);
  if (kernel.extent(0) != input.extent(0) || kernel.extent(3) != k) {
    throw ShapeError(std::string(what) + ": kernel " +
                     to_string(kernel.shape()) + " incompatible with input " +
                     to_string(input.shape()));
  }
  if (k < stride || (k - stride) % 2 != 0) {
    throw ShapeError(std::string(what) + ": kernel extent " +
                     std::to_string(k) +
                     " must be >= stride with an even difference");
  }
  return {input.extent(0), kernel.extent(1), input.extent(1), input.extent(2),
          k,               stride,           (k - stride) / 2};
}

/// Scatter-adds the [Cout*k*k, H*W] patch matrix of a transposed convolution
/// onto its cropped [Cout, H*s, W*s] output.
void scatter_patches(const UpsampleGeometry& g, const double* cols,
                     double* out) {
  const std::size_t oh = g.h * g.stride, ow = g.w * g.stride;
  for (std::size_t co = 0; co < g.cout; ++co) {
    double* dst = out + co * oh * ow;
    for (std::size_t a = 0; a < g.k; ++a) {
      for (std::size_t b = 0; b < g.k; ++b) {
        const double* row = cols + ((co * g.k + a) * g.k + b) * g.h * g.w;
        for (std::size_t y = 0; y < g.h; ++y) {
          const std::size_t oy = y * g.stride + a;
          if (oy < g.pad || oy - g.pad >= oh) continue;
          double* dst_row = dst + (oy - g.pad) * ow;
          for (std::size_t x = 0; x < g.w; ++x) {
            const std::size_t ox = x * g.stride + b;
            if (ox >= g.pad && ox - g.pad < ow) dst_row[ox - g.pad] += row[y * g.w + x];
          }
        }
      }
    }
  }
}

/// Adjoint of scatter_patches.
void gather_patches(const UpsampleGeometry& g, const double* out, double* cols) {
  const std::size_t oh = g.h * g.stride, ow = g.w * g.stride;
  for (std::size_t co = 0; co < g.cout; ++co) {
    const double* src = out + co * oh * ow;
    for (std::size_t a = 0; a < g.k; ++a) {
      for (std::size_t b = 0; b < g.k; ++b) {
        double* row = cols + ((co * g.k + a) * g.k + b) * g.h * g.w;
        for (std::size_t y = 0; y < g.h; ++y) {
          const std::size_t oy = y * g.stride + a;
          const bool row_in = oy >= g.pad && oy - g.pad < oh;
          for (std::size_t x = 0; x < g.w; ++x) {
            const std::size_t ox = x * g.stride + b;
            row[y * g.w + x] = row_in && ox >= g.pad && ox - g.pad < ow
                                   ? src[(oy - g.pad) * ow + (ox - g.pad)]
                                   : 0.0;
          }
        }
      }
    }
  }
}

}  // namespace

Tensor transposed_conv2d(const Tensor& input, const Tensor& kernel,
                         const Tensor& bias, std::size_t stride) {
  const auto g = upsample_geometry(input, kernel, stride, "transposed_conv2d");
  if (!bias.empty() && bias.shape() != Shape{g.cout}) {
    throw ShapeError("transposed_conv2d: bias shape " + to_string(bias.shape()));
  }
  const std::size_t oh = g.h * g.stride, ow = g.w * g.stride;
  const std::size_t hw = g.h * g.w, patch = g.cout * g.k * g.k;
  Tensor out({g.cout, oh, ow});
  for (std::size_t co = 0; co < g.cout; ++co) {
    const double b = bias.empty() ? 0.0 : bias[co];
    std::fill(out.data() + co * oh * ow, out.data() + (co + 1) * oh * ow, b);
  }
  std::vector<double> cols(patch * hw);
  detail::map(cols.data(), patch, hw, hw).noalias() =
      detail::cmap(kernel.data(), g.cin, patch, patch).transpose() *
      detail::cmap(input.data(), g.cin, hw, hw);
  scatter_patches(g, cols.data(), out.data());
  return out;
}

TransposedConvGrads transposed_conv2d_backward(const Tensor& input,
                                               const Tensor& kernel,
                                               const Tensor& grad_output,
                                               std::size_t stride) {
  const auto g =
      upsample_geometry(input, kernel, stride, "transposed_conv2d_backward");
  const std::size_t oh = g.h * g.stride, ow = g.w * g.stride;
  if (grad_output.shape() != Shape{g.cout, oh, ow}) {
    throw ShapeError("transposed_conv2d_backward: grad_output shape " +
                     to_string(grad_output.shape()));
  }
  const std::size_t hw = g.h * g.w, patch = g.cout * g.k * g.k;
  TransposedConvGrads grads{Tensor::zeros_like(input),
                            Tensor::zeros_like(kernel), Tensor({g.cout})};
  for (std::size_t co = 0; co < g.cout; ++co) {
    double s = 0.0;
    for (std::size_t i = 0; i < oh * ow; ++i) s += grad_output[co * oh * ow + i];
    grads.bias[co] = s;
  }
  std::vector<double> cols(patch * hw);
  gather_patches(g, grad_output.data(), cols.data());
  const auto gcols = detail::cmap(cols.data(), patch, hw, hw);
  detail::map(grads.input.data(), g.cin, hw, hw).noalias() =
      detail::cmap(kernel.data(), g.cin, patch, patch) * gcols;
  detail::map(grads.kernel.data(), g.cin, patch, patch).noalias() =
      detail::cmap(input.data(), g.cin, hw, hw) * gcols.transpose();
  return grads;
}

PoolResult maxpool2d(const Tensor& input, std::size_t window) {
  require_rank(input, 3, "maxpool2d input");
  if (window == 0) throw ShapeError("maxpool2d: window must be >= 1");
  const std::size_t c = input.extent(0), h = input.extent(1),
                    w = input.extent(2);
  const std::size_t oh = (h + window - 1) / window,
                    ow = (w + window - 1) / window;
  PoolResult r{Tensor({c, oh, ow}), std::vector<std::size_t>(c * oh * ow),
               input.shape()};
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t oy = 0; oy < oh; ++oy) {
      for (std::size_t ox = 0; ox < ow; ++ox) {
        double best = -std::numeric_limits<double>::infinity();
        std::size_t best_idx = 0;
        bool found = false;
        for (std::size_t a = 0; a < window; ++a) {
          const std::size_t y = oy * window + a;
          if (y >= h) break;
          for (std::size_t b = 0; b < window; ++b) {
            const std::size_t x = ox * window + b;
            if (x >= w) break;
            const std::size_t idx = (ch * h + y) * w + x;
            // First maximum wins on ties.
            if (!found || input[idx] > best) {
              best = input[idx];
              best_idx = idx;
              found = true;
            }
          }
        }
        const std::size_t o = (ch * oh + oy) * ow + ox;
        r.output[o] = best;
        r.argmax[o] = best_idx;
      }
    }
  }
  return r;
}

Tensor maxpool2d_backward(const PoolResult& forward, const Tensor& grad_output) {
  if (grad_output.shape() != forward.output.shape()) {
    throw ShapeError("maxpool2d_backward: grad_output shape " +
                     to_string(grad_output.shape()) + " != " +
                     to_string(forward.output.shape()));
  }
  Tensor grad(forward.input_shape);
  for (std::size_t o = 0; o < grad_output.size(); ++o) {
    grad[forward.argmax[o]] += grad_output[o];
  }
  return grad;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (b.empty()) return a;
  if (a.empty()) return b;
  require_rank(a, 3, "concat_channels a");
  require_rank(b, 3, "concat_channels b");
  if (a.extent(1) != b.extent(1) || a.extent(2) != b.extent(2)) {
    throw ShapeError("concat_channels: spatial mismatch " +
                     to_string(a.shape()) + " vs " + to_string(b.shape()));
  }
  std::vector<double> data;
  data.reserve(a.size() + b.size());
  data.insert(data.end(), a.values().begin(), a.values().end());
  data.insert(data.end(), b.values().begin(), b.values().end());
  return Tensor({a.extent(0) + b.extent(0), a.extent(1), a.extent(2)},
                std::move(data));
}

std::pair<Tensor, Tensor> split_channels(const Tensor& t,
                                         std::size_t first_channels) {
  require_rank(t, 3, "split_channels");
  const std::size_t c = t.extent(0), h = t.extent(1), w = t.extent(2);
  if (first_channels > c) {
    throw ShapeError("split_channels: " + std::to_string(first_channels) +
                     " > " + std::to_string(c) + " channels");
  }
  const std::size_t cut = first_channels * h * w;
  Tensor first, second;
  if (first_channels > 0) {
    first = Tensor({first_channels, h, w},
                   std::vector<double>(t.data(), t.data() + cut));
  }
  if (first_channels < c) {
    second = Tensor({c - first_channels, h, w},
                    std::vector<double>(t.data() + cut, t.data() + t.size()));
  }
  return {std::move(first), std::move(second)};
}

}  // namespace tae
