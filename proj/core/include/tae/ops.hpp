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

// Forward and backward kernels on [C, H, W] feature maps.

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "tae/tensor.hpp"

namespace tae {

enum class Elementwise { sigmoid, tanh, hadamard, add };

/// Unary kinds ignore `b`; binary kinds require `b.shape() == a.shape()`.
Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b = {});

Tensor sigmoid(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);

/// Stride-1 convolution with zero "same" padding. Kernel extents must be odd.
struct ConvSpec {
  std::size_t in_channels = 1;
  std::size_t out_channels = 1;
  std::size_t kernel_h = 3;
  std::size_t kernel_w = 3;

  Shape kernel_shape() const {
    return {out_channels, in_channels, kernel_h, kernel_w};
  }
  void validate() const;
};

/// input [C_in,H,W], kernel [C_out,C_in,kh,kw], bias [C_out] or empty.
Tensor conv2d(const Tensor& input, const ConvSpec& spec, const Tensor& kernel,
              const Tensor& bias);

struct Conv2dGrads {
  Tensor input;
  Tensor kernel;
  Tensor bias;
};

Conv2dGrads conv2d_backward(const Tensor& input, const Tensor& kernel,
                            const Tensor& grad_output);

/// Learnable up-sampling. input [C_in,H,W], kernel [C_in,C_out,k,k] with k
/// even, bias [C_out] or empty. Output is [C_out, stride*H, stride*W]; the
/// full transposed-convolution result is cropped by (k - stride)/2 per side.
Tensor transposed_conv2d(const Tensor& input, const Tensor& kernel,
                         const Tensor& bias, std::size_t stride = 2);

struct TransposedConvGrads {
  Tensor input;
  Tensor kernel;
  Tensor bias;
};

TransposedConvGrads transposed_conv2d_backward(const Tensor& input,
                                               const Tensor& kernel,
                                               const Tensor& grad_output,
                                               std::size_t stride = 2);

struct PoolResult {
  Tensor output;
  /// Flat input offset of the maximum of each output element.
  std::vector<std::size_t> argmax;
  Shape input_shape;
};

/// Non-overlapping window pooling; ragged edges are treated as -inf padded,
/// so output extents are ceil(H/window) x ceil(W/window).
PoolResult maxpool2d(const Tensor& input, std::size_t window = 2);

Tensor maxpool2d_backward(const PoolResult& forward, const Tensor& grad_output);

/// Concatenates along axis 0 of [C,H,W] tensors. An empty operand is the
/// identity.
Tensor concat_channels(const Tensor& a, const Tensor& b);

/// Inverse of concat_channels: splits off the first `first_channels`.
std::pair<Tensor, Tensor> split_channels(const Tensor& t,
                                         std::size_t first_channels);

}  // namespace tae
