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

// Internal GEMM helpers shared by the convolution and ConvLSTM kernels.

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstddef>

namespace tae::detail {

inline double logistic(double x) {
  // Split by sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix, 0, Eigen::OuterStride<>>;
using ConstMatrixMap = Eigen::Map<const RowMatrix, 0, Eigen::OuterStride<>>;

inline MatrixMap map(double* p, std::size_t rows, std::size_t cols,
                     std::size_t ld) {
  return MatrixMap(p, static_cast<Eigen::Index>(rows),
                   static_cast<Eigen::Index>(cols),
                   Eigen::OuterStride<>(static_cast<Eigen::Index>(ld)));
}

inline ConstMatrixMap cmap(const double* p, std::size_t rows, std::size_t cols,
                           std::size_t ld) {
  return ConstMatrixMap(p, static_cast<Eigen::Index>(rows),
                        static_cast<Eigen::Index>(cols),
                        Eigen::OuterStride<>(static_cast<Eigen::Index>(ld)));
}

/// Left-to-right sum. Eigen's vectorized reductions start at the first
/// aligned element, so their rounding would depend on heap addresses.
inline double ordered_sum(const double* p, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += p[i];
  return s;
}

/// Unfolds a [C,H,W] image into a [C*kh*kw, H*W] patch matrix for a
/// stride-1 same-padded convolution. Row r = (c*kh + a)*kw + b, column
/// p = y*W + x. `ld` is the row stride of `cols`, so several frames can be
/// written side by side.
inline void im2col(const double* image, std::size_t channels, std::size_t h,
                   std::size_t w, std::size_t kh, std::size_t kw, double* cols,
                   std::size_t ld) {
  const std::ptrdiff_t ph = static_cast<std::ptrdiff_t>(kh / 2);
  const std::ptrdiff_t pw = static_cast<std::ptrdiff_t>(kw / 2);
  const auto H = static_cast<std::ptrdiff_t>(h);
  const auto W = static_cast<std::ptrdiff_t>(w);
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    const double* plane = image + c * h * w;
    for (std::size_t a = 0; a < kh; ++a) {
      for (std::size_t b = 0; b < kw; ++b, ++row) {
        double* out = cols + row * ld;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(a) - ph;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(b) - pw;
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          const std::ptrdiff_t sy = y + dy;
          double* out_row = out + y * W;
          if (sy < 0 || sy >= H) {
            for (std::ptrdiff_t x = 0; x < W; ++x) out_row[x] = 0.0;
            continue;
          }
          const double* src = plane + sy * W;
          for (std::ptrdiff_t x = 0; x < W; ++x) {
            const std::ptrdiff_t sx = x + dx;
            out_row[x] = (sx < 0 || sx >= W) ? 0.0 : src[sx];
          }
        }
      }
    }
  }
}

/// Adjoint of im2col: scatters-adds a patch matrix back onto a [C,H,W]
/// image (which is accumulated into, not overwritten).
inline void col2im_add(const double* cols, std::size_t ld, std::size_t channels,
                       std::size_t h, std::size_t w, std::size_t kh,
                       std::size_t kw, double* image) {
  const std::ptrdiff_t ph = static_cast<std::ptrdiff_t>(kh / 2);
  const std::ptrdiff_t pw = static_cast<std::ptrdiff_t>(kw / 2);
  const auto H = static_cast<std::ptrdiff_t>(h);
  const auto W = static_cast<std::ptrdiff_t>(w);
  std::size_t row = 0;
  for (std::size_t c = 0; c < channels; ++c) {
    double* plane = image + c * h * w;
    for (std::size_t a = 0; a < kh; ++a) {
      for (std::size_t b = 0; b < kw; ++b, ++row) {
        const double* in = cols + row * ld;
        const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(a) - ph;
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(b) - pw;
        for (std::ptrdiff_t y = 0; y < H; ++y) {
          const std::ptrdiff_t sy = y + dy;
          if (sy < 0 || sy >= H) continue;
          double* dst = plane + sy * W;
          const double* in_row = in + y * W;
          for (std::ptrdiff_t x = 0; x < W; ++x) {
            const std::ptrdiff_t sx = x + dx;
            if (sx >= 0 && sx < W) dst[sx] += in_row[x];
          }
        }
      }
    }
  }
}

}  // namespace tae::detail
