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

// Reference implementations used only by tests. They are deliberately naive
// and share no code with the library kernels.

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tae/cells.hpp"
#include "tae/tensor.hpp"

namespace tae::testing {

Tensor random_tensor(const Shape& shape, std::uint64_t seed, double lo = -1.0,
                     double hi = 1.0);

/// Same-padded stride-1 convolution by direct summation.
Tensor naive_conv2d(const Tensor& input, const Tensor& kernel, const Tensor& bias);

/// Transposed convolution evaluated per output pixel by searching all input
/// pixels and kernel taps that land on it.
Tensor naive_transposed_conv2d(const Tensor& input, const Tensor& kernel,
                               const Tensor& bias, std::size_t stride);

Tensor naive_maxpool2d(const Tensor& input, std::size_t window);

/// Peephole LSTM step written out with scalar loops.
CellState scalar_lstm_step(const Tensor& x, const CellState& state,
                           const LstmParams& p);

/// Central differences of `loss` w.r.t. every element of `x`, which `loss`
/// must read by reference.
Tensor numeric_gradient(const std::function<double()>& loss, Tensor& x,
                        double step = 1e-5);

double dot(const Tensor& a, const Tensor& b);

/// Largest mismatch under the rule: relative error where
/// max(|a|, |n|) >= 1e-3, absolute error otherwise.
struct GradientMismatch {
  double max_rel = 0.0;
  double max_abs = 0.0;
  bool within(double rel_tol, double abs_tol = 1e-7) const {
    return max_rel <= rel_tol && max_abs <= abs_tol;
  }
};
GradientMismatch compare_gradients(const Tensor& analytic, const Tensor& numeric);
void merge(GradientMismatch& into, const GradientMismatch& other);

/// Number of valid window starts found by testing every start position.
std::size_t brute_force_windows(std::size_t day_length, std::size_t window,
                                bool overlapping, std::size_t stride);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace tae::testing
