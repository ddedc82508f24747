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

// Peephole LSTM and convolutional LSTM cells.
//
// Both cells compute, with gate order (input, forget, cell, output):
//
//   i  = sigmoid(W_i x + U_i h_prev + V_i . c_prev + b_i)
//   f  = sigmoid(W_f x + U_f h_prev + V_f . c_prev + b_f)
//   c  = f . c_prev + i . tanh(W_c x + U_c h_prev + b_c)
//   o  = sigmoid(W_o x + U_o h_prev + V_o . c + b_o)
//   h  = o . tanh(c)
//
// where "." is the elementwise product. The output gate peeks at the new
// cell state; the candidate has no peephole. In the convolutional cell the
// W and U products are same-padded convolutions and V has the full shape of
// the cell state.

#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "tae/random.hpp"
#include "tae/tensor.hpp"

namespace tae {

enum class Gate : std::size_t { input = 0, forget = 1, cell = 2, output = 3 };
inline constexpr std::size_t kGateCount = 4;

/// Index into the peephole stack; the cell gate has none.
enum class Peephole : std::size_t { input = 0, forget = 1, output = 2 };
inline constexpr std::size_t kPeepholeCount = 3;

struct CellState {
  Tensor h;
  Tensor c;
};

// ---------------------------------------------------------------------------
// Vector LSTM

struct LstmParams {
  std::size_t input_size = 0;
  std::size_t hidden_size = 0;
  std::array<Tensor, kGateCount> w;  // [hidden, input]
  std::array<Tensor, kGateCount> u;  // [hidden, hidden]
  std::array<Tensor, kGateCount> b;  // [hidden]
  std::array<Tensor, kPeepholeCount> v;  // [hidden], empty when disabled

  static LstmParams zeros(std::size_t input_size, std::size_t hidden_size,
                          bool peepholes = true);
  bool peepholes() const { return !v[0].empty(); }
};

CellState lstm_step(const Tensor& x, const CellState& state,
                    const LstmParams& p);

struct LstmStepGrads {
  Tensor x;
  CellState state;  // gradients w.r.t. h_prev and c_prev
  LstmParams params;
};

/// Backward of one lstm_step for upstream gradients on the new h and c
/// (either may be empty, meaning zero).
LstmStepGrads lstm_step_backward(const Tensor& x, const CellState& state,
                                 const LstmParams& p, const Tensor& grad_h,
                                 const Tensor& grad_c);

// ---------------------------------------------------------------------------
// Convolutional LSTM

struct ConvLstmShape {
  std::size_t in_channels = 1;
  std::size_t hidden_channels = 1;
  std::size_t kernel_size = 3;
  std::size_t height = 1;
  std::size_t width = 1;
  bool peepholes = true;

  void validate() const;
  bool operator==(const ConvLstmShape&) const = default;
};

/// Gate weights are packed gate-major: rows [g*C_h, (g+1)*C_h) of each
/// kernel and of the bias belong to gate g.
struct ConvLstmParams {
  ConvLstmShape shape;
  Tensor input_kernel;   // W: [4*C_h, C_in, k, k]
  Tensor hidden_kernel;  // U: [4*C_h, C_h, k, k]
  Tensor bias;           // b: [4*C_h]
  Tensor peephole;       // V: [3, C_h, H, W] (i, f, o), empty when disabled

  static ConvLstmParams zeros(const ConvLstmShape& shape);

  /// Forget bias 1, other biases 0, peepholes 0, kernels uniform in
  /// [-1/sqrt(fan_in*k*k), +1/sqrt(fan_in*k*k)].
  static ConvLstmParams initialized(const ConvLstmShape& shape, Rng& rng);

  Tensor gate_input_kernel(Gate g) const;   // [C_h, C_in, k, k]
  Tensor gate_hidden_kernel(Gate g) const;  // [C_h, C_h, k, k]
  Tensor gate_bias(Gate g) const;           // [C_h]
  Tensor peephole_weights(Peephole g) const;  // [C_h, H, W]

  std::size_t parameter_count() const;
};

/// One step computed from conv2d and elementwise ops.
CellState convlstm_step(const Tensor& x, const CellState& state,
                        const ConvLstmParams& p);

/// Activations saved by convlstm_sequence for the backward pass.
struct ConvLstmTape {
  std::size_t steps = 0;
  std::vector<double> input_cols;   // [C_in*k*k, T*H*W]
  std::vector<double> hidden_cols;  // [C_h*k*k, T*H*W], im2col of h_{t-1}
  std::vector<double> gates;        // [T][4*C_h][H*W], post-activation
  std::vector<double> cells;        // [T+1][C_h][H*W], cells[0] = 0
  std::vector<double> cell_tanh;    // [T][C_h][H*W]
};

struct SequenceOutput {
  Tensor hidden_sequence;  // [T, C_h, H, W]; empty unless requested
  CellState final_state;
};

/// Unrolls the cell over inputs [T, C_in, H, W] from a zero state.
SequenceOutput convlstm_sequence(const Tensor& inputs, const ConvLstmParams& p,
                                 bool return_sequence = true,
                                 ConvLstmTape* tape = nullptr);

/// Backpropagation through time. `grad_hidden` is [T, C_h, H, W] or empty;
/// `grad_final` optionally seeds the last state. Parameter gradients are
/// accumulated into `grads`; the input gradient is returned.
Tensor convlstm_sequence_backward(const ConvLstmTape& tape,
                                  const ConvLstmParams& p,
                                  const Tensor& grad_hidden,
                                  ConvLstmParams& grads,
                                  const CellState* grad_final = nullptr);

}  // namespace tae
