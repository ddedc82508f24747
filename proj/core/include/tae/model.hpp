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

// Temporal autoencoder: three ConvLSTM encoder layers, three ConvLSTM decoder
// layers, per-frame max-pool down-sampling, transposed-convolution
// up-sampling, U-Net style skip concatenations and a 1x1 sigmoid head.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tae/cells.hpp"
#include "tae/ops.hpp"
#include "tae/tensor.hpp"

namespace tae {

inline constexpr std::size_t kEncoderLayers = 3;
inline constexpr std::size_t kDecoderLayers = 3;

/// Initial output of the head: its bias starts at logit(kHeadPrior) since
/// most grid pixels never carry traffic.
inline constexpr double kHeadPrior = 0.02;

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ModelConfig {
  std::size_t input_channels = 8;
  std::size_t output_channels = 8;
  /// E1, E2, E3, D1, D2, D3.
  std::vector<std::size_t> hidden_channels{16, 32, 64, 64, 32, 16};
  std::size_t kernel_size = 3;
  std::size_t seq_in = 12;
  std::size_t seq_out = 12;
  std::size_t height = 16;
  std::size_t width = 16;
  bool peepholes = true;
  bool skips = true;
  bool downsample = true;
  /// 1 or 2 halvings when downsample is on.
  std::size_t pool_stages = 2;
  /// Even transposed-convolution kernel extent for up-sampling.
  std::size_t upsample_kernel = 2;

  /// Throws ConfigError.
  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

/// How one decoder layer receives its input.
struct DecoderWiring {
  /// Index into TemporalAutoencoder::upsample applied to the previous layer.
  std::optional<std::size_t> upsample;
  /// Encoder layer whose output sequence is concatenated after the
  /// (possibly up-sampled) previous output.
  std::optional<std::size_t> skip_from;
};

struct UpsampleParams {
  Tensor kernel;  // [C, C, k, k]
  Tensor bias;    // [C]
};

struct HeadParams {
  Tensor kernel;  // [C_out, C_d3, 1, 1]
  Tensor bias;    // [C_out]
};

struct NamedTensor {
  std::string name;
  Tensor* tensor;
};

struct ConstNamedTensor {
  std::string name;
  const Tensor* tensor;
};

struct TemporalAutoencoder {
  ModelConfig config;
  std::array<ConvLstmParams, kEncoderLayers> encoder;
  std::array<ConvLstmParams, kDecoderLayers> decoder;
  /// Resolution level of each encoder layer (0 = full grid, 1 = half, ...).
  std::array<std::size_t, kEncoderLayers> encoder_level{};
  std::array<std::size_t, kDecoderLayers> decoder_level{};
  std::array<DecoderWiring, kDecoderLayers> wiring;
  std::vector<UpsampleParams> upsample;
  HeadParams head;

  /// Every parameter tensor exactly once, in a fixed order.
  std::vector<NamedTensor> parameters();
  std::vector<ConstNamedTensor> parameters() const;
};

/// Deterministic construction: equal (cfg, seed) give bit-identical models.
TemporalAutoencoder build_model(const ModelConfig& cfg, std::uint64_t seed);

/// Same structure, every parameter zero. Used as a gradient accumulator.
TemporalAutoencoder zeros_like(const TemporalAutoencoder& model);

std::size_t parameter_count(const TemporalAutoencoder& model);

struct ModelSummary {
  std::size_t convlstm_layers = 0;
  std::size_t pool_stages = 0;
  std::size_t upsample_stages = 0;
  std::size_t heads = 0;
  std::size_t skip_connections = 0;
};

/// Structural audit derived from the parameter registry and wiring.
ModelSummary summarize(const TemporalAutoencoder& model);

struct ForwardOptions {
  /// Replace the skip copy of an encoder output by zeros (the main path is
  /// untouched). Used to check skip wiring.
  std::array<bool, kEncoderLayers> zero_skip{};
};

/// Intermediate sequences kept for the backward pass.
struct ForwardTape {
  std::array<ConvLstmTape, kEncoderLayers> encoder_tapes;
  std::array<ConvLstmTape, kDecoderLayers> decoder_tapes;
  std::array<std::vector<PoolResult>, kEncoderLayers> pools;
  std::array<Tensor, kEncoderLayers> encoder_inputs;
  std::array<Tensor, kEncoderLayers> encoder_outputs;
  std::array<Tensor, kDecoderLayers> upsample_inputs;
  std::array<Tensor, kDecoderLayers> upsample_outputs;
  std::array<Tensor, kDecoderLayers> decoder_inputs;
  std::array<Tensor, kDecoderLayers> decoder_outputs;
  Tensor output;
};

/// input [T, C_in, H, W] with T == seq_in; returns [T, C_out, H, W] in (0,1).
Tensor forward(const TemporalAutoencoder& model, const Tensor& input,
               ForwardTape* tape = nullptr, const ForwardOptions& options = {});

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(output).
void backward(const TemporalAutoencoder& model, const ForwardTape& tape,
              const Tensor& grad_output, TemporalAutoencoder& grads);

/// Twelve future frames from exactly twelve input frames.
Tensor predict_hour(const TemporalAutoencoder& model, const Tensor& input);

}  // namespace tae
