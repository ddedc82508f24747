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

#include "tae/model.hpp"

#include <cmath>

#include "tae/random.hpp"

namespace tae {

void ModelConfig::validate() const {
  if (input_channels == 0 || output_channels == 0) {
    throw ConfigError("input_channels and output_channels must be positive");
  }
  if (hidden_channels.size() != kEncoderLayers + kDecoderLayers) {
    throw ConfigError("hidden_channels must list exactly 6 counts, got " +
                      std::to_string(hidden_channels.size()));
  }
  for (std::size_t c : hidden_channels) {
    if (c == 0) throw ConfigError("hidden_channels entries must be positive");
  }
  if (kernel_size == 0 || kernel_size % 2 == 0) {
    throw ConfigError("kernel_size must be odd");
  }
  if (seq_in == 0) throw ConfigError("seq_in must be positive");
  if (seq_out != seq_in) {
    throw ConfigError("seq_out must equal seq_in (sequence-to-sequence with "
                      "equal lengths)");
  }
  if (height == 0 || width == 0) throw ConfigError("grid must be non-empty");
  if (downsample) {
    if (pool_stages != 1 && pool_stages != 2) {
      throw ConfigError("pool_stages must be 1 or 2");
    }
    const std::size_t factor = std::size_t{1} << pool_stages;
    if (height % factor != 0 || width % factor != 0) {
      throw ConfigError("grid " + std::to_string(height) + "x" +
                        std::to_string(width) + " is not divisible by " +
                        std::to_string(factor) + " for " +
                        std::to_string(pool_stages) + " pooling stage(s)");
    }
    if (upsample_kernel < 2 || upsample_kernel % 2 != 0) {
      throw ConfigError("upsample_kernel must be even and >= 2");
    }
  }
}

namespace {

std::size_t decoder_in_channels(const ModelConfig& cfg, std::size_t j,
                                const DecoderWiring& w) {
  const auto& hc = cfg.hidden_channels;
  if (j == 0) return hc[kEncoderLayers - 1];
  std::size_t c = hc[kEncoderLayers + j - 1];
  if (w.skip_from) c += hc[*w.skip_from];
  return c;
}

std::size_t encoder_in_channels(const ModelConfig& cfg, std::size_t i) {
  return i == 0 ? cfg.input_channels : cfg.hidden_channels[i - 1];
}

void init_uniform(Tensor& t, double bound, Rng& rng) {
  for (double& v : t.values()) v = rng.uniform(-bound, bound);
}

void accumulate(Tensor& into, const Tensor& g) {
  if (into.empty()) {
    into = g;
    return;
  }
  if (into.shape() != g.shape()) {
    throw ShapeError("gradient accumulation shape mismatch " +
                     to_string(into.shape()) + " vs " + to_string(g.shape()));
  }
  for (std::size_t i = 0; i < g.size(); ++i) into[i] += g[i];
}

void write_frame(Tensor& seq, std::size_t t, const Tensor& f) {
  std::copy(f.values().begin(), f.values().end(), seq.data() + t * f.size());
}

Tensor pool_sequence(const Tensor& seq, std::vector<PoolResult>* pools) {
  const std::size_t steps = seq.extent(0);
  std::vector<Tensor> frames;
  frames.reserve(steps);
  if (pools) pools->clear();
  for (std::size_t t = 0; t < steps; ++t) {
    PoolResult r = maxpool2d(frame(seq, t), 2);
    frames.push_back(r.output);
    if (pools) pools->push_back(std::move(r));
  }
  return stack_frames<double>(frames);
}

Tensor upsample_sequence(const Tensor& seq, const UpsampleParams& up) {
  std::vector<Tensor> frames;
  for (std::size_t t = 0; t < seq.extent(0); ++t) {
    frames.push_back(transposed_conv2d(frame(seq, t), up.kernel, up.bias, 2));
  }
  return stack_frames<double>(frames);
}

Tensor concat_sequences(const Tensor& a, const Tensor& b) {
  if (b.empty()) return a;
  std::vector<Tensor> frames;
  for (std::size_t t = 0; t < a.extent(0); ++t) {
    frames.push_back(concat_channels(frame(a, t), frame(b, t)));
  }
  return stack_frames<double>(frames);
}

}  // namespace

std::vector<NamedTensor> TemporalAutoencoder::parameters() {
  std::vector<NamedTensor> out;
  auto add_cell = [&](const std::string& prefix, ConvLstmParams& p) {
    out.push_back({prefix + ".input_kernel", &p.input_kernel});
    out.push_back({prefix + ".hidden_kernel", &p.hidden_kernel});
    out.push_back({prefix + ".bias", &p.bias});
    if (!p.peephole.empty()) out.push_back({prefix + ".peephole", &p.peephole});
  };
  for (std::size_t i = 0; i < kEncoderLayers; ++i) {
    add_cell("encoder." + std::to_string(i), encoder[i]);
  }
  for (std::size_t j = 0; j < kDecoderLayers; ++j) {
    add_cell("decoder." + std::to_string(j), decoder[j]);
  }
  for (std::size_t u = 0; u < upsample.size(); ++u) {
    out.push_back({"upsample." + std::to_string(u) + ".kernel", &upsample[u].kernel});
    out.push_back({"upsample." + std::to_string(u) + ".bias", &upsample[u].bias});
  }
  out.push_back({"head.kernel", &head.kernel});
  out.push_back({"head.bias", &head.bias});
  return out;
}

std::vector<ConstNamedTensor> TemporalAutoencoder::parameters() const {
  std::vector<ConstNamedTensor> out;
  for (auto& p : const_cast<TemporalAutoencoder*>(this)->parameters()) {
    out.push_back({std::move(p.name), p.tensor});
  }
  return out;
}

TemporalAutoencoder build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  TemporalAutoencoder m;
  m.config = cfg;

  if (cfg.downsample && cfg.pool_stages == 2) {
    m.encoder_level = {0, 1, 2};
    m.decoder_level = {2, 1, 0};
  } else if (cfg.downsample) {
    m.encoder_level = {0, 1, 1};
    m.decoder_level = {1, 0, 0};
  }

  std::array<bool, kEncoderLayers> skip_used{};
  for (std::size_t j = 0; j < kDecoderLayers; ++j) {
    auto& w = m.wiring[j];
    const std::size_t prev_level =
        j == 0 ? m.encoder_level.back() : m.decoder_level[j - 1];
    if (m.decoder_level[j] < prev_level) {
      w.upsample = m.upsample.size();
      m.upsample.emplace_back();
    }
    if (!cfg.skips || j == 0) continue;
    // Mirror pairing (D2<-E2, D3<-E1) when resolutions agree, otherwise the
    // deepest unused encoder layer at this resolution.
    const std::size_t mirror = kEncoderLayers - 1 - j;
    if (m.encoder_level[mirror] == m.decoder_level[j] && !skip_used[mirror]) {
      w.skip_from = mirror;
    } else {
      for (std::size_t i = kEncoderLayers; i-- > 0;) {
        if (m.encoder_level[i] == m.decoder_level[j] && !skip_used[i]) {
          w.skip_from = i;
          break;
        }
      }
    }
    if (w.skip_from) skip_used[*w.skip_from] = true;
  }

  Rng rng(seed);
  const auto& hc = cfg.hidden_channels;
  for (std::size_t i = 0; i < kEncoderLayers; ++i) {
    const std::size_t level = m.encoder_level[i];
    m.encoder[i] = ConvLstmParams::initialized(
        {encoder_in_channels(cfg, i), hc[i], cfg.kernel_size,
         cfg.height >> level, cfg.width >> level, cfg.peepholes},
        rng);
  }
  for (std::size_t j = 0; j < kDecoderLayers; ++j) {
    const std::size_t level = m.decoder_level[j];
    m.decoder[j] = ConvLstmParams::initialized(
        {decoder_in_channels(cfg, j, m.wiring[j]), hc[kEncoderLayers + j],
         cfg.kernel_size, cfg.height >> level, cfg.width >> level,
         cfg.peepholes},
        rng);
  }
  for (std::size_t j = 0; j < kDecoderLayers; ++j) {
    if (!m.wiring[j].upsample) continue;
    // Up-sampling keeps the channel count of the layer below.
    const std::size_t channels = hc[kEncoderLayers - 1 + j];
    const std::size_t k = cfg.upsample_kernel;
    auto& up = m.upsample[*m.wiring[j].upsample];
    up.kernel = Tensor({channels, channels, k, k});
    up.bias = Tensor({channels});
    const double taps = static_cast<double>((k / 2) * (k / 2));
    init_uniform(up.kernel, 1.0 / std::sqrt(static_cast<double>(channels) * taps), rng);
  }
  const std::size_t last = hc.back();
  m.head.kernel = Tensor({cfg.output_channels, last, 1, 1});
  m.head.bias = Tensor({cfg.output_channels},
                       std::log(kHeadPrior / (1.0 - kHeadPrior)));
  init_uniform(m.head.kernel, 1.0 / std::sqrt(static_cast<double>(last)), rng);
  return m;
}

TemporalAutoencoder zeros_like(const TemporalAutoencoder& model) {
  TemporalAutoencoder z = model;
  for (auto& p : z.parameters()) p.tensor->fill(0.0);
  return z;
}

std::size_t parameter_count(const TemporalAutoencoder& model) {
  std::size_t n = 0;
  for (const auto& p : model.parameters()) n += p.tensor->size();
  return n;
}

ModelSummary summarize(const TemporalAutoencoder& model) {
  ModelSummary s;
  for (const auto& p : model.parameters()) {
    const std::string& n = p.name;
    if (n.ends_with(".input_kernel")) ++s.convlstm_layers;
    if (n.starts_with("upsample.") && n.ends_with(".kernel")) ++s.upsample_stages;
    if (n == "head.kernel") ++s.heads;
  }
  for (std::size_t i = 1; i < kEncoderLayers; ++i) {
    if (model.encoder_level[i] > model.encoder_level[i - 1]) ++s.pool_stages;
  }
  for (const auto& w : model.wiring) {
    if (w.skip_from) ++s.skip_connections;
  }
  return s;
}

Tensor forward(const TemporalAutoencoder& model, const Tensor& input,
               ForwardTape* tape_out, const ForwardOptions& options) {
  const auto& cfg = model.config;
  require_rank(input, 4, "forward input");
  if (input.extent(0) != cfg.seq_in) {
    throw ShapeError("forward: expected " + std::to_string(cfg.seq_in) +
                     " input frames, got " + std::to_string(input.extent(0)));
  }
  if (input.extent(1) != cfg.input_channels || input.extent(2) != cfg.height ||
      input.extent(3) != cfg.width) {
    throw ShapeError("forward: input " + to_string(input.shape()) +
                     " does not match configured grid");
  }
  ForwardTape local;
  ForwardTape& tape = tape_out ? *tape_out : local;

  Tensor x = input;
  for (std::size_t i = 0; i < kEncoderLayers; ++i) {
    if (i > 0 && model.encoder_level[i] > model.encoder_level[i - 1]) {
      x = pool_sequence(x, &tape.pools[i]);
    } else {
      tape.pools[i].clear();
    }
    tape.encoder_inputs[i] = x;
    x = convlstm_sequence(x, model.encoder[i], true, &tape.encoder_tapes[i])
            .hidden_sequence;
    tape.encoder_outputs[i] = x;
  }

  for (std::size_t j = 0; j < kDecoderLayers; ++j) {
    const auto& w = model.wiring[j];
    if (j > 0) {
      tape.upsample_inputs[j] = x;
      if (w.upsample) x = upsample_sequence(x, model.upsample[*w.upsample]);
      tape.upsample_outputs[j] = x;
      if (w.skip_from) {
        const Tensor& skip = tape.encoder_outputs[*w.skip_from];
        x = concat_sequences(x, options.zero_skip[*w.skip_from]
                                    ? Tensor::zeros_like(skip)
                                    : skip);
      }
    } else if (w.upsample) {
      tape.upsample_inputs[j] = x;
      x = upsample_sequence(x, model.upsample[*w.upsample]);
      tape.upsample_outputs[j] = x;
    }
    tape.decoder_inputs[j] = x;
    x = convlstm_sequence(x, model.decoder[j], true, &tape.decoder_tapes[j])
            .hidden_sequence;
    tape.decoder_outputs[j] = x;
  }

  const std::size_t steps = x.extent(0);
  const std::size_t cin = x.extent(1);
  const ConvSpec head_spec{cin, cfg.output_channels, 1, 1};
  Tensor out({steps, cfg.output_channels, cfg.height, cfg.width});
  for (std::size_t t = 0; t < steps; ++t) {
    write_frame(out, t,
                sigmoid(conv2d(frame(x, t), head_spec, model.head.kernel,
                               model.head.bias)));
  }
  tape.output = out;
  return out;
}

void backward(const TemporalAutoencoder& model, const ForwardTape& tape,
              const Tensor& grad_output, TemporalAutoencoder& grads) {
  if (grad_output.shape() != tape.output.shape()) {
    throw ShapeError("backward: grad_output shape " +
                     to_string(grad_output.shape()) + " != output shape " +
                     to_string(tape.output.shape()));
  }
  const std::size_t steps = grad_output.extent(0);

  // Head: sigmoid then 1x1 convolution, frame by frame.
  std::array<Tensor, kDecoderLayers> grad_dec;
  const Tensor& d3 = tape.decoder_outputs.back();
  grad_dec.back() = Tensor::zeros_like(d3);
  for (std::size_t t = 0; t < steps; ++t) {
    Tensor y = frame(tape.output, t);
    Tensor gz = frame(grad_output, t);
    for (std::size_t i = 0; i < gz.size(); ++i) gz[i] *= y[i] * (1.0 - y[i]);
    Conv2dGrads g = conv2d_backward(frame(d3, t), model.head.kernel, gz);
    accumulate(grads.head.kernel, g.kernel);
    accumulate(grads.head.bias, g.bias);
    write_frame(grad_dec.back(), t, g.input);
  }

  std::array<Tensor, kEncoderLayers> grad_enc;
  for (std::size_t i = 0; i < kEncoderLayers; ++i) {
    grad_enc[i] = Tensor::zeros_like(tape.encoder_outputs[i]);
  }

  for (std::size_t j = kDecoderLayers; j-- > 0;) {
    const auto& w = model.wiring[j];
    Tensor grad_in = convlstm_sequence_backward(
        tape.decoder_tapes[j], model.decoder[j], grad_dec[j], grads.decoder[j]);
    Tensor grad_main = grad_in;
    if (j > 0 && w.skip_from) {
      const std::size_t main_c = tape.upsample_outputs[j].extent(1);
      grad_main = Tensor::zeros_like(tape.upsample_outputs[j]);
      Tensor& skip_grad = grad_enc[*w.skip_from];
      for (std::size_t t = 0; t < steps; ++t) {
        auto [main, skip] = split_channels(frame(grad_in, t), main_c);
        write_frame(grad_main, t, main);
        Tensor acc = frame(skip_grad, t);
        accumulate(acc, skip);
        write_frame(skip_grad, t, acc);
      }
    }
    Tensor grad_prev = grad_main;
    if (w.upsample) {
      const auto& up = model.upsample[*w.upsample];
      auto& gup = grads.upsample[*w.upsample];
      const Tensor& up_in = tape.upsample_inputs[j];
      grad_prev = Tensor::zeros_like(up_in);
      for (std::size_t t = 0; t < steps; ++t) {
        TransposedConvGrads g = transposed_conv2d_backward(
            frame(up_in, t), up.kernel, frame(grad_main, t), 2);
        accumulate(gup.kernel, g.kernel);
        accumulate(gup.bias, g.bias);
        write_frame(grad_prev, t, g.input);
      }
    }
    if (j > 0) {
      grad_dec[j - 1] = std::move(grad_prev);
    } else {
      accumulate(grad_enc.back(), grad_prev);
    }
  }

  for (std::size_t i = kEncoderLayers; i-- > 0;) {
    Tensor grad_in = convlstm_sequence_backward(
        tape.encoder_tapes[i], model.encoder[i], grad_enc[i], grads.encoder[i]);
    if (i == 0) break;
    if (!tape.pools[i].empty()) {
      Tensor& target = grad_enc[i - 1];
      for (std::size_t t = 0; t < steps; ++t) {
        Tensor acc = frame(target, t);
        accumulate(acc, maxpool2d_backward(tape.pools[i][t], frame(grad_in, t)));
        write_frame(target, t, acc);
      }
    } else {
      accumulate(grad_enc[i - 1], grad_in);
    }
  }
}

Tensor predict_hour(const TemporalAutoencoder& model, const Tensor& input) {
  require_rank(input, 4, "predict_hour input");
  if (input.extent(0) != 12) {
    throw ShapeError("predict_hour: expected exactly 12 input frames, got " +
                     std::to_string(input.extent(0)));
  }
  return forward(model, input);
}

}  // namespace tae
