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

#include <benchmark/benchmark.h>

#include <random>

#include "tae/cells.hpp"
#include "tae/data.hpp"
#include "tae/model.hpp"
#include "tae/ops.hpp"
#include "tae/random.hpp"
#include "tae/training.hpp"

namespace tae {
namespace {

Tensor uniform(Shape shape, std::uint64_t seed) {
  Tensor t(std::move(shape));
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = u(gen);
  return t;
}

// Args: channels in, channels out, grid side.
void BM_Conv2d(benchmark::State& state) {
  const ConvSpec spec{static_cast<std::size_t>(state.range(0)),
                      static_cast<std::size_t>(state.range(1)), 3, 3};
  const auto n = static_cast<std::size_t>(state.range(2));
  const Tensor x = uniform({spec.in_channels, n, n}, 1);
  const Tensor k = uniform(spec.kernel_shape(), 2);
  const Tensor b = uniform({spec.out_channels}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d(x, spec, k, b));
}
BENCHMARK(BM_Conv2d)->Args({8, 64, 16})->Args({48, 128, 8})->Args({192, 256, 4});

void BM_Conv2dBackward(benchmark::State& state) {
  const ConvSpec spec{static_cast<std::size_t>(state.range(0)),
                      static_cast<std::size_t>(state.range(1)), 3, 3};
  const auto n = static_cast<std::size_t>(state.range(2));
  const Tensor x = uniform({spec.in_channels, n, n}, 1);
  const Tensor k = uniform(spec.kernel_shape(), 2);
  const Tensor g = uniform({spec.out_channels, n, n}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(conv2d_backward(x, k, g));
}
BENCHMARK(BM_Conv2dBackward)->Args({8, 64, 16})->Args({48, 128, 8});

void BM_TransposedConv2d(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  const Tensor x = uniform({c, n, n}, 1);
  const Tensor k = uniform({c, c, 2, 2}, 2);
  const Tensor b = uniform({c}, 3);
  for (auto _ : state) benchmark::DoNotOptimize(transposed_conv2d(x, k, b));
}
BENCHMARK(BM_TransposedConv2d)->Args({64, 4})->Args({32, 8});

// Args: hidden channels, grid side. Twelve steps with 3x3 kernels.
void BM_ConvLstmSequence(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  Rng rng(7);
  const ConvLstmParams p = ConvLstmParams::initialized({c, c, 3, n, n, true}, rng);
  const Tensor x = uniform({12, c, n, n}, 4);
  for (auto _ : state) {
    ConvLstmTape tape;
    benchmark::DoNotOptimize(convlstm_sequence(x, p, true, &tape));
  }
}
BENCHMARK(BM_ConvLstmSequence)->Args({16, 16})->Args({64, 4})->Unit(benchmark::kMillisecond);

void BM_ConvLstmSequenceBackward(benchmark::State& state) {
  const auto c = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  Rng rng(7);
  const ConvLstmParams p = ConvLstmParams::initialized({c, c, 3, n, n, true}, rng);
  const Tensor x = uniform({12, c, n, n}, 4);
  ConvLstmTape tape;
  const SequenceOutput out = convlstm_sequence(x, p, true, &tape);
  const Tensor g = uniform(out.hidden_sequence.shape(), 5);
  ConvLstmParams grads = ConvLstmParams::zeros(p.shape);
  for (auto _ : state) benchmark::DoNotOptimize(convlstm_sequence_backward(tape, p, g, grads));
}
BENCHMARK(BM_ConvLstmSequenceBackward)->Args({16, 16})->Args({64, 4})->Unit(benchmark::kMillisecond);

SequenceSample default_sample() {
  SyntheticCityConfig sc;
  sc.days = 1;
  return make_sample(synthetic_city(sc).front(), 0, 96, 12, 12);
}

void BM_ModelForward(benchmark::State& state) {
  const TemporalAutoencoder m = build_model(ModelConfig{}, 1);
  const SequenceSample s = default_sample();
  for (auto _ : state) benchmark::DoNotOptimize(forward(m, s.input));
}
BENCHMARK(BM_ModelForward)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  const TemporalAutoencoder m = build_model(ModelConfig{}, 1);
  const SequenceSample s = default_sample();
  TemporalAutoencoder grads = zeros_like(m);
  for (auto _ : state) {
    ForwardTape tape;
    const Tensor pred = forward(m, s.input, &tape);
    backward(m, tape, mse_grad(pred, s.target), grads);
  }
}
BENCHMARK(BM_ModelForwardBackward)->Unit(benchmark::kMillisecond);

void BM_SyntheticDay(benchmark::State& state) {
  SyntheticCityConfig sc;
  sc.days = 1;
  for (auto _ : state) benchmark::DoNotOptimize(synthetic_city(sc));
}
BENCHMARK(BM_SyntheticDay)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tae

BENCHMARK_MAIN();
