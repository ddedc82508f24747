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

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "tae/model.hpp"
#include "tae/training.hpp"

namespace tae {
namespace {

using testing::random_tensor;

ModelConfig toy_config() {
  ModelConfig cfg;
  cfg.input_channels = 2;
  cfg.output_channels = 2;
  cfg.hidden_channels = {2, 3, 4, 4, 3, 2};
  cfg.seq_in = cfg.seq_out = 3;
  cfg.height = cfg.width = 8;
  return cfg;
}

TEST(ModelTest, DefaultStructureAudit) {
  const TemporalAutoencoder m = build_model(ModelConfig{}, 0);
  const ModelSummary s = summarize(m);
  EXPECT_EQ(s.convlstm_layers, 6u);
  EXPECT_EQ(s.pool_stages, 2u);
  EXPECT_EQ(s.upsample_stages, 2u);
  EXPECT_EQ(s.heads, 1u);
  EXPECT_EQ(s.skip_connections, 2u);
  EXPECT_EQ(m.wiring[1].skip_from, std::optional<std::size_t>(1));
  EXPECT_EQ(m.wiring[2].skip_from, std::optional<std::size_t>(0));
  EXPECT_FALSE(m.wiring[0].skip_from.has_value());
}

TEST(ModelTest, VariantsAudit) {
  ModelConfig cfg = toy_config();
  cfg.skips = false;
  EXPECT_EQ(summarize(build_model(cfg, 0)).skip_connections, 0u);

  cfg = toy_config();
  cfg.downsample = false;
  ModelSummary s = summarize(build_model(cfg, 0));
  EXPECT_EQ(s.pool_stages, 0u);
  EXPECT_EQ(s.upsample_stages, 0u);
  EXPECT_EQ(s.skip_connections, 2u);

  cfg = toy_config();
  cfg.pool_stages = 1;
  s = summarize(build_model(cfg, 0));
  EXPECT_EQ(s.pool_stages, 1u);
  EXPECT_EQ(s.upsample_stages, 1u);
  EXPECT_EQ(s.skip_connections, 1u);
}

TEST(ModelTest, ParameterCountClosedForm) {
  // Hand count for the toy config; per ConvLSTM layer
  // 4 * (Cin*Ch*9 + Ch*Ch*9 + Ch) + 3 * Ch * H * W.
  //   E1 (2->2, 8x8) 680, E2 (2->3, 4x4) 696, E3 (3->4, 2x2) 1072,
  //   D1 (4->4, 2x2) 1216, D2 (4+3->3, 4x4) 1236, D3 (3+2->2, 8x8) 896,
  //   up-sampling 4*4*4+4 and 3*3*4+3, head 2*2+2.
  EXPECT_EQ(parameter_count(build_model(toy_config(), 0)), 5909u);
}

TEST(ModelTest, RegistryListsEveryTensorOnce) {
  TemporalAutoencoder m = build_model(toy_config(), 0);
  std::set<std::string> names;
  std::set<const Tensor*> tensors;
  for (const auto& p : m.parameters()) {
    EXPECT_TRUE(names.insert(p.name).second) << p.name;
    EXPECT_TRUE(tensors.insert(p.tensor).second) << p.name;
  }
  EXPECT_TRUE(names.count("encoder.0.input_kernel"));
  EXPECT_TRUE(names.count("head.bias"));
}

TEST(ModelTest, ConfigValidation) {
  ModelConfig cfg = toy_config();
  cfg.seq_out = 2;
  EXPECT_THROW(build_model(cfg, 0), ConfigError);
  cfg = toy_config();
  cfg.height = 6;
  EXPECT_THROW(build_model(cfg, 0), ConfigError);
  cfg = toy_config();
  cfg.hidden_channels.pop_back();
  EXPECT_THROW(build_model(cfg, 0), ConfigError);
  cfg = toy_config();
  cfg.upsample_kernel = 3;
  EXPECT_THROW(build_model(cfg, 0), ConfigError);
}

TEST(ModelTest, ConstantPropagationThroughZeroModel) {
  TemporalAutoencoder m = build_model(toy_config(), 0);
  for (auto& p : m.parameters()) p.tensor->fill(0.0);
  const double beta = 0.7;
  m.head.bias.fill(beta);
  const Tensor out = forward(m, random_tensor({3, 2, 8, 8}, 1, 0.0, 1.0));
  const double expected = 1.0 / (1.0 + std::exp(-beta));
  for (double v : out.values()) EXPECT_DOUBLE_EQ(v, expected);
}

TEST(ModelTest, OutputsAreBoundedAndShaped) {
  const TemporalAutoencoder m = build_model(ModelConfig{}, 3);
  const Tensor out = forward(m, random_tensor({12, 8, 16, 16}, 2, 0.0, 1.0));
  EXPECT_EQ(out.shape(), (Shape{12, 8, 16, 16}));
  for (double v : out.values()) {
    EXPECT_GT(v, 0.0);
    EXPECT_LT(v, 1.0);
  }
  EXPECT_THROW(predict_hour(m, random_tensor({11, 8, 16, 16}, 2)), ShapeError);
}

TEST(ModelTest, DeterministicConstruction) {
  const auto a = build_model(toy_config(), 42), b = build_model(toy_config(), 42),
             c = build_model(toy_config(), 43);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  bool differs = false;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    EXPECT_EQ(*pa[i].tensor, *pb[i].tensor) << pa[i].name;
    differs = differs || !(*pa[i].tensor == *pc[i].tensor);
  }
  EXPECT_TRUE(differs);
}

TEST(ModelTest, SkipPathsReachTheOutput) {
  const TemporalAutoencoder m = build_model(toy_config(), 5);
  const Tensor x = random_tensor({3, 2, 8, 8}, 6, 0.0, 1.0);
  const Tensor base = forward(m, x);
  for (std::size_t e : {0, 1}) {
    ForwardOptions o;
    o.zero_skip[e] = true;
    EXPECT_GT(testing::max_abs_diff(forward(m, x, nullptr, o), base), 1e-9) << e;
  }
  ForwardOptions o;
  o.zero_skip[2] = true;
  EXPECT_EQ(forward(m, x, nullptr, o), base);

  ModelConfig cfg = toy_config();
  cfg.skips = false;
  const TemporalAutoencoder plain = build_model(cfg, 5);
  o.zero_skip = {true, true, true};
  EXPECT_EQ(forward(plain, x, nullptr, o), forward(plain, x));
}

TEST(ModelTest, EndToEndGradientMatchesFiniteDifferences) {
  for (bool downsample : {true, false}) {
    ModelConfig cfg = toy_config();
    cfg.downsample = downsample;
    TemporalAutoencoder m = build_model(cfg, 9);
    for (auto& p : m.parameters()) {
      if (p.name.ends_with("peephole")) *p.tensor = random_tensor(p.tensor->shape(), 10, -0.3, 0.3);
    }
    const Tensor x = random_tensor({3, 2, 8, 8}, 11, 0.0, 1.0);
    const Tensor y = random_tensor({3, 2, 8, 8}, 12, 0.0, 1.0);
    ForwardTape tape;
    const Tensor pred = forward(m, x, &tape);
    TemporalAutoencoder g = zeros_like(m);
    backward(m, tape, mse_grad(pred, y), g);

    auto params = m.parameters();
    const auto grads = std::as_const(g).parameters();
    testing::GradientMismatch worst;
    std::mt19937_64 pick(13);
    for (int s = 0; s < 100; ++s) {
      const std::size_t k = pick() % params.size();
      const std::size_t i = pick() % params[k].tensor->size();
      double& v = (*params[k].tensor)[i];
      const double saved = v;
      v = saved + 1e-5;
      const double up = mse(forward(m, x), y);
      v = saved - 1e-5;
      const double down = mse(forward(m, x), y);
      v = saved;
      testing::merge(worst, testing::compare_gradients(
                                Tensor({1}, (*grads[k].tensor)[i]),
                                Tensor({1}, (up - down) / 2e-5)));
    }
    EXPECT_TRUE(worst.within(1e-3)) << "rel " << worst.max_rel << " abs " << worst.max_abs;
  }
}

}  // namespace
}  // namespace tae
