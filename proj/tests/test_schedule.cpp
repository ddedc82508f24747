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
#include <sstream>

#include "oracles.hpp"
#include "tae/schedule.hpp"
#include "tae/training.hpp"

namespace tae {
namespace {

ClrSchedule schedule(ClrMode mode, double base, double max, std::size_t step) {
  ClrSchedule s;
  s.mode = mode;
  s.base_lr = base;
  s.max_lr = max;
  s.step_size = step;
  return s;
}

TEST(ClrTest, TriangularEndpoints) {
  const ClrSchedule s = schedule(ClrMode::triangular, 1e-7, 2e-3, 10);
  EXPECT_EQ(clr(0, s), 1e-7);
  EXPECT_EQ(clr(10, s), 2e-3);
  EXPECT_EQ(clr(20, s), 1e-7);
  EXPECT_EQ(clr(30, s), 2e-3);
  EXPECT_NEAR(clr(5, s), 1e-7 + 0.5 * (2e-3 - 1e-7), 1e-18);
}

TEST(ClrTest, TriangularIsPiecewiseLinear) {
  const ClrSchedule s = schedule(ClrMode::triangular, 0.1, 1.1, 8);
  for (std::uint64_t i = 1; i < 40; ++i) {
    if (i % 8 == 0) continue;  // kinks
    EXPECT_NEAR(clr(i - 1, s) + clr(i + 1, s), 2 * clr(i, s), 1e-14) << i;
  }
}

TEST(ClrTest, StaysWithinBounds) {
  for (ClrMode mode : {ClrMode::triangular, ClrMode::triangular2, ClrMode::exp_range}) {
    ClrSchedule s = schedule(mode, 1e-7, 2e-3, 7);
    s.gamma = 0.99;
    for (std::uint64_t i = 0; i < 200; ++i) {
      EXPECT_GE(clr(i, s), s.base_lr);
      EXPECT_LE(clr(i, s), s.max_lr);
    }
  }
}

TEST(ClrTest, Triangular2HalvesEachCycle) {
  const ClrSchedule s = schedule(ClrMode::triangular2, 0.0, 1.0, 4);
  EXPECT_NEAR(clr(4, s), 1.0, 1e-15);
  EXPECT_NEAR(clr(12, s), 0.5, 1e-15);
  EXPECT_NEAR(clr(20, s), 0.25, 1e-15);
}

TEST(ClrTest, ExpRangeDecaysPerIteration) {
  ClrSchedule s = schedule(ClrMode::exp_range, 1e-3, 2e-3, 5);
  s.gamma = 0.9;
  EXPECT_NEAR(clr(5, s), 1e-3 + 1e-3 * std::pow(0.9, 5), 1e-18);
  EXPECT_NEAR(clr(15, s), 1e-3 + 1e-3 * std::pow(0.9, 15), 1e-18);
}

TEST(ClrTest, Validation) {
  EXPECT_THROW(schedule(ClrMode::triangular, 0.0, 1.0, 1).validate(), ConfigError);
  EXPECT_THROW(schedule(ClrMode::triangular, 2.0, 1.0, 1).validate(), ConfigError);
  EXPECT_THROW(schedule(ClrMode::triangular, 0.1, 1.0, 0).validate(), ConfigError);
  ClrSchedule s = schedule(ClrMode::exp_range, 0.1, 1.0, 1);
  s.gamma = 1.5;
  EXPECT_THROW(s.validate(), ConfigError);
  EXPECT_EQ(parse_clr_mode("triangular2"), ClrMode::triangular2);
  EXPECT_THROW(parse_clr_mode("cosine"), ConfigError);
}

struct Single {
  Tensor param;
  Tensor grad;
  std::vector<NamedTensor> params() { return {{"p", &param}}; }
  std::vector<ConstNamedTensor> grads() const { return {{"p", &grad}}; }
};

TEST(AdamTest, ZeroGradientIsIdentity) {
  Single s{testing::random_tensor({5}, 1), Tensor({5})};
  const Tensor before = s.param;
  AdamState st;
  for (int i = 0; i < 3; ++i) adam_step(s.params(), s.grads(), st, 1e-3);
  EXPECT_EQ(s.param, before);
}

TEST(AdamTest, FirstStepMagnitude) {
  Single s{Tensor({1}), Tensor({1}, 0.1)};
  AdamState st;
  adam_step(s.params(), s.grads(), st, 1e-3);
  // Bias correction makes m_hat = g and v_hat = g^2, so the step is
  // lr * g / (|g| + eps) = 1e-3 * 0.1 / 0.10000001.
  EXPECT_NEAR(s.param[0], -9.9999990000001e-4, 1e-18);
  EXPECT_EQ(st.step, 1u);
}

TEST(AdamTest, ConstantGradientDoesNotGrowSteps) {
  Single s{Tensor({1}), Tensor({1}, -0.3)};
  AdamState st;
  adam_step(s.params(), s.grads(), st, 1e-3);
  const double d1 = std::abs(s.param[0]);
  const double p1 = s.param[0];
  adam_step(s.params(), s.grads(), st, 1e-3);
  const double d2 = std::abs(s.param[0] - p1);
  EXPECT_LE(d2, d1 * (1 + 1e-9));
}

TEST(AdamTest, NonFiniteGradientSkipsStep) {
  Single s{Tensor({2}, 1.0), Tensor({2}, std::vector<double>{0.1, NAN})};
  AdamState st;
  const AdamStepResult r = adam_step(s.params(), s.grads(), st, 1e-3);
  EXPECT_FALSE(r.applied);
  EXPECT_EQ(r.rejected, "p");
  EXPECT_EQ(s.param, Tensor({2}, 1.0));
  EXPECT_EQ(st.step, 0u);
}

TEST(AdamTest, ShapeMismatchThrows) {
  Single s{Tensor({2}), Tensor({3})};
  AdamState st;
  EXPECT_THROW(adam_step(s.params(), s.grads(), st, 1e-3), ShapeError);
}

TEST(MseTest, Examples) {
  EXPECT_EQ(mse(Tensor({3}, 0.4), Tensor({3}, 0.4)), 0.0);
  EXPECT_EQ(mse(Tensor({4}, 1.0), Tensor({4}, 0.0)), 1.0);
  EXPECT_EQ(mse(Tensor({2}, std::vector<double>{0.5, 0}), Tensor({2}, std::vector<double>{0, 0.5})),
            0.25);
  const Tensor a = testing::random_tensor({7}, 2), b = testing::random_tensor({7}, 3);
  EXPECT_EQ(mse(a, b), mse(b, a));
  EXPECT_THROW(mse(a, Tensor({6})), ShapeError);
}

TEST(MseTest, GradientMatchesFiniteDifferences) {
  Tensor p = testing::random_tensor({2, 3}, 4);
  const Tensor t = testing::random_tensor({2, 3}, 5);
  EXPECT_TRUE(testing::compare_gradients(mse_grad(p, t),
                                         testing::numeric_gradient([&] { return mse(p, t); }, p))
                  .within(1e-6));
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.epochs = 27;
  EXPECT_THROW(c.validate(), ConfigError);
  c.fixed_lr = 1e-3;
  EXPECT_NO_THROW(c.validate());
  c.fixed_lr = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(derived_step_size(TrainConfig{}, 18), 36u);
}

ModelConfig tiny_model() {
  ModelConfig m;
  m.input_channels = m.output_channels = 8;
  m.hidden_channels = {2, 2, 2, 2, 2, 2};
  m.seq_in = m.seq_out = 2;
  m.height = m.width = 4;
  return m;
}

std::vector<SequenceSample> tiny_samples(std::size_t n, std::uint64_t seed) {
  std::vector<SequenceSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({testing::random_tensor({2, 8, 4, 4}, seed + 2 * i, 0, 1),
                   testing::random_tensor({2, 8, 4, 4}, seed + 2 * i + 1, 0, 1), 0, 0});
  }
  return out;
}

TEST(FitTest, ZeroLearningRateLeavesParametersUnchanged) {
  TemporalAutoencoder m = build_model(tiny_model(), 1);
  const TemporalAutoencoder init = m;
  TrainConfig c;
  c.epochs = 2;
  c.fixed_lr = 0.0;
  fit(m, tiny_samples(5, 10), {}, c, ClrSchedule{});
  const auto a = m.parameters();
  const auto b = init.parameters();
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(*a[i].tensor, *b[i].tensor);
}

TEST(FitTest, LogShapeAndSchedule) {
  TemporalAutoencoder m = build_model(tiny_model(), 1);
  TrainConfig c;
  c.epochs = 4;
  c.cycles = 2;
  c.batch_size = 2;
  const auto train = tiny_samples(5, 20), val = tiny_samples(2, 40);
  const TrainingLog log = fit(m, train, val, c, ClrSchedule{});
  EXPECT_EQ(log.batches_per_epoch, 3u);
  EXPECT_EQ(log.schedule.step_size, 3u);
  ASSERT_EQ(log.iterations.size(), 12u);
  ASSERT_EQ(log.epochs.size(), 4u);
  for (const auto& r : log.iterations) {
    EXPECT_EQ(r.val_mse.has_value(), r.iteration % 3 == 2);
    EXPECT_EQ(r.lr, clr(r.iteration, log.schedule));
  }
  EXPECT_EQ(log.iterations[3].lr, 2e-3);
  EXPECT_TRUE(log.epochs.back().val_mse.has_value());
}

TEST(FitTest, ReproducibleCsv) {
  auto run = [] {
    TemporalAutoencoder m = build_model(tiny_model(), 7);
    TrainConfig c;
    c.epochs = 2;
    c.cycles = 1;
    c.seed = 3;
    std::ostringstream out;
    write_training_csv(out, fit(m, tiny_samples(4, 50), tiny_samples(1, 60), c, ClrSchedule{}));
    return out.str();
  };
  const std::string a = run();
  EXPECT_EQ(a, run());
  EXPECT_EQ(a.substr(0, a.find('\n')), "epoch,iteration,lr,train_mse,val_mse");
}

TEST(FitTest, NonFiniteLossAborts) {
  TemporalAutoencoder m = build_model(tiny_model(), 1);
  auto data = tiny_samples(2, 70);
  data[1].target[0] = NAN;
  TrainConfig c;
  c.epochs = 1;
  c.fixed_lr = 1e-3;
  EXPECT_THROW(fit(m, data, {}, c, ClrSchedule{}), TrainingError);
  EXPECT_THROW(fit(m, {}, {}, c, ClrSchedule{}), TrainingError);
}

TEST(FitTest, GradientClippingShrinksTheFirstStep) {
  const TemporalAutoencoder init = build_model(tiny_model(), 2);
  TrainConfig c;
  c.epochs = 1;
  c.batch_size = 4;
  c.fixed_lr = 1e-2;
  const auto data = tiny_samples(4, 80);
  auto largest_move = [&](const TemporalAutoencoder& m) {
    double d = 0.0;
    const auto p = m.parameters(), q = init.parameters();
    for (std::size_t k = 0; k < p.size(); ++k) d = std::max(d, testing::max_abs_diff(*p[k].tensor, *q[k].tensor));
    return d;
  };
  TemporalAutoencoder free = init, clipped = init;
  fit(free, data, {}, c, ClrSchedule{});
  // A first Adam step moves each parameter by lr * g / (|g| + eps); with the
  // global norm clipped far below eps the move collapses.
  c.grad_clip = 1e-12;
  fit(clipped, data, {}, c, ClrSchedule{});
  EXPECT_NEAR(largest_move(free), 1e-2, 1e-4);
  EXPECT_LT(largest_move(clipped), 1e-5);
}

}  // namespace
}  // namespace tae
