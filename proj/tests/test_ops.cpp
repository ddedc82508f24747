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
#include <cstring>
#include <memory>
#include <vector>

#include "oracles.hpp"
#include "tae/ops.hpp"

namespace tae {
namespace {

using testing::compare_gradients;
using testing::dot;
using testing::max_abs_diff;
using testing::numeric_gradient;
using testing::random_tensor;

TEST(ElementwiseTest, KnownValues) {
  const Tensor x({3}, std::vector<double>{0.0, 2.0, -800.0});
  const Tensor s = sigmoid(x);
  EXPECT_EQ(s[0], 0.5);
  // 1 / (1 + e^-2) evaluated in 50-digit arithmetic.
  EXPECT_NEAR(s[1], 0.88079707797788244406, 1e-15);
  EXPECT_EQ(s[2], 0.0);
  EXPECT_FALSE(std::isnan(s[2]));
  EXPECT_EQ(tanh(Tensor({1}))[0], 0.0);

  const Tensor a = random_tensor({2, 3}, 1);
  EXPECT_EQ(hadamard(a, Tensor({2, 3}, 1.0)), a);
  EXPECT_EQ(add(a, Tensor({2, 3})), a);
  EXPECT_THROW(add(a, Tensor({3, 2})), ShapeError);
  EXPECT_THROW(elementwise(Elementwise::hadamard, a), ShapeError);
}

TEST(Conv2dTest, OneByOneKernelIsPixelwiseLinear) {
  const Tensor x = random_tensor({2, 3, 3}, 2);
  const Tensor k({1, 2, 1, 1}, std::vector<double>{0.5, -2.0});
  const Tensor b({1}, std::vector<double>{0.25});
  const Tensor y = conv2d(x, ConvSpec{2, 1, 1, 1}, k, b);
  for (std::size_t p = 0; p < 9; ++p) {
    EXPECT_DOUBLE_EQ(y[p], 0.5 * x[p] - 2.0 * x[9 + p] + 0.25);
  }
}

TEST(Conv2dTest, MatchesNaiveLoops) {
  const Tensor x = random_tensor({1, 4, 4}, 3);
  const Tensor k = random_tensor({1, 1, 3, 3}, 4);
  EXPECT_LT(max_abs_diff(conv2d(x, ConvSpec{1, 1, 3, 3}, k, {}),
                         testing::naive_conv2d(x, k, {})),
            1e-14);

  const Tensor x2 = random_tensor({3, 5, 6}, 5);
  const Tensor k2 = random_tensor({4, 3, 5, 3}, 6);
  const Tensor b2 = random_tensor({4}, 7);
  EXPECT_LT(max_abs_diff(conv2d(x2, ConvSpec{3, 4, 5, 3}, k2, b2),
                         testing::naive_conv2d(x2, k2, b2)),
            1e-13);
}

TEST(Conv2dTest, RejectsBadShapes) {
  const Tensor x({2, 4, 4});
  EXPECT_THROW(conv2d(x, ConvSpec{3, 1, 3, 3}, Tensor({1, 3, 3, 3}), {}), ShapeError);
  EXPECT_THROW(conv2d(x, ConvSpec{2, 1, 2, 2}, Tensor({1, 2, 2, 2}), {}), ShapeError);
  EXPECT_THROW(conv2d(x, ConvSpec{2, 1, 3, 3}, Tensor({1, 2, 1, 1}), {}), ShapeError);
}

TEST(Conv2dTest, BackwardMatchesFiniteDifferences) {
  const ConvSpec spec{2, 3, 3, 3};
  Tensor x = random_tensor({2, 5, 4}, 8);
  Tensor k = random_tensor(spec.kernel_shape(), 9);
  Tensor b = random_tensor({3}, 10);
  const Tensor r = random_tensor({3, 5, 4}, 11);
  auto loss = [&] { return dot(r, conv2d(x, spec, k, b)); };
  const Conv2dGrads g = conv2d_backward(x, k, r);
  EXPECT_TRUE(compare_gradients(g.input, numeric_gradient(loss, x)).within(1e-4));
  EXPECT_TRUE(compare_gradients(g.kernel, numeric_gradient(loss, k)).within(1e-4));
  EXPECT_TRUE(compare_gradients(g.bias, numeric_gradient(loss, b)).within(1e-4));
}

TEST(Conv2dTest, BackwardIsIndependentOfHeapLayout) {
  const Tensor x = random_tensor({3, 13, 11}, 30);
  const Tensor k = random_tensor({5, 3, 3, 3}, 31);
  const Tensor g = random_tensor({5, 13, 11}, 32, -1e3, 1e3);
  const Conv2dGrads want = conv2d_backward(x, k, g);
  // Live copies and odd-sized padding put each copy at a new address.
  std::vector<std::unique_ptr<char[]>> padding;
  std::vector<Tensor> copies;
  for (std::size_t shift = 1; shift < 16; ++shift) {
    padding.emplace_back(new char[24 * shift]);
    copies.push_back(g.reshaped(g.shape()));
    const Conv2dGrads got = conv2d_backward(x, k, copies.back());
    EXPECT_EQ(std::memcmp(got.bias.data(), want.bias.data(), 5 * sizeof(double)), 0)
        << "shift " << shift;
  }
}

TEST(TransposedConvTest, UnitInputOnesKernel) {
  const Tensor y = transposed_conv2d(Tensor({1, 1, 1}, 1.0), Tensor({1, 1, 2, 2}, 1.0), {});
  EXPECT_EQ(y, Tensor({1, 2, 2}, 1.0));
}

TEST(TransposedConvTest, MatchesNaiveDefinition) {
  for (std::size_t k : {2, 4, 6}) {
    const Tensor x = random_tensor({3, 3, 4}, 20 + k);
    const Tensor kern = random_tensor({3, 2, k, k}, 30 + k);
    const Tensor b = random_tensor({2}, 40 + k);
    EXPECT_LT(max_abs_diff(transposed_conv2d(x, kern, b),
                           testing::naive_transposed_conv2d(x, kern, b, 2)),
              1e-13)
        << "kernel " << k;
  }
  EXPECT_THROW(transposed_conv2d(Tensor({1, 2, 2}), Tensor({1, 1, 3, 3}), {}), ShapeError);
}

TEST(TransposedConvTest, IsAdjointOfStridedConvolution) {
  // <T x, y> == <x, T^T y> where T^T is the input gradient of T.
  const Tensor x = random_tensor({2, 3, 3}, 50);
  const Tensor k = random_tensor({2, 3, 4, 4}, 51);
  const Tensor y = random_tensor({3, 6, 6}, 52);
  const double lhs = dot(transposed_conv2d(x, k, {}), y);
  const double rhs = dot(x, transposed_conv2d_backward(x, k, y).input);
  EXPECT_NEAR(lhs, rhs, 1e-12 * std::abs(lhs));
}

TEST(TransposedConvTest, BackwardMatchesFiniteDifferences) {
  Tensor x = random_tensor({2, 3, 2}, 60);
  Tensor k = random_tensor({2, 3, 4, 4}, 61);
  Tensor b = random_tensor({3}, 62);
  const Tensor r = random_tensor({3, 6, 4}, 63);
  auto loss = [&] { return dot(r, transposed_conv2d(x, k, b)); };
  const TransposedConvGrads g = transposed_conv2d_backward(x, k, r);
  EXPECT_TRUE(compare_gradients(g.input, numeric_gradient(loss, x)).within(1e-4));
  EXPECT_TRUE(compare_gradients(g.kernel, numeric_gradient(loss, k)).within(1e-4));
  EXPECT_TRUE(compare_gradients(g.bias, numeric_gradient(loss, b)).within(1e-4));
}

TEST(MaxPoolTest, ExamplesAndOddExtents) {
  const Tensor x({1, 2, 2}, std::vector<double>{1, 3, 2, 4});
  const PoolResult p = maxpool2d(x);
  EXPECT_EQ(p.output, Tensor({1, 1, 1}, 4.0));
  EXPECT_EQ(p.argmax[0], 3u);

  const Tensor odd = random_tensor({2, 5, 3}, 70);
  const PoolResult q = maxpool2d(odd);
  EXPECT_EQ(q.output.shape(), (Shape{2, 3, 2}));
  EXPECT_EQ(q.output, testing::naive_maxpool2d(odd, 2));
}

TEST(MaxPoolTest, TiesRouteToFirstMaximum) {
  const PoolResult p = maxpool2d(Tensor({1, 2, 2}, 7.0));
  EXPECT_EQ(p.argmax[0], 0u);
  const Tensor g = maxpool2d_backward(p, Tensor({1, 1, 1}, 1.0));
  EXPECT_EQ(g, Tensor({1, 2, 2}, std::vector<double>{1, 0, 0, 0}));
}

TEST(MaxPoolTest, BackwardMatchesFiniteDifferences) {
  Tensor x({2, 4, 5});
  // Distinct values spaced well beyond the step.
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::fmod(0.37 * i * i, 5.0) + 0.001 * i;
  const PoolResult p = maxpool2d(x);
  const Tensor r = random_tensor(p.output.shape(), 71);
  auto loss = [&] { return dot(r, maxpool2d(x).output); };
  EXPECT_TRUE(compare_gradients(maxpool2d_backward(p, r), numeric_gradient(loss, x))
                  .within(1e-4));
}

TEST(ConcatTest, LayoutAndSplit) {
  const Tensor a = random_tensor({2, 3, 3}, 80);
  const Tensor b = random_tensor({1, 3, 3}, 81);
  const Tensor c = concat_channels(a, b);
  EXPECT_EQ(c.shape(), (Shape{3, 3, 3}));
  EXPECT_EQ(c.at({0, 1, 2}), a.at({0, 1, 2}));
  EXPECT_EQ(c.at({2, 1, 2}), b.at({0, 1, 2}));
  const auto [sa, sb] = split_channels(c, 2);
  EXPECT_EQ(sa, a);
  EXPECT_EQ(sb, b);
  EXPECT_THROW(concat_channels(a, Tensor({1, 2, 3})), ShapeError);
}

TEST(ConcatTest, BackwardMatchesFiniteDifferences) {
  Tensor a = random_tensor({2, 2, 3}, 82);
  Tensor b = random_tensor({3, 2, 3}, 83);
  const Tensor r = random_tensor({5, 2, 3}, 84);
  auto loss = [&] { return dot(r, concat_channels(a, b)); };
  const auto [ga, gb] = split_channels(r, 2);
  EXPECT_TRUE(compare_gradients(ga, numeric_gradient(loss, a)).within(1e-4));
  EXPECT_TRUE(compare_gradients(gb, numeric_gradient(loss, b)).within(1e-4));
}

}  // namespace
}  // namespace tae
