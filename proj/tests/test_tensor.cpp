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

#include <cstring>

#include "tae/tensor.hpp"
#include "tae/tfrm.hpp"

namespace tae {
namespace {

TEST(TensorTest, ShapeAndSize) {
  Tensor t({2, 3, 4});
  EXPECT_EQ(t.rank(), 3u);
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.extent(1), 3u);
  for (double v : t.values()) EXPECT_EQ(v, 0.0);
}

TEST(TensorTest, RejectsZeroExtentAndBadData) {
  EXPECT_THROW(Tensor({2, 0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2}, std::vector<double>(3)), ShapeError);
}

TEST(TensorTest, RowMajorOffsets) {
  Tensor t({2, 3, 4});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
  EXPECT_EQ(t.at({1, 2, 3}), 23.0);
  EXPECT_EQ(t.at({0, 1, 0}), 4.0);
  EXPECT_THROW(t.at({0, 3, 0}), std::out_of_range);
  EXPECT_THROW(t.at({0, 0}), std::out_of_range);
}

TEST(TensorTest, FramesRoundTripThroughStack) {
  Tensor seq({3, 2, 2});
  for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = static_cast<double>(i);
  std::vector<Tensor> frames{frame(seq, 0), frame(seq, 1), frame(seq, 2)};
  EXPECT_EQ(frames[1].shape(), (Shape{2, 2}));
  EXPECT_EQ(frames[1][0], 4.0);
  EXPECT_EQ(stack_frames<double>(frames), seq);
}

TEST(TensorTest, ReshapeKeepsData) {
  Tensor t({2, 3}, std::vector<double>{1, 2, 3, 4, 5, 6});
  const Tensor r = t.reshaped({3, 2});
  EXPECT_EQ(r.at({2, 1}), 6.0);
  EXPECT_THROW(t.reshaped({4, 2}), ShapeError);
}

TEST(TfrmTest, RoundTripIsBitExact) {
  Tensor t({2, 3});
  const double values[] = {0.1, -0.0, 1e-310, 3.141592653589793, -2.5e300, 7.0};
  for (std::size_t i = 0; i < 6; ++i) t[i] = values[i];
  const Tensor back = decode_tfrm_f64(encode_tfrm(t));
  ASSERT_EQ(back.shape(), t.shape());
  EXPECT_EQ(std::memcmp(back.data(), t.data(), 6 * sizeof(double)), 0);

  ByteTensor b({4}, std::vector<std::uint8_t>{0, 1, 128, 255});
  EXPECT_EQ(decode_tfrm_u8(encode_tfrm(b)), b);
}

TEST(TfrmTest, HeaderLayout) {
  ByteTensor b({2}, std::vector<std::uint8_t>{7, 9});
  const std::string bytes = encode_tfrm(b);
  // magic, version 1, dtype 0, rank 1, extent 2, payload.
  const std::string expected("TFRM\x01\0\0\0\0\0\0\0\x01\0\0\0\x02\0\0\0\x07\x09", 22);
  EXPECT_EQ(bytes, expected);
}

TfrmErrorCode decode_error(const std::string& bytes) {
  try {
    decode_tfrm_f64(bytes);
  } catch (const TfrmError& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error";
  return TfrmErrorCode::io_failure;
}

TEST(TfrmTest, ReportsCorruption) {
  const std::string good = encode_tfrm(Tensor({2}, std::vector<double>{1, 2}));
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_EQ(decode_error(bad), TfrmErrorCode::bad_magic);
  bad = good;
  bad[4] = 2;
  EXPECT_EQ(decode_error(bad), TfrmErrorCode::unsupported_version);
  EXPECT_EQ(decode_error(good.substr(0, good.size() - 1)),
            TfrmErrorCode::truncated_payload);
  EXPECT_EQ(decode_error(good + "x"), TfrmErrorCode::trailing_data);
  EXPECT_EQ(decode_error(encode_tfrm(ByteTensor({1}))), TfrmErrorCode::dtype_mismatch);
  EXPECT_EQ(decode_error(good.substr(0, 10)), TfrmErrorCode::bad_header);
}

}  // namespace
}  // namespace tae
