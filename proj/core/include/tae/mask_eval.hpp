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

// Road masks, output-bin selection, de-normalization and validation scoring.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "tae/data.hpp"
#include "tae/model.hpp"

namespace tae {

struct BinaryMask {
  std::size_t height = 0;
  std::size_t width = 0;
  /// Row-major H*W, 0 or 1.
  std::vector<std::uint8_t> bits;
  /// Number of days aggregated.
  std::size_t days = 0;

  bool on(std::size_t y, std::size_t x) const { return bits[y * width + x] != 0; }
  std::size_t count() const;
  /// Every pixel set in `other` is set here.
  bool contains(const BinaryMask& other) const;
  bool operator==(const BinaryMask&) const = default;
};

/// A pixel is on iff any traffic channel is nonzero there in any bin of any
/// day. Incidents are ignored. Throws DataError for an empty list.
BinaryMask build_mask(std::span<const ByteTensor> days);

/// Elementwise OR; day counts add.
BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b);

/// Zeros every channel and frame of `pred` [T, C, H, W] at off-mask pixels.
Tensor apply_mask(const Tensor& pred, const BinaryMask& mask);

/// Output frames at +5, +10, +15, +30, +45 and +60 minutes.
inline constexpr std::array<std::size_t, 6> kReportedBins{0, 1, 2, 5, 8, 11};

/// Frames kReportedBins of a 12-frame tensor.
Tensor select_bins(const Tensor& pred12);

/// Round-half-up of 255 v after clamping v to [0, 1].
std::uint8_t denormalize_value(double v);
ByteTensor denormalize(const Tensor& pred);

struct EvalOptions {
  const BinaryMask* mask = nullptr;
  /// Score only kReportedBins.
  bool select_6 = false;
};

/// Mean MSE over validation sequences on normalized values.
double evaluate(const TemporalAutoencoder& model,
                std::span<const SequenceSample> samples,
                const EvalOptions& options = {});

struct EvalRow {
  std::string city;
  std::string config;
  bool masked = false;
  double val_mse = 0.0;
};

void write_eval_header(std::ostream& out);
/// `city,config,masked,val_mse`, MSE printed with %.17g.
void write_eval_row(std::ostream& out, const EvalRow& row);

/// u8 TFRM [H, W] with values 0 and 1.
void save_mask(const std::filesystem::path& path, const BinaryMask& mask);
BinaryMask load_mask(const std::filesystem::path& path);

}  // namespace tae
