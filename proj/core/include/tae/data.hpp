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

// Day tensors, sequence sampling and the synthetic city generator.
//
// A day is a u8 tensor of shape (288, H, W, 9): 288 five-minute bins, the
// city grid, and channels (volume, speed) for the NE, NW, SE and SW headings
// followed by a road-incident channel.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tae/tensor.hpp"

namespace tae {

inline constexpr std::size_t kBinsPerDay = 288;
inline constexpr std::size_t kDayChannels = 9;
inline constexpr std::size_t kTrafficChannels = 8;
inline constexpr std::size_t kIncidentChannel = 8;

enum class Heading : std::size_t { north_east = 0, north_west = 1, south_east = 2, south_west = 3 };

constexpr std::size_t volume_channel(Heading h) { return 2 * static_cast<std::size_t>(h); }
constexpr std::size_t speed_channel(Heading h) { return 2 * static_cast<std::size_t>(h) + 1; }

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws DataError unless `day` is (288, H, W, channels).
void validate_day(const ByteTensor& day, std::size_t channels = kDayChannels);

enum class Sampling { non_overlapping, overlapping };

struct SamplerConfig {
  Sampling strategy = Sampling::non_overlapping;
  std::size_t seq_in = 12;
  std::size_t seq_out = 12;
  /// Start-to-start distance for overlapping sampling.
  std::size_t stride = 1;

  void validate(std::size_t day_length = kBinsPerDay) const;
};

/// floor(L / (S_i + S_o)) windows for non-overlapping sampling and
/// floor((L - (S_i + S_o)) / stride) + 1 for overlapping.
std::size_t sequences_per_day(const SamplerConfig& cfg,
                              std::size_t day_length = kBinsPerDay);

std::vector<std::size_t> window_indices(const SamplerConfig& cfg,
                                        std::size_t day_length = kBinsPerDay);

inline double normalize_value(std::uint8_t v) { return v / 255.0; }

/// Elementwise v / 255, same shape.
Tensor normalize(const ByteTensor& day);

ByteTensor drop_incident_channel(const ByteTensor& day);

struct SequenceSample {
  Tensor input;   // [S_i, 8, H, W] in [0, 1]
  Tensor target;  // [S_o, 8, H, W] in [0, 1]
  std::size_t day = 0;
  std::size_t start_bin = 0;
};

/// Cuts one window from a day with 8 or 9 channels (the incident channel
/// is ignored) and converts it to channel-first normalized frames.
SequenceSample make_sample(const ByteTensor& day, std::size_t day_index,
                           std::size_t start_bin, std::size_t seq_in,
                           std::size_t seq_out);

/// All windows of all days, days in order. `first_day_index` labels days[0].
std::vector<SequenceSample> sample_sequences(std::span<const ByteTensor> days,
                                             const SamplerConfig& cfg,
                                             std::size_t first_day_index = 0);

struct SyntheticCityConfig {
  std::uint64_t seed = 0;
  std::size_t height = 16;
  std::size_t width = 16;
  std::size_t days = 8;
  bool drift = false;
  /// Fraction of grid pixels carrying traffic on an undrifted day.
  double road_fraction = 0.25;
  /// Chance that a day after the first is drifted (drift on only).
  double drift_probability = 0.5;
  /// Per bin and road pixel chance of a nonzero incident value.
  double incident_rate = 0.002;

  void validate() const;
};

/// Road pixels (1) of the undrifted skeleton, row-major H*W.
std::vector<std::uint8_t> synthetic_road_layout(const SyntheticCityConfig& cfg);

/// Deterministic days of (288, H, W, 9) traffic on a sparse road skeleton.
/// Day 0 is never drifted; with drift on and at least two days, at least one
/// later day has part of its skeleton shifted by one pixel onto new pixels.
std::vector<ByteTensor> synthetic_city(const SyntheticCityConfig& cfg);

void save_day(const std::filesystem::path& path, const ByteTensor& day);
ByteTensor load_day(const std::filesystem::path& path);

std::string day_file_name(std::size_t index);

struct DatasetMeta {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t days = 0;
  std::uint64_t seed = 0;
  bool drift = false;
  double road_fraction = 0.0;
};

/// Writes day_####.tfrm files and meta.json into `dir` (created if needed).
void write_dataset(const std::filesystem::path& dir,
                   std::span<const ByteTensor> days, const DatasetMeta& meta);
DatasetMeta read_dataset_meta(const std::filesystem::path& dir);
std::vector<ByteTensor> load_dataset(const std::filesystem::path& dir);

/// Training days come first; the last `val_days` days are held out.
struct DaySplit {
  std::size_t train_begin = 0, train_end = 0;
  std::size_t val_begin = 0, val_end = 0;
};

/// val_days == 0 picks max(1, days / 4). Requires at least two days.
DaySplit split_days(std::size_t days, std::size_t val_days = 0);

}  // namespace tae
