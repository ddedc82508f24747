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

#include "tae/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numbers>

#include "tae/random.hpp"
#include "tae/tfrm.hpp"

namespace tae {

void validate_day(const ByteTensor& day, std::size_t channels) {
  if (day.rank() != 4 || day.extent(0) != kBinsPerDay ||
      day.extent(3) != channels) {
    throw DataError("day tensor must be (288, H, W, " +
                    std::to_string(channels) + "), got " +
                    to_string(day.shape()));
  }
}

void SamplerConfig::validate(std::size_t day_length) const {
  if (seq_in == 0 || seq_out == 0) {
    throw DataError("sequence lengths must be positive");
  }
  if (seq_in + seq_out > day_length) {
    throw DataError("S_i + S_o = " + std::to_string(seq_in + seq_out) +
                    " exceeds the day length " + std::to_string(day_length));
  }
  if (strategy == Sampling::overlapping && stride == 0) {
    throw DataError("overlapping stride must be positive");
  }
}

std::size_t sequences_per_day(const SamplerConfig& cfg,
                              std::size_t day_length) {
  cfg.validate(day_length);
  const std::size_t window = cfg.seq_in + cfg.seq_out;
  if (cfg.strategy == Sampling::non_overlapping) return day_length / window;
  return (day_length - window) / cfg.stride + 1;
}

std::vector<std::size_t> window_indices(const SamplerConfig& cfg,
                                        std::size_t day_length) {
  const std::size_t n = sequences_per_day(cfg, day_length);
  const std::size_t step = cfg.strategy == Sampling::non_overlapping
                               ? cfg.seq_in + cfg.seq_out
                               : cfg.stride;
  std::vector<std::size_t> starts(n);
  for (std::size_t k = 0; k < n; ++k) starts[k] = k * step;
  return starts;
}

Tensor normalize(const ByteTensor& day) {
  std::vector<double> data(day.size());
  for (std::size_t i = 0; i < day.size(); ++i) data[i] = normalize_value(day[i]);
  return Tensor(day.shape(), std::move(data));
}

ByteTensor drop_incident_channel(const ByteTensor& day) {
  validate_day(day, kDayChannels);
  const std::size_t pixels = day.extent(0) * day.extent(1) * day.extent(2);
  std::vector<std::uint8_t> data(pixels * kTrafficChannels);
  for (std::size_t p = 0; p < pixels; ++p) {
    std::copy_n(day.data() + p * kDayChannels, kTrafficChannels,
                data.data() + p * kTrafficChannels);
  }
  return ByteTensor({day.extent(0), day.extent(1), day.extent(2), kTrafficChannels},
                    std::move(data));
}

SequenceSample make_sample(const ByteTensor& day, std::size_t day_index,
                           std::size_t start_bin, std::size_t seq_in,
                           std::size_t seq_out) {
  if (day.rank() != 4 || day.extent(0) != kBinsPerDay ||
      day.extent(3) < kTrafficChannels) {
    throw DataError("make_sample: bad day shape " + to_string(day.shape()));
  }
  if (start_bin + seq_in + seq_out > day.extent(0)) {
    throw DataError("make_sample: window starting at bin " +
                    std::to_string(start_bin) + " crosses the day boundary");
  }
  const std::size_t h = day.extent(1), w = day.extent(2), ch = day.extent(3);
  auto cut = [&](std::size_t first, std::size_t count) {
    Tensor out({count, kTrafficChannels, h, w});
    for (std::size_t t = 0; t < count; ++t) {
      const std::uint8_t* bin = day.data() + (first + t) * h * w * ch;
      double* dst = out.data() + t * kTrafficChannels * h * w;
      for (std::size_t p = 0; p < h * w; ++p) {
        for (std::size_t c = 0; c < kTrafficChannels; ++c) {
          dst[c * h * w + p] = normalize_value(bin[p * ch + c]);
        }
      }
    }
    return out;
  };
  return {cut(start_bin, seq_in), cut(start_bin + seq_in, seq_out), day_index,
          start_bin};
}

std::vector<SequenceSample> sample_sequences(std::span<const ByteTensor> days,
                                             const SamplerConfig& cfg,
                                             std::size_t first_day_index) {
  const auto starts = window_indices(cfg);
  std::vector<SequenceSample> out;
  out.reserve(days.size() * starts.size());
  for (std::size_t d = 0; d < days.size(); ++d) {
    for (std::size_t s : starts) {
      out.push_back(make_sample(days[d], first_day_index + d, s, cfg.seq_in,
                                cfg.seq_out));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic city

void SyntheticCityConfig::validate() const {
  if (height < 8 || width < 8) {
    throw DataError("synthetic grid must be at least 8x8, got " +
                    std::to_string(height) + "x" + std::to_string(width));
  }
  if (days == 0) throw DataError("synthetic city needs at least one day");
  if (!(road_fraction > 0.0 && road_fraction <= 1.0)) {
    throw DataError("road_fraction must be in (0, 1]");
  }
  if (drift_probability < 0.0 || drift_probability > 1.0 ||
      incident_rate < 0.0 || incident_rate > 1.0) {
    throw DataError("probabilities must lie in [0, 1]");
  }
}

namespace {

enum class Orientation { horizontal, vertical, diagonal, anti_diagonal };

struct Segment {
  Orientation orientation;
  std::vector<std::pair<int, int>> pixels;  // (row, col) in travel order
  Heading forward, backward;
  double intensity;
  double phase;
};

struct Layout {
  std::vector<int> owner;     // segment index per pixel, -1 off-road
  std::vector<int> position;  // index along the owning segment
};

std::pair<int, int> direction(Orientation o) {
  switch (o) {
    case Orientation::horizontal: return {0, 1};
    case Orientation::vertical: return {1, 0};
    case Orientation::diagonal: return {1, 1};
    case Orientation::anti_diagonal: return {-1, 1};
  }
  return {0, 1};
}

std::pair<int, int> drift_offset(Orientation o, int sign) {
  return o == Orientation::vertical ? std::pair{0, sign} : std::pair{sign, 0};
}

Layout rasterize(const std::vector<Segment>& segments,
                 const std::vector<std::pair<int, int>>& shifts, int h, int w) {
  Layout l{std::vector<int>(static_cast<std::size_t>(h * w), -1),
           std::vector<int>(static_cast<std::size_t>(h * w), 0)};
  for (std::size_t s = 0; s < segments.size(); ++s) {
    const auto [dr, dc] = shifts[s];
    int pos = 0;
    for (auto [r, c] : segments[s].pixels) {
      r += dr;
      c += dc;
      if (r < 0 || r >= h || c < 0 || c >= w) continue;
      const auto idx = static_cast<std::size_t>(r * w + c);
      if (l.owner[idx] < 0) {
        l.owner[idx] = static_cast<int>(s);
        l.position[idx] = pos;
      }
      ++pos;
    }
  }
  return l;
}

std::vector<Segment> build_skeleton(const SyntheticCityConfig& cfg, Rng& rng) {
  const int h = static_cast<int>(cfg.height), w = static_cast<int>(cfg.width);
  const auto target = static_cast<std::size_t>(
      std::max(1.0, std::round(cfg.road_fraction * h * w)));
  std::vector<std::uint8_t> taken(static_cast<std::size_t>(h * w), 0);
  std::size_t count = 0;
  std::vector<Segment> segments;
  for (int attempt = 0; attempt < 100000 && count < target; ++attempt) {
    // Corridors are twice as likely as diagonals.
    const std::uint64_t pick = rng.below(6);
    const Orientation o = pick < 2   ? Orientation::horizontal
                          : pick < 4 ? Orientation::vertical
                          : pick < 5 ? Orientation::diagonal
                                     : Orientation::anti_diagonal;
    const auto [dr, dc] = direction(o);
    int r = static_cast<int>(rng.below(static_cast<std::uint64_t>(h)));
    int c = static_cast<int>(rng.below(static_cast<std::uint64_t>(w)));
    if (o == Orientation::horizontal || o == Orientation::diagonal ||
        o == Orientation::anti_diagonal) {
      c = static_cast<int>(rng.below(static_cast<std::uint64_t>(w / 2)));
    }
    if (o == Orientation::vertical) {
      r = static_cast<int>(rng.below(static_cast<std::uint64_t>(h / 2)));
    }
    const int span = std::max(h, w);
    const int length =
        span / 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(span / 2 + 1)));
    Segment seg;
    seg.orientation = o;
    std::size_t fresh = 0;
    for (int k = 0; k < length && count + fresh < target; ++k) {
      const int rr = r + k * dr, cc = c + k * dc;
      if (rr < 0 || rr >= h || cc < 0 || cc >= w) break;
      const auto idx = static_cast<std::size_t>(rr * w + cc);
      if (!taken[idx]) {
        taken[idx] = 1;
        ++fresh;
      }
      seg.pixels.emplace_back(rr, cc);
    }
    if (fresh == 0) continue;
    count += fresh;
    switch (o) {
      case Orientation::horizontal:
      case Orientation::anti_diagonal:
        seg.forward = Heading::north_east;
        seg.backward = Heading::south_west;
        break;
      case Orientation::vertical:
      case Orientation::diagonal:
        seg.forward = Heading::south_east;
        seg.backward = Heading::north_west;
        break;
    }
    seg.intensity = rng.uniform(0.45, 0.95);
    seg.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
    segments.push_back(std::move(seg));
  }
  return segments;
}

// Morning and evening peaks over a daytime hump, in [0.1, 1].
double diurnal(double bin) {
  const double morning = std::exp(-std::pow((bin - 96.0) / 20.0, 2.0));
  const double evening = std::exp(-std::pow((bin - 210.0) / 24.0, 2.0));
  const double day = std::pow(std::sin(std::numbers::pi * bin / 288.0), 2.0);
  return std::min(1.0, 0.1 + 0.3 * day + 0.35 * morning + 0.4 * evening);
}

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::round(v), 1.0, 255.0));
}

std::uint64_t day_seed(std::uint64_t seed, std::size_t day) {
  return seed * 0x9E3779B97F4A7C15ull + 0xD1B54A32D192ED03ull * (day + 1);
}

}  // namespace

std::vector<std::uint8_t> synthetic_road_layout(const SyntheticCityConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const auto segments = build_skeleton(cfg, rng);
  const std::vector<std::pair<int, int>> none(segments.size(), {0, 0});
  const Layout l = rasterize(segments, none, static_cast<int>(cfg.height),
                             static_cast<int>(cfg.width));
  std::vector<std::uint8_t> out(l.owner.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = l.owner[i] >= 0;
  return out;
}

std::vector<ByteTensor> synthetic_city(const SyntheticCityConfig& cfg) {
  cfg.validate();
  const int h = static_cast<int>(cfg.height), w = static_cast<int>(cfg.width);
  Rng rng(cfg.seed);
  const auto segments = build_skeleton(cfg, rng);
  const std::vector<std::pair<int, int>> none(segments.size(), {0, 0});
  const Layout base = rasterize(segments, none, h, w);

  std::vector<bool> drifted(cfg.days, false);
  if (cfg.drift) {
    for (std::size_t d = 1; d < cfg.days; ++d) drifted[d] = rng.bernoulli(cfg.drift_probability);
    if (cfg.days >= 2 && std::none_of(drifted.begin(), drifted.end(), [](bool b) { return b; })) {
      drifted.back() = true;
    }
  }

  std::vector<ByteTensor> days;
  days.reserve(cfg.days);
  for (std::size_t d = 0; d < cfg.days; ++d) {
    Rng day_rng(day_seed(cfg.seed, d));
    Layout layout = base;
    if (drifted[d]) {
      // Shift a random subset of segments by one pixel; retry until the day
      // covers at least one pixel the undrifted skeleton does not.
      for (int attempt = 0; attempt < 64; ++attempt) {
        std::vector<std::pair<int, int>> shifts(segments.size(), {0, 0});
        bool any = false;
        for (std::size_t s = 0; s < segments.size(); ++s) {
          if (day_rng.bernoulli(0.5)) {
            shifts[s] = drift_offset(segments[s].orientation,
                                     day_rng.bernoulli(0.5) ? 1 : -1);
            any = true;
          }
        }
        if (!any) {
          const std::size_t s = day_rng.below(segments.size());
          shifts[s] = drift_offset(segments[s].orientation, 1);
        }
        Layout candidate = rasterize(segments, shifts, h, w);
        bool fresh = false;
        for (std::size_t i = 0; i < candidate.owner.size() && !fresh; ++i) {
          fresh = candidate.owner[i] >= 0 && base.owner[i] < 0;
        }
        if (fresh) {
          layout = std::move(candidate);
          break;
        }
      }
    }

    const double day_factor = day_rng.uniform(0.85, 1.15);
    ByteTensor day({kBinsPerDay, cfg.height, cfg.width, kDayChannels});
    for (std::size_t b = 0; b < kBinsPerDay; ++b) {
      const double profile = diurnal(static_cast<double>(b));
      for (std::size_t p = 0; p < layout.owner.size(); ++p) {
        const int s = layout.owner[p];
        if (s < 0) continue;
        const Segment& seg = segments[static_cast<std::size_t>(s)];
        const double along =
            0.8 + 0.2 * std::sin(0.7 * layout.position[p] + seg.phase);
        std::uint8_t* px = day.data() + (b * layout.owner.size() + p) * kDayChannels;
        for (Heading heading : {seg.forward, seg.backward}) {
          // The return direction peaks in the evening instead of the morning.
          const double tilt = heading == seg.forward ? 1.0 : 0.85;
          const double noise = 1.0 + 0.05 * (2.0 * day_rng.uniform() - 1.0);
          const double volume =
              255.0 * seg.intensity * along * profile * tilt * day_factor * noise;
          const std::uint8_t v = to_byte(volume);
          const double speed = 255.0 * (0.9 - 0.5 * v / 255.0) *
                               (1.0 + 0.03 * (2.0 * day_rng.uniform() - 1.0));
          px[volume_channel(heading)] = v;
          px[speed_channel(heading)] = to_byte(speed);
        }
        if (day_rng.bernoulli(cfg.incident_rate)) {
          px[kIncidentChannel] = static_cast<std::uint8_t>(1 + day_rng.below(255));
        }
      }
    }
    days.push_back(std::move(day));
  }
  return days;
}

// ---------------------------------------------------------------------------
// Files

void save_day(const std::filesystem::path& path, const ByteTensor& day) {
  validate_day(day, day.rank() == 4 ? day.extent(3) : kDayChannels);
  save_tfrm(path, day);
}

ByteTensor load_day(const std::filesystem::path& path) {
  ByteTensor day = load_tfrm_u8(path);
  if (day.rank() != 4 || day.extent(0) != kBinsPerDay ||
      (day.extent(3) != kDayChannels && day.extent(3) != kTrafficChannels)) {
    throw DataError(path.string() + ": not a day tensor, shape " +
                    to_string(day.shape()));
  }
  return day;
}

std::string day_file_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "day_%04zu.tfrm", index);
  return buf;
}

void write_dataset(const std::filesystem::path& dir,
                   std::span<const ByteTensor> days, const DatasetMeta& meta) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw TfrmError(TfrmErrorCode::io_failure,
                    "cannot create " + dir.string() + ": " + ec.message());
  }
  for (std::size_t d = 0; d < days.size(); ++d) {
    save_day(dir / day_file_name(d), days[d]);
  }
  nlohmann::ordered_json j;
  j["height"] = meta.height;
  j["width"] = meta.width;
  j["days"] = meta.days;
  j["seed"] = meta.seed;
  j["drift"] = meta.drift;
  j["road_fraction"] = meta.road_fraction;
  write_file(dir / "meta.json", j.dump(2) + "\n");
}

DatasetMeta read_dataset_meta(const std::filesystem::path& dir) {
  const auto path = dir / "meta.json";
  if (!std::filesystem::exists(path)) {
    throw DataError("missing " + path.string());
  }
  try {
    const auto j = nlohmann::json::parse(read_file(path));
    DatasetMeta m;
    m.height = j.at("height").get<std::size_t>();
    m.width = j.at("width").get<std::size_t>();
    m.days = j.at("days").get<std::size_t>();
    m.seed = j.value("seed", std::uint64_t{0});
    m.drift = j.value("drift", false);
    m.road_fraction = j.value("road_fraction", 0.0);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<ByteTensor> load_dataset(const std::filesystem::path& dir) {
  const DatasetMeta meta = read_dataset_meta(dir);
  std::vector<ByteTensor> days;
  days.reserve(meta.days);
  for (std::size_t d = 0; d < meta.days; ++d) {
    ByteTensor day = load_day(dir / day_file_name(d));
    if (day.extent(1) != meta.height || day.extent(2) != meta.width) {
      throw DataError(day_file_name(d) + ": grid does not match meta.json");
    }
    days.push_back(std::move(day));
  }
  return days;
}

DaySplit split_days(std::size_t days, std::size_t val_days) {
  if (days < 2) throw DataError("need at least two days to split train/val");
  if (val_days == 0) val_days = std::max<std::size_t>(1, days / 4);
  if (val_days >= days) {
    throw DataError("val_days " + std::to_string(val_days) +
                    " leaves no training days out of " + std::to_string(days));
  }
  return {0, days - val_days, days - val_days, days};
}

}  // namespace tae
