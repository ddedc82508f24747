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

#include "tae/mask_eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "tae/tfrm.hpp"
#include "tae/training.hpp"

namespace tae {

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), 1));
}

bool BinaryMask::contains(const BinaryMask& other) const {
  if (height != other.height || width != other.width) return false;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (other.bits[i] && !bits[i]) return false;
  }
  return true;
}

BinaryMask build_mask(std::span<const ByteTensor> days) {
  if (days.empty()) throw DataError("build_mask: no days given");
  const std::size_t h = days[0].extent(1), w = days[0].extent(2);
  BinaryMask mask{h, w, std::vector<std::uint8_t>(h * w, 0), days.size()};
  for (const auto& day : days) {
    if (day.rank() != 4 || day.extent(0) != kBinsPerDay ||
        day.extent(3) < kTrafficChannels) {
      throw DataError("build_mask: bad day shape " + to_string(day.shape()));
    }
    if (day.extent(1) != h || day.extent(2) != w) {
      throw DataError("build_mask: days have different grids");
    }
    const std::size_t ch = day.extent(3);
    for (std::size_t b = 0; b < kBinsPerDay; ++b) {
      const std::uint8_t* bin = day.data() + b * h * w * ch;
      for (std::size_t p = 0; p < h * w; ++p) {
        if (mask.bits[p]) continue;
        const std::uint8_t* px = bin + p * ch;
        mask.bits[p] = std::any_of(px, px + kTrafficChannels,
                                   [](std::uint8_t v) { return v != 0; });
      }
    }
  }
  return mask;
}

BinaryMask mask_union(const BinaryMask& a, const BinaryMask& b) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError("mask_union: grids differ");
  }
  BinaryMask out = a;
  for (std::size_t i = 0; i < out.bits.size(); ++i) out.bits[i] |= b.bits[i];
  out.days = a.days + b.days;
  return out;
}

Tensor apply_mask(const Tensor& pred, const BinaryMask& mask) {
  require_rank(pred, 4, "apply_mask");
  if (pred.extent(2) != mask.height || pred.extent(3) != mask.width) {
    throw ShapeError("apply_mask: prediction grid " + to_string(pred.shape()) +
                     " does not match mask " + std::to_string(mask.height) +
                     "x" + std::to_string(mask.width));
  }
  Tensor out = pred;
  const std::size_t planes = pred.extent(0) * pred.extent(1);
  const std::size_t hw = mask.height * mask.width;
  for (std::size_t q = 0; q < planes; ++q) {
    double* plane = out.data() + q * hw;
    for (std::size_t p = 0; p < hw; ++p) {
      if (!mask.bits[p]) plane[p] = 0.0;
    }
  }
  return out;
}

Tensor select_bins(const Tensor& pred12) {
  if (pred12.rank() < 1 || pred12.extent(0) != 12) {
    throw ShapeError("select_bins: expected 12 frames, got " +
                     to_string(pred12.shape()));
  }
  Shape shape = pred12.shape();
  shape[0] = kReportedBins.size();
  const std::size_t frame = pred12.size() / 12;
  Tensor out(shape);
  for (std::size_t k = 0; k < kReportedBins.size(); ++k) {
    std::copy_n(pred12.data() + kReportedBins[k] * frame, frame,
                out.data() + k * frame);
  }
  return out;
}

std::uint8_t denormalize_value(double v) {
  const double c = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::floor(255.0 * c + 0.5));
}

ByteTensor denormalize(const Tensor& pred) {
  std::vector<std::uint8_t> data(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) data[i] = denormalize_value(pred[i]);
  return ByteTensor(pred.shape(), std::move(data));
}

double evaluate(const TemporalAutoencoder& model,
                std::span<const SequenceSample> samples,
                const EvalOptions& options) {
  if (samples.empty()) throw DataError("evaluate: no validation sequences");
  double sum = 0.0;
  for (const auto& s : samples) {
    Tensor pred = forward(model, s.input);
    if (options.mask) pred = apply_mask(pred, *options.mask);
    if (options.select_6) {
      sum += mse(select_bins(pred), select_bins(s.target));
    } else {
      sum += mse(pred, s.target);
    }
  }
  return sum / static_cast<double>(samples.size());
}

void write_eval_header(std::ostream& out) { out << "city,config,masked,val_mse\n"; }

void write_eval_row(std::ostream& out, const EvalRow& row) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", row.val_mse);
  out << row.city << ',' << row.config << ',' << (row.masked ? "yes" : "no")
      << ',' << buf << '\n';
}

void save_mask(const std::filesystem::path& path, const BinaryMask& mask) {
  save_tfrm(path, ByteTensor({mask.height, mask.width}, mask.bits));
}

BinaryMask load_mask(const std::filesystem::path& path) {
  const ByteTensor t = load_tfrm_u8(path);
  if (t.rank() != 2) {
    throw DataError(path.string() + ": mask must be rank 2, got " +
                    to_string(t.shape()));
  }
  BinaryMask mask{t.extent(0), t.extent(1),
                  std::vector<std::uint8_t>(t.values().begin(), t.values().end()),
                  0};
  for (std::uint8_t v : mask.bits) {
    if (v > 1) throw DataError(path.string() + ": mask values must be 0 or 1");
  }
  return mask;
}

}  // namespace tae
