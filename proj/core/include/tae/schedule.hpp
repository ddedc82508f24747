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

// Cyclical learning rates and the Adam optimizer.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tae/model.hpp"
#include "tae/tensor.hpp"

namespace tae {

enum class ClrMode { triangular, triangular2, exp_range };

/// Parses "triangular", "triangular2" or "exp_range"; throws ConfigError.
ClrMode parse_clr_mode(const std::string& name);
std::string to_string(ClrMode mode);

struct ClrSchedule {
  double base_lr = 1e-7;
  double max_lr = 2e-3;
  /// Iterations per half-cycle.
  std::size_t step_size = 1;
  ClrMode mode = ClrMode::triangular;
  /// Per-iteration amplitude decay, exp_range only.
  double gamma = 1.0;

  /// Throws ConfigError.
  void validate() const;
};

/// Learning rate at `iteration`: linear ramps between base_lr and max_lr,
/// one peak per 2 * step_size iterations, amplitude scaled by mode.
double clr(std::uint64_t iteration, const ClrSchedule& schedule);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

struct AdamStepResult {
  bool applied = true;
  /// Name of the first parameter with a non-finite gradient when skipped.
  std::string rejected;
};

/// One Adam update of `params` in place. Shapes of `grads` must match
/// `params` (ShapeError). Moments are created on the first call. A non-finite
/// gradient leaves parameters and state untouched and is reported.
AdamStepResult adam_step(std::span<const NamedTensor> params,
                         std::span<const ConstNamedTensor> grads,
                         AdamState& state, double lr);

}  // namespace tae
