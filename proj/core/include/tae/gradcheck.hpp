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

// Central finite-difference checks of every backward pass.

#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace tae {

enum class GradcheckFault {
  none,
  /// Negates the analytic conv2d gradients before comparison.
  conv_sign,
};

struct GradcheckOptions {
  std::uint64_t seed = 0;
  /// Per-op bound on the relative error.
  double tolerance = 1e-4;
  /// Bound for the full-model check.
  double model_tolerance = 1e-3;
  double step = 1e-5;
  /// Parameter elements sampled in the full-model check.
  std::size_t model_samples = 100;
  GradcheckFault fault = GradcheckFault::none;
};

/// Gradients smaller than this are compared by absolute error, larger ones
/// by relative error.
inline constexpr double kGradcheckSmall = 1e-3;
inline constexpr double kGradcheckAbsTolerance = 1e-7;

struct GradcheckEntry {
  std::string op;
  std::size_t checked = 0;
  /// Over components with max(|analytic|, |numeric|) >= kGradcheckSmall.
  double max_rel_error = 0.0;
  /// Over the remaining components.
  double max_abs_error = 0.0;
  double tolerance = 0.0;

  void record(double analytic, double numeric);
  bool passed() const {
    return max_rel_error <= tolerance && max_abs_error <= kGradcheckAbsTolerance;
  }
};

struct GradcheckReport {
  std::vector<GradcheckEntry> entries;
  bool passed() const;
};

GradcheckReport run_gradcheck(const GradcheckOptions& options = {});

void write_gradcheck_report(std::ostream& out, const GradcheckReport& report);

}  // namespace tae
