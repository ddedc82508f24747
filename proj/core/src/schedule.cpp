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

#include "tae/schedule.hpp"

#include <cmath>

namespace tae {

ClrMode parse_clr_mode(const std::string& name) {
  if (name == "triangular") return ClrMode::triangular;
  if (name == "triangular2") return ClrMode::triangular2;
  if (name == "exp_range") return ClrMode::exp_range;
  throw ConfigError("unknown CLR mode '" + name +
                    "' (expected triangular, triangular2 or exp_range)");
}

std::string to_string(ClrMode mode) {
  switch (mode) {
    case ClrMode::triangular: return "triangular";
    case ClrMode::triangular2: return "triangular2";
    case ClrMode::exp_range: return "exp_range";
  }
  return "?";
}

void ClrSchedule::validate() const {
  if (!(base_lr > 0.0) || !(max_lr >= base_lr) || !std::isfinite(max_lr)) {
    throw ConfigError("CLR bounds must satisfy 0 < base_lr <= max_lr");
  }
  if (step_size == 0) throw ConfigError("CLR step_size must be at least 1");
  if (mode == ClrMode::exp_range && !(gamma > 0.0 && gamma <= 1.0)) {
    throw ConfigError("exp_range gamma must lie in (0, 1]");
  }
}

double clr(std::uint64_t iteration, const ClrSchedule& s) {
  const auto it = static_cast<double>(iteration);
  const auto step = static_cast<double>(s.step_size);
  const double cycle = std::floor(1.0 + it / (2.0 * step));
  const double x = std::abs(it / step - 2.0 * cycle + 1.0);
  double scale = 1.0;
  if (s.mode == ClrMode::triangular2) {
    scale = std::ldexp(1.0, -static_cast<int>(cycle - 1.0));
  } else if (s.mode == ClrMode::exp_range) {
    scale = std::pow(s.gamma, it);
  }
  return s.base_lr + (s.max_lr - s.base_lr) * std::max(0.0, 1.0 - x) * scale;
}

AdamStepResult adam_step(std::span<const NamedTensor> params,
                         std::span<const ConstNamedTensor> grads,
                         AdamState& state, double lr) {
  if (params.size() != grads.size()) {
    throw ShapeError("adam_step: " + std::to_string(params.size()) +
                     " parameters but " + std::to_string(grads.size()) +
                     " gradients");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].tensor->shape() != grads[k].tensor->shape()) {
      throw ShapeError("adam_step: gradient shape " +
                       to_string(grads[k].tensor->shape()) + " for " +
                       params[k].name + " " +
                       to_string(params[k].tensor->shape()));
    }
  }
  for (const auto& g : grads) {
    for (double x : g.tensor->values()) {
      if (!std::isfinite(x)) return {false, g.name};
    }
  }
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Tensor::zeros_like(*p.tensor));
      state.v.push_back(Tensor::zeros_like(*p.tensor));
    }
  }
  if (state.m.size() != params.size()) {
    throw ShapeError("adam_step: optimizer state belongs to another model");
  }

  ++state.step;
  const auto t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    double* theta = params[k].tensor->data();
    const double* g = grads[k].tensor->data();
    double* m = state.m[k].data();
    double* v = state.v[k].data();
    for (std::size_t i = 0; i < params[k].tensor->size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / c1;
      const double v_hat = v[i] / c2;
      theta[i] -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
  return {};
}

}  // namespace tae
