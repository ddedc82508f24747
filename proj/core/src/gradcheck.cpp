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

#include "tae/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "tae/cells.hpp"
#include "tae/model.hpp"
#include "tae/ops.hpp"
#include "tae/random.hpp"
#include "tae/training.hpp"

namespace tae {

namespace {

Tensor random_tensor(Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void negate(Tensor& t) {
  for (double& v : t.values()) v = -v;
}

struct Probe {
  Tensor* value;
  const Tensor* analytic;
};

/// Compares every element of every probe against a central difference of
/// `loss`, which must read the probed tensors by reference.
void compare_all(GradcheckEntry& entry, const std::vector<Probe>& probes,
                 const std::function<double()>& loss, double step) {
  for (const Probe& p : probes) {
    for (std::size_t i = 0; i < p.value->size(); ++i) {
      double& x = (*p.value)[i];
      const double saved = x;
      x = saved + step;
      const double up = loss();
      x = saved - step;
      const double down = loss();
      x = saved;
      const double numeric = (up - down) / (2.0 * step);
      entry.record((*p.analytic)[i], numeric);
    }
  }
}

GradcheckEntry check_conv2d(const GradcheckOptions& o, Rng& rng) {
  GradcheckEntry e{"conv2d", 0, 0.0, 0.0, o.tolerance};
  const ConvSpec spec{2, 3, 3, 3};
  Tensor x = random_tensor({2, 4, 4}, rng);
  Tensor k = random_tensor(spec.kernel_shape(), rng);
  Tensor b = random_tensor({3}, rng);
  const Tensor r = random_tensor({3, 4, 4}, rng);
  Conv2dGrads g = conv2d_backward(x, k, r);
  if (o.fault == GradcheckFault::conv_sign) {
    negate(g.input);
    negate(g.kernel);
    negate(g.bias);
  }
  compare_all(e, {{&x, &g.input}, {&k, &g.kernel}, {&b, &g.bias}},
              [&] { return dot(r, conv2d(x, spec, k, b)); }, o.step);
  return e;
}

GradcheckEntry check_transposed_conv(const GradcheckOptions& o, Rng& rng) {
  GradcheckEntry e{"transposed_conv2d", 0, 0.0, 0.0, o.tolerance};
  for (std::size_t ks : {2, 4}) {
    Tensor x = random_tensor({2, 3, 3}, rng);
    Tensor k = random_tensor({2, 3, ks, ks}, rng);
    Tensor b = random_tensor({3}, rng);
    const Tensor r = random_tensor({3, 6, 6}, rng);
    TransposedConvGrads g = transposed_conv2d_backward(x, k, r);
    compare_all(e, {{&x, &g.input}, {&k, &g.kernel}, {&b, &g.bias}},
                [&] { return dot(r, transposed_conv2d(x, k, b)); }, o.step);
  }
  return e;
}

GradcheckEntry check_maxpool(const GradcheckOptions& o, Rng& rng) {
  GradcheckEntry e{"maxpool2d", 0, 0.0, 0.0, o.tolerance};
  // Distinct values spaced far beyond the step keep the argmax stable.
  Tensor x({2, 5, 5});
  std::vector<std::size_t> perm(x.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
  rng.shuffle(std::span<std::size_t>(perm));
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = 0.01 * static_cast<double>(perm[i]);
  const PoolResult fwd = maxpool2d(x);
  const Tensor r = random_tensor(fwd.output.shape(), rng);
  const Tensor g = maxpool2d_backward(fwd, r);
  compare_all(e, {{&x, &g}}, [&] { return dot(r, maxpool2d(x).output); }, o.step);
  return e;
}

GradcheckEntry check_concat(const GradcheckOptions& o, Rng& rng) {
  GradcheckEntry e{"concat_channels", 0, 0.0, 0.0, o.tolerance};
  Tensor a = random_tensor({2, 3, 3}, rng);
  Tensor b = random_tensor({3, 3, 3}, rng);
  const Tensor r = random_tensor({5, 3, 3}, rng);
  auto [ga, gb] = split_channels(r, 2);
  compare_all(e, {{&a, &ga}, {&b, &gb}},
              [&] { return dot(r, concat_channels(a, b)); }, o.step);
  return e;
}

GradcheckEntry check_lstm_step(const GradcheckOptions& o, Rng& rng) {
  GradcheckEntry e{"lstm_step", 0, 0.0, 0.0, o.tolerance};
  LstmParams p = LstmParams::zeros(3, 4, true);
  for (std::size_t g = 0; g < kGateCount; ++g) {
    p.w[g] = random_tensor(p.w[g].shape(), rng);
    p.u[g] = random_tensor(p.u[g].shape(), rng);
    p.b[g] = random_tensor(p.b[g].shape(), rng);
  }
  for (auto& v : p.v) v = random_tensor(v.shape(), rng);
  Tensor x = random_tensor({3}, rng);
  CellState s{random_tensor({4}, rng), random_tensor({4}, rng)};
  const Tensor rh = random_tensor({4}, rng), rc = random_tensor({4}, rng);
  LstmStepGrads g = lstm_step_backward(x, s, p, rh, rc);
  std::vector<Probe> probes{{&x, &g.x}, {&s.h, &g.state.h}, {&s.c, &g.state.c}};
  for (std::size_t k = 0; k < kGateCount; ++k) {
    probes.push_back({&p.w[k], &g.params.w[k]});
    probes.push_back({&p.u[k], &g.params.u[k]});
    probes.push_back({&p.b[k], &g.params.b[k]});
  }
  for (std::size_t k = 0; k < kPeepholeCount; ++k) {
    probes.push_back({&p.v[k], &g.params.v[k]});
  }
  compare_all(e, probes, [&] {
    const CellState n = lstm_step(x, s, p);
    return dot(rh, n.h) + dot(rc, n.c);
  }, o.step);
  return e;
}

GradcheckEntry check_convlstm(const GradcheckOptions& o, Rng& rng,
                              std::size_t steps, const char* name) {
  GradcheckEntry e{name, 0, 0.0, 0.0, o.tolerance};
  const ConvLstmShape shape{2, 2, 3, 4, 4, true};
  ConvLstmParams p = ConvLstmParams::zeros(shape);
  p.input_kernel = random_tensor(p.input_kernel.shape(), rng, -0.5, 0.5);
  p.hidden_kernel = random_tensor(p.hidden_kernel.shape(), rng, -0.5, 0.5);
  p.bias = random_tensor(p.bias.shape(), rng, -0.5, 0.5);
  p.peephole = random_tensor(p.peephole.shape(), rng, -0.5, 0.5);
  Tensor x = random_tensor({steps, 2, 4, 4}, rng);
  const Tensor r = random_tensor({steps, 2, 4, 4}, rng);
  const CellState rf{random_tensor({2, 4, 4}, rng), random_tensor({2, 4, 4}, rng)};

  ConvLstmTape tape;
  convlstm_sequence(x, p, true, &tape);
  ConvLstmParams g;
  const Tensor gx = convlstm_sequence_backward(tape, p, r, g, &rf);
  compare_all(e,
              {{&x, &gx},
               {&p.input_kernel, &g.input_kernel},
               {&p.hidden_kernel, &g.hidden_kernel},
               {&p.bias, &g.bias},
               {&p.peephole, &g.peephole}},
              [&] {
                const SequenceOutput out = convlstm_sequence(x, p, true);
                return dot(r, out.hidden_sequence) +
                       dot(rf.h, out.final_state.h) +
                       dot(rf.c, out.final_state.c);
              },
              o.step);
  return e;
}

GradcheckEntry check_model(const GradcheckOptions& o, Rng& rng) {
  GradcheckEntry e{"temporal_autoencoder", 0, 0.0, 0.0, o.model_tolerance};
  ModelConfig cfg;
  cfg.input_channels = 2;
  cfg.output_channels = 2;
  cfg.hidden_channels = {2, 3, 4, 4, 3, 2};
  cfg.seq_in = cfg.seq_out = 3;
  cfg.height = cfg.width = 8;
  TemporalAutoencoder model = build_model(cfg, rng.next());
  // Nonzero peepholes so their gradient paths carry signal.
  for (auto& p : model.parameters()) {
    if (p.name.ends_with("peephole")) *p.tensor = random_tensor(p.tensor->shape(), rng, -0.3, 0.3);
  }
  const Tensor x = random_tensor({3, 2, 8, 8}, rng, 0.0, 1.0);
  const Tensor target = random_tensor({3, 2, 8, 8}, rng, 0.0, 1.0);

  // Sum of squared errors: the MSE gradient scaled by the output count, so
  // sampled components clear kGradcheckSmall and the relative rule applies.
  const double n = static_cast<double>(target.size());
  ForwardTape tape;
  const Tensor pred = forward(model, x, &tape);
  TemporalAutoencoder grads = zeros_like(model);
  Tensor g = mse_grad(pred, target);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] *= n;
  backward(model, tape, g, grads);

  auto params = model.parameters();
  const auto gparams = std::as_const(grads).parameters();
  std::size_t total = 0;
  for (const auto& p : params) total += p.tensor->size();
  for (std::size_t s = 0; s < o.model_samples; ++s) {
    std::size_t flat = rng.below(total);
    std::size_t k = 0;
    while (flat >= params[k].tensor->size()) flat -= params[k].tensor->size(), ++k;
    double& v = (*params[k].tensor)[flat];
    const double saved = v;
    v = saved + o.step;
    const double up = n * mse(forward(model, x), target);
    v = saved - o.step;
    const double down = n * mse(forward(model, x), target);
    v = saved;
    e.record((*gparams[k].tensor)[flat], (up - down) / (2.0 * o.step));
  }
  return e;
}

}  // namespace

void GradcheckEntry::record(double analytic, double numeric) {
  ++checked;
  const double diff = std::abs(analytic - numeric);
  const double scale = std::max(std::abs(analytic), std::abs(numeric));
  if (!std::isfinite(diff)) {
    max_rel_error = INFINITY;
  } else if (scale >= kGradcheckSmall) {
    max_rel_error = std::max(max_rel_error, diff / scale);
  } else {
    max_abs_error = std::max(max_abs_error, diff);
  }
}

bool GradcheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const GradcheckEntry& e) { return e.passed(); });
}

GradcheckReport run_gradcheck(const GradcheckOptions& o) {
  Rng rng(o.seed);
  GradcheckReport r;
  r.entries.push_back(check_conv2d(o, rng));
  r.entries.push_back(check_transposed_conv(o, rng));
  r.entries.push_back(check_maxpool(o, rng));
  r.entries.push_back(check_concat(o, rng));
  r.entries.push_back(check_lstm_step(o, rng));
  r.entries.push_back(check_convlstm(o, rng, 1, "convlstm_step"));
  r.entries.push_back(check_convlstm(o, rng, 3, "convlstm_sequence"));
  r.entries.push_back(check_model(o, rng));
  return r;
}

void write_gradcheck_report(std::ostream& out, const GradcheckReport& report) {
  char line[128];
  std::snprintf(line, sizeof line, "%-22s %8s %14s %10s %14s  %s\n", "op",
                "checked", "max_rel_error", "tolerance", "max_abs_error",
                "result");
  out << line;
  for (const auto& e : report.entries) {
    std::snprintf(line, sizeof line, "%-22s %8zu %14.3e %10.1e %14.3e  %s\n",
                  e.op.c_str(), e.checked, e.max_rel_error, e.tolerance,
                  e.max_abs_error, e.passed() ? "ok" : "FAIL");
    out << line;
  }
}

}  // namespace tae
