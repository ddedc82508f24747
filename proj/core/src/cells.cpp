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

#include "tae/cells.hpp"

#include <cmath>

#include "linalg.hpp"
#include "tae/ops.hpp"

namespace tae {
namespace {

constexpr std::size_t gi(Gate g) { return static_cast<std::size_t>(g); }
constexpr std::size_t pi(Peephole p) { return static_cast<std::size_t>(p); }

void require_vector(const Tensor& t, std::size_t n, const char* what) {
  if (t.shape() != Shape{n}) {
    throw ShapeError(std::string(what) + ": expected [" + std::to_string(n) +
                     "], got " + to_string(t.shape()));
  }
}

// y += m x for m [rows, cols].
void matvec_add(const Tensor& m, const Tensor& x, double* y) {
  const std::size_t rows = m.extent(0), cols = m.extent(1);
  for (std::size_t r = 0; r < rows; ++r) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += m[r * cols + c] * x[c];
    y[r] += s;
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Vector LSTM

LstmParams LstmParams::zeros(std::size_t input_size, std::size_t hidden_size,
                             bool peepholes) {
  if (input_size == 0 || hidden_size == 0) {
    throw ShapeError("LstmParams: sizes must be positive");
  }
  LstmParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  for (std::size_t g = 0; g < kGateCount; ++g) {
    p.w[g] = Tensor({hidden_size, input_size});
    p.u[g] = Tensor({hidden_size, hidden_size});
    p.b[g] = Tensor({hidden_size});
  }
  if (peepholes) {
    for (auto& v : p.v) v = Tensor({hidden_size});
  }
  return p;
}

namespace {

struct LstmActivations {
  std::vector<double> i, f, g, o, c, tc;
};

LstmActivations lstm_forward(const Tensor& x, const CellState& state,
                             const LstmParams& p) {
  const std::size_t n = p.hidden_size;
  require_vector(x, p.input_size, "lstm_step x");
  require_vector(state.h, n, "lstm_step h");
  require_vector(state.c, n, "lstm_step c");

  std::array<std::vector<double>, kGateCount> z;
  for (std::size_t g = 0; g < kGateCount; ++g) {
    z[g].assign(p.b[g].values().begin(), p.b[g].values().end());
    matvec_add(p.w[g], x, z[g].data());
    matvec_add(p.u[g], state.h, z[g].data());
  }
  const bool peep = p.peepholes();
  LstmActivations a{std::vector<double>(n), std::vector<double>(n),
                    std::vector<double>(n), std::vector<double>(n),
                    std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    const double cp = state.c[k];
    double zi = z[gi(Gate::input)][k], zf = z[gi(Gate::forget)][k];
    if (peep) {
      zi += p.v[pi(Peephole::input)][k] * cp;
      zf += p.v[pi(Peephole::forget)][k] * cp;
    }
    a.i[k] = detail::logistic(zi);
    a.f[k] = detail::logistic(zf);
    a.g[k] = std::tanh(z[gi(Gate::cell)][k]);
    a.c[k] = a.f[k] * cp + a.i[k] * a.g[k];
    double zo = z[gi(Gate::output)][k];
    if (peep) zo += p.v[pi(Peephole::output)][k] * a.c[k];
    a.o[k] = detail::logistic(zo);
    a.tc[k] = std::tanh(a.c[k]);
  }
  return a;
}

}  // namespace

CellState lstm_step(const Tensor& x, const CellState& state,
                    const LstmParams& p) {
  const auto a = lstm_forward(x, state, p);
  const std::size_t n = p.hidden_size;
  CellState next{Tensor({n}), Tensor({n}, a.c)};
  for (std::size_t k = 0; k < n; ++k) next.h[k] = a.o[k] * a.tc[k];
  return next;
}

LstmStepGrads lstm_step_backward(const Tensor& x, const CellState& state,
                                 const LstmParams& p, const Tensor& grad_h,
                                 const Tensor& grad_c) {
  const auto a = lstm_forward(x, state, p);
  const std::size_t n = p.hidden_size, m = p.input_size;
  if (!grad_h.empty()) require_vector(grad_h, n, "lstm_step_backward grad_h");
  if (!grad_c.empty()) require_vector(grad_c, n, "lstm_step_backward grad_c");
  const bool peep = p.peepholes();

  LstmStepGrads g{Tensor({m}), {Tensor({n}), Tensor({n})},
                  LstmParams::zeros(m, n, peep)};
  std::array<std::vector<double>, kGateCount> dz;
  for (auto& d : dz) d.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    const double dh = grad_h.empty() ? 0.0 : grad_h[k];
    const double cp = state.c[k];
    const double dzo = dh * a.tc[k] * a.o[k] * (1.0 - a.o[k]);
    double dc = (grad_c.empty() ? 0.0 : grad_c[k]) +
                dh * a.o[k] * (1.0 - a.tc[k] * a.tc[k]);
    if (peep) dc += dzo * p.v[pi(Peephole::output)][k];
    const double dzi = dc * a.g[k] * a.i[k] * (1.0 - a.i[k]);
    const double dzf = dc * cp * a.f[k] * (1.0 - a.f[k]);
    const double dzc = dc * a.i[k] * (1.0 - a.g[k] * a.g[k]);
    double dcp = dc * a.f[k];
    if (peep) {
      dcp += dzi * p.v[pi(Peephole::input)][k] +
             dzf * p.v[pi(Peephole::forget)][k];
      g.params.v[pi(Peephole::input)][k] = dzi * cp;
      g.params.v[pi(Peephole::forget)][k] = dzf * cp;
      g.params.v[pi(Peephole::output)][k] = dzo * a.c[k];
    }
    g.state.c[k] = dcp;
    dz[gi(Gate::input)][k] = dzi;
    dz[gi(Gate::forget)][k] = dzf;
    dz[gi(Gate::cell)][k] = dzc;
    dz[gi(Gate::output)][k] = dzo;
  }
  for (std::size_t gate = 0; gate < kGateCount; ++gate) {
    for (std::size_t r = 0; r < n; ++r) {
      const double d = dz[gate][r];
      g.params.b[gate][r] = d;
      for (std::size_t c = 0; c < m; ++c) {
        g.params.w[gate][r * m + c] = d * x[c];
        g.x[c] += p.w[gate][r * m + c] * d;
      }
      for (std::size_t c = 0; c < n; ++c) {
        g.params.u[gate][r * n + c] = d * state.h[c];
        g.state.h[c] += p.u[gate][r * n + c] * d;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Convolutional LSTM

void ConvLstmShape::validate() const {
  if (in_channels == 0 || hidden_channels == 0) {
    throw ShapeError("ConvLstmShape: channel counts must be positive");
  }
  if (kernel_size % 2 == 0) {
    throw ShapeError("ConvLstmShape: kernel size must be odd");
  }
  if (height == 0 || width == 0) {
    throw ShapeError("ConvLstmShape: grid extents must be positive");
  }
}

ConvLstmParams ConvLstmParams::zeros(const ConvLstmShape& shape) {
  shape.validate();
  const std::size_t ch = shape.hidden_channels, k = shape.kernel_size;
  ConvLstmParams p;
  p.shape = shape;
  p.input_kernel = Tensor({kGateCount * ch, shape.in_channels, k, k});
  p.hidden_kernel = Tensor({kGateCount * ch, ch, k, k});
  p.bias = Tensor({kGateCount * ch});
  if (shape.peepholes) {
    p.peephole = Tensor({kPeepholeCount, ch, shape.height, shape.width});
  }
  return p;
}

ConvLstmParams ConvLstmParams::initialized(const ConvLstmShape& shape,
                                           Rng& rng) {
  ConvLstmParams p = zeros(shape);
  const double kk = static_cast<double>(shape.kernel_size * shape.kernel_size);
  const double in_bound =
      1.0 / std::sqrt(static_cast<double>(shape.in_channels) * kk);
  const double hid_bound =
      1.0 / std::sqrt(static_cast<double>(shape.hidden_channels) * kk);
  for (double& v : p.input_kernel.values()) v = rng.uniform(-in_bound, in_bound);
  for (double& v : p.hidden_kernel.values()) v = rng.uniform(-hid_bound, hid_bound);
  const std::size_t ch = shape.hidden_channels;
  for (std::size_t c = 0; c < ch; ++c) p.bias[gi(Gate::forget) * ch + c] = 1.0;
  return p;
}

namespace {

Tensor gate_rows(const Tensor& packed, std::size_t gate, std::size_t rows) {
  Shape shape = packed.shape();
  shape[0] = rows;
  const std::size_t n = element_count(shape);
  return Tensor(shape, std::vector<double>(packed.data() + gate * n,
                                           packed.data() + (gate + 1) * n));
}

}  // namespace

Tensor ConvLstmParams::gate_input_kernel(Gate g) const {
  return gate_rows(input_kernel, gi(g), shape.hidden_channels);
}
Tensor ConvLstmParams::gate_hidden_kernel(Gate g) const {
  return gate_rows(hidden_kernel, gi(g), shape.hidden_channels);
}
Tensor ConvLstmParams::gate_bias(Gate g) const {
  return gate_rows(bias, gi(g), shape.hidden_channels);
}
Tensor ConvLstmParams::peephole_weights(Peephole g) const {
  if (peephole.empty()) throw ShapeError("peepholes are disabled");
  return gate_rows(peephole, pi(g), 1).reshaped(
      {shape.hidden_channels, shape.height, shape.width});
}

std::size_t ConvLstmParams::parameter_count() const {
  return input_kernel.size() + hidden_kernel.size() + bias.size() +
         peephole.size();
}

CellState convlstm_step(const Tensor& x, const CellState& state,
                        const ConvLstmParams& p) {
  const auto& s = p.shape;
  const Shape hidden_shape{s.hidden_channels, s.height, s.width};
  if (x.shape() != Shape{s.in_channels, s.height, s.width}) {
    throw ShapeError("convlstm_step: input shape " + to_string(x.shape()));
  }
  if (state.h.shape() != hidden_shape || state.c.shape() != hidden_shape) {
    throw ShapeError("convlstm_step: state shape " + to_string(state.h.shape()) +
                     "/" + to_string(state.c.shape()));
  }
  const ConvSpec wx{s.in_channels, s.hidden_channels, s.kernel_size,
                    s.kernel_size};
  const ConvSpec uh{s.hidden_channels, s.hidden_channels, s.kernel_size,
                    s.kernel_size};
  auto preact = [&](Gate g) {
    return add(conv2d(x, wx, p.gate_input_kernel(g), p.gate_bias(g)),
               conv2d(state.h, uh, p.gate_hidden_kernel(g), Tensor{}));
  };
  Tensor zi = preact(Gate::input), zf = preact(Gate::forget);
  Tensor zc = preact(Gate::cell), zo = preact(Gate::output);
  if (s.peepholes) {
    zi = add(zi, hadamard(p.peephole_weights(Peephole::input), state.c));
    zf = add(zf, hadamard(p.peephole_weights(Peephole::forget), state.c));
  }
  const Tensor i = sigmoid(zi), f = sigmoid(zf), g = tanh(zc);
  Tensor c = add(hadamard(f, state.c), hadamard(i, g));
  if (s.peepholes) {
    zo = add(zo, hadamard(p.peephole_weights(Peephole::output), c));
  }
  const Tensor o = sigmoid(zo);
  Tensor h = hadamard(o, tanh(c));
  return {std::move(h), std::move(c)};
}

SequenceOutput convlstm_sequence(const Tensor& inputs, const ConvLstmParams& p,
                                 bool return_sequence, ConvLstmTape* tape_out) {
  const auto& s = p.shape;
  s.validate();
  require_rank(inputs, 4, "convlstm_sequence inputs");
  if (inputs.extent(1) != s.in_channels || inputs.extent(2) != s.height ||
      inputs.extent(3) != s.width) {
    throw ShapeError("convlstm_sequence: inputs " + to_string(inputs.shape()) +
                     " do not match cell with " +
                     std::to_string(s.in_channels) + " channels on " +
                     std::to_string(s.height) + "x" + std::to_string(s.width));
  }
  const std::size_t steps = inputs.extent(0);
  const std::size_t cin = s.in_channels, ch = s.hidden_channels,
                    k = s.kernel_size, h = s.height, w = s.width;
  const std::size_t hw = h * w, thw = steps * hw, g4 = kGateCount * ch;
  const std::size_t kx = cin * k * k, kh = ch * k * k, chw = ch * hw;

  ConvLstmTape local;
  ConvLstmTape& tape = tape_out ? *tape_out : local;
  tape.steps = steps;
  tape.input_cols.assign(kx * thw, 0.0);
  tape.hidden_cols.assign(kh * thw, 0.0);
  tape.gates.assign(steps * g4 * hw, 0.0);
  tape.cells.assign((steps + 1) * chw, 0.0);
  tape.cell_tanh.assign(steps * chw, 0.0);

  for (std::size_t t = 0; t < steps; ++t) {
    detail::im2col(inputs.data() + t * cin * hw, cin, h, w, k, k,
                   tape.input_cols.data() + t * hw, thw);
  }
  // Input contributions for every step in one product.
  std::vector<double> pre(g4 * thw);
  detail::map(pre.data(), g4, thw, thw).noalias() =
      detail::cmap(p.input_kernel.data(), g4, kx, kx) *
      detail::cmap(tape.input_cols.data(), kx, thw, thw);

  SequenceOutput out;
  if (return_sequence) out.hidden_sequence = Tensor({steps, ch, h, w});
  std::vector<double> h_prev(chw, 0.0), rec(g4 * hw, 0.0);
  const bool peep = s.peepholes;
  const double* vi = peep ? p.peephole.data() + pi(Peephole::input) * chw : nullptr;
  const double* vf = peep ? p.peephole.data() + pi(Peephole::forget) * chw : nullptr;
  const double* vo = peep ? p.peephole.data() + pi(Peephole::output) * chw : nullptr;

  for (std::size_t t = 0; t < steps; ++t) {
    if (t > 0) {
      double* cols_t = tape.hidden_cols.data() + t * hw;
      detail::im2col(h_prev.data(), ch, h, w, k, k, cols_t, thw);
      detail::map(rec.data(), g4, hw, hw).noalias() =
          detail::cmap(p.hidden_kernel.data(), g4, kh, kh) *
          detail::cmap(cols_t, kh, hw, thw);
    }
    const double* c_prev = tape.cells.data() + t * chw;
    double* c_new = tape.cells.data() + (t + 1) * chw;
    double* gates = tape.gates.data() + t * g4 * hw;
    double* tc_out = tape.cell_tanh.data() + t * chw;
    for (std::size_t c = 0; c < ch; ++c) {
      auto z = [&](Gate g, std::size_t px) {
        const std::size_t row = gi(g) * ch + c;
        return pre[row * thw + t * hw + px] + rec[row * hw + px] + p.bias[row];
      };
      for (std::size_t px = 0; px < hw; ++px) {
        const std::size_t idx = c * hw + px;
        const double cp = c_prev[idx];
        double zi = z(Gate::input, px), zf = z(Gate::forget, px);
        if (peep) {
          zi += vi[idx] * cp;
          zf += vf[idx] * cp;
        }
        const double ig = detail::logistic(zi);
        const double fg = detail::logistic(zf);
        const double gg = std::tanh(z(Gate::cell, px));
        const double cn = fg * cp + ig * gg;
        double zo = z(Gate::output, px);
        if (peep) zo += vo[idx] * cn;
        const double og = detail::logistic(zo);
        const double tc = std::tanh(cn);
        gates[(gi(Gate::input) * ch + c) * hw + px] = ig;
        gates[(gi(Gate::forget) * ch + c) * hw + px] = fg;
        gates[(gi(Gate::cell) * ch + c) * hw + px] = gg;
        gates[(gi(Gate::output) * ch + c) * hw + px] = og;
        c_new[idx] = cn;
        tc_out[idx] = tc;
        h_prev[idx] = og * tc;
      }
    }
    if (return_sequence) {
      std::copy(h_prev.begin(), h_prev.end(),
                out.hidden_sequence.data() + t * chw);
    }
  }
  out.final_state.h = Tensor({ch, h, w}, h_prev);
  out.final_state.c = Tensor(
      {ch, h, w}, std::vector<double>(tape.cells.end() - static_cast<std::ptrdiff_t>(chw),
                                      tape.cells.end()));
  return out;
}

Tensor convlstm_sequence_backward(const ConvLstmTape& tape,
                                  const ConvLstmParams& p,
                                  const Tensor& grad_hidden,
                                  ConvLstmParams& grads,
                                  const CellState* grad_final) {
  const auto& s = p.shape;
  const std::size_t steps = tape.steps;
  const std::size_t cin = s.in_channels, ch = s.hidden_channels,
                    k = s.kernel_size, h = s.height, w = s.width;
  const std::size_t hw = h * w, thw = steps * hw, g4 = kGateCount * ch;
  const std::size_t kx = cin * k * k, kh = ch * k * k, chw = ch * hw;
  if (steps == 0) throw ShapeError("convlstm_sequence_backward: empty tape");
  if (!grad_hidden.empty() && grad_hidden.shape() != Shape{steps, ch, h, w}) {
    throw ShapeError("convlstm_sequence_backward: grad_hidden shape " +
                     to_string(grad_hidden.shape()));
  }
  if (grads.input_kernel.empty()) grads = ConvLstmParams::zeros(s);
  if (!(grads.shape == s)) {
    throw ShapeError("convlstm_sequence_backward: gradient shape mismatch");
  }

  std::vector<double> dz(g4 * thw, 0.0);
  std::vector<double> dh_rec(chw, 0.0), dc_next(chw, 0.0), dcols(kh * hw);
  if (grad_final) {
    if (!grad_final->h.empty()) {
      std::copy(grad_final->h.values().begin(), grad_final->h.values().end(),
                dh_rec.begin());
    }
    if (!grad_final->c.empty()) {
      std::copy(grad_final->c.values().begin(), grad_final->c.values().end(),
                dc_next.begin());
    }
  }
  const bool peep = s.peepholes;
  const double* vi = peep ? p.peephole.data() + pi(Peephole::input) * chw : nullptr;
  const double* vf = peep ? p.peephole.data() + pi(Peephole::forget) * chw : nullptr;
  const double* vo = peep ? p.peephole.data() + pi(Peephole::output) * chw : nullptr;
  double* gvi = peep ? grads.peephole.data() + pi(Peephole::input) * chw : nullptr;
  double* gvf = peep ? grads.peephole.data() + pi(Peephole::forget) * chw : nullptr;
  double* gvo = peep ? grads.peephole.data() + pi(Peephole::output) * chw : nullptr;

  for (std::size_t t = steps; t-- > 0;) {
    const double* gates = tape.gates.data() + t * g4 * hw;
    const double* c_prev = tape.cells.data() + t * chw;
    const double* c_new = tape.cells.data() + (t + 1) * chw;
    const double* tcs = tape.cell_tanh.data() + t * chw;
    const double* gh = grad_hidden.empty() ? nullptr : grad_hidden.data() + t * chw;
    for (std::size_t c = 0; c < ch; ++c) {
      for (std::size_t px = 0; px < hw; ++px) {
        const std::size_t idx = c * hw + px;
        const double ig = gates[(gi(Gate::input) * ch + c) * hw + px];
        const double fg = gates[(gi(Gate::forget) * ch + c) * hw + px];
        const double gg = gates[(gi(Gate::cell) * ch + c) * hw + px];
        const double og = gates[(gi(Gate::output) * ch + c) * hw + px];
        const double tc = tcs[idx], cp = c_prev[idx];
        const double dh = dh_rec[idx] + (gh ? gh[idx] : 0.0);
        const double dzo = dh * tc * og * (1.0 - og);
        double dc = dc_next[idx] + dh * og * (1.0 - tc * tc);
        if (peep) dc += dzo * vo[idx];
        const double dzi = dc * gg * ig * (1.0 - ig);
        const double dzf = dc * cp * fg * (1.0 - fg);
        const double dzc = dc * ig * (1.0 - gg * gg);
        double dcp = dc * fg;
        if (peep) {
          dcp += dzi * vi[idx] + dzf * vf[idx];
          gvi[idx] += dzi * cp;
          gvf[idx] += dzf * cp;
          gvo[idx] += dzo * c_new[idx];
        }
        dc_next[idx] = dcp;
        dz[(gi(Gate::input) * ch + c) * thw + t * hw + px] = dzi;
        dz[(gi(Gate::forget) * ch + c) * thw + t * hw + px] = dzf;
        dz[(gi(Gate::cell) * ch + c) * thw + t * hw + px] = dzc;
        dz[(gi(Gate::output) * ch + c) * thw + t * hw + px] = dzo;
      }
    }
    std::fill(dh_rec.begin(), dh_rec.end(), 0.0);
    if (t > 0) {
      detail::map(dcols.data(), kh, hw, hw).noalias() =
          detail::cmap(p.hidden_kernel.data(), g4, kh, kh).transpose() *
          detail::cmap(dz.data() + t * hw, g4, hw, thw);
      detail::col2im_add(dcols.data(), hw, ch, h, w, k, k, dh_rec.data());
    }
  }

  const auto dz_all = detail::cmap(dz.data(), g4, thw, thw);
  detail::map(grads.input_kernel.data(), g4, kx, kx).noalias() +=
      dz_all * detail::cmap(tape.input_cols.data(), kx, thw, thw).transpose();
  detail::map(grads.hidden_kernel.data(), g4, kh, kh).noalias() +=
      dz_all * detail::cmap(tape.hidden_cols.data(), kh, thw, thw).transpose();
  for (std::size_t r = 0; r < g4; ++r) {
    grads.bias[r] += detail::ordered_sum(dz.data() + r * thw, thw);
  }

  std::vector<double> dxcols(kx * thw);
  detail::map(dxcols.data(), kx, thw, thw).noalias() =
      detail::cmap(p.input_kernel.data(), g4, kx, kx).transpose() * dz_all;
  Tensor grad_inputs({steps, cin, h, w});
  for (std::size_t t = 0; t < steps; ++t) {
    detail::col2im_add(dxcols.data() + t * hw, thw, cin, h, w, k, k,
                       grad_inputs.data() + t * cin * hw);
  }
  return grad_inputs;
}

}  // namespace tae
