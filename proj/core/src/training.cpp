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

#include "tae/training.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>

#include "tae/random.hpp"

namespace tae {

namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw ShapeError(std::string(what) + ": shapes " + to_string(a.shape()) +
                     " and " + to_string(b.shape()) + " differ");
  }
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void scale_all(TemporalAutoencoder& grads, double factor) {
  for (auto& p : grads.parameters()) {
    for (double& x : p.tensor->values()) x *= factor;
  }
}

void clip_global_norm(TemporalAutoencoder& grads, double threshold) {
  double sq = 0.0;
  for (const auto& p : std::as_const(grads).parameters()) {
    for (double x : p.tensor->values()) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > threshold && std::isfinite(norm)) scale_all(grads, threshold / norm);
}

}  // namespace

double mse(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse");
  if (pred.empty()) throw ShapeError("mse: empty tensors");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

Tensor mse_grad(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "mse_grad");
  Tensor g(pred.shape());
  const double k = 2.0 / static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) g[i] = k * (pred[i] - target[i]);
  return g;
}

void TrainConfig::validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (grad_clip && !(*grad_clip > 0.0)) {
    throw ConfigError("grad_clip must be positive");
  }
  if (fixed_lr) {
    if (!(*fixed_lr >= 0.0) || !std::isfinite(*fixed_lr)) {
      throw ConfigError("fixed_lr must be a finite non-negative rate");
    }
    return;
  }
  if (cycles == 0) throw ConfigError("cycles must be positive");
  if (epochs % (2 * cycles) != 0) {
    throw ConfigError("epochs (" + std::to_string(epochs) +
                      ") must be divisible by 2 * cycles (" +
                      std::to_string(2 * cycles) + ") with CLR on");
  }
}

std::size_t derived_step_size(const TrainConfig& cfg,
                              std::size_t batches_per_epoch) {
  return std::max<std::size_t>(
      1, cfg.epochs * batches_per_epoch / (2 * std::max<std::size_t>(1, cfg.cycles)));
}

double evaluate_loss(const TemporalAutoencoder& model,
                     std::span<const SequenceSample> samples) {
  if (samples.empty()) throw TrainingError("evaluation set is empty");
  double sum = 0.0;
  for (const auto& s : samples) sum += mse(forward(model, s.input), s.target);
  return sum / static_cast<double>(samples.size());
}

TrainingLog fit(TemporalAutoencoder& model,
                std::span<const SequenceSample> train,
                std::span<const SequenceSample> val, const TrainConfig& cfg,
                const ClrSchedule& schedule, const FitHooks& hooks) {
  cfg.validate();
  if (train.empty()) throw TrainingError("training set is empty");

  TrainingLog log;
  log.batches_per_epoch = (train.size() + cfg.batch_size - 1) / cfg.batch_size;
  log.schedule = schedule;
  log.schedule.step_size = derived_step_size(cfg, log.batches_per_epoch);
  if (!cfg.fixed_lr) log.schedule.validate();

  Rng rng(cfg.seed);
  std::vector<std::size_t> order(train.size());
  AdamState adam;
  TemporalAutoencoder grads = zeros_like(model);
  ForwardTape tape;
  std::uint64_t iteration = 0;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(order));
    double epoch_loss = 0.0;

    for (std::size_t b = 0; b < log.batches_per_epoch; ++b) {
      const auto t0 = std::chrono::steady_clock::now();
      const std::size_t first = b * cfg.batch_size;
      const std::size_t count = std::min(cfg.batch_size, train.size() - first);
      for (auto& p : grads.parameters()) p.tensor->fill(0.0);

      double batch_loss = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const SequenceSample& s = train[order[first + k]];
        const Tensor pred = forward(model, s.input, &tape);
        const double loss = mse(pred, s.target);
        if (!std::isfinite(loss)) {
          throw TrainingError(
              "non-finite loss at epoch " + std::to_string(epoch) +
              ", iteration " + std::to_string(iteration) + " (lr " +
              format_number(cfg.fixed_lr ? *cfg.fixed_lr
                                         : clr(iteration, log.schedule)) +
              "); the learning rate is probably too high");
        }
        batch_loss += loss;
        backward(model, tape, mse_grad(pred, s.target), grads);
      }
      batch_loss /= static_cast<double>(count);
      scale_all(grads, 1.0 / static_cast<double>(count));
      if (cfg.grad_clip) clip_global_norm(grads, *cfg.grad_clip);

      IterationRecord rec;
      rec.epoch = epoch;
      rec.iteration = iteration;
      rec.lr = cfg.fixed_lr ? *cfg.fixed_lr : clr(iteration, log.schedule);
      rec.train_mse = batch_loss;
      const auto params = model.parameters();
      const auto grad_view = std::as_const(grads).parameters();
      rec.skipped = !adam_step(params, grad_view, adam, rec.lr).applied;
      epoch_loss += batch_loss;
      ++iteration;

      const bool last = b + 1 == log.batches_per_epoch;
      if (last && !val.empty()) rec.val_mse = evaluate_loss(model, val);
      if (hooks.timing) {
        rec.seconds = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      }
      log.iterations.push_back(rec);
      if (hooks.on_iteration && !hooks.on_iteration(rec)) {
        log.stopped_early = true;
        log.epochs.push_back(
            {epoch, epoch_loss / static_cast<double>(b + 1), rec.val_mse});
        return log;
      }
    }

    EpochRecord er{epoch,
                   epoch_loss / static_cast<double>(log.batches_per_epoch),
                   log.iterations.back().val_mse};
    log.epochs.push_back(er);
    if (hooks.on_epoch) hooks.on_epoch(er, model);
  }
  return log;
}

void write_training_csv(std::ostream& out, const TrainingLog& log, bool timing) {
  out << "epoch,iteration,lr,train_mse,val_mse" << (timing ? ",seconds" : "")
      << '\n';
  for (const auto& r : log.iterations) {
    out << r.epoch << ',' << r.iteration << ',' << format_number(r.lr) << ','
        << format_number(r.train_mse) << ','
        << (r.val_mse ? format_number(*r.val_mse) : "");
    if (timing) out << ',' << format_number(r.seconds);
    out << '\n';
  }
}

}  // namespace tae
