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

// MSE loss and the mini-batch training loop.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "tae/data.hpp"
#include "tae/model.hpp"
#include "tae/schedule.hpp"

namespace tae {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

double mse(const Tensor& pred, const Tensor& target);
/// d mse / d pred.
Tensor mse_grad(const Tensor& pred, const Tensor& target);

struct TrainConfig {
  std::size_t epochs = 28;
  std::size_t batch_size = 4;
  std::size_t cycles = 7;
  /// Shuffling seed.
  std::uint64_t seed = 0;
  /// Rescale the global gradient norm down to this value when exceeded.
  std::optional<double> grad_clip;
  /// Constant learning rate; disables the cyclical schedule.
  std::optional<double> fixed_lr;

  /// Throws ConfigError.
  void validate() const;
};

struct IterationRecord {
  std::size_t epoch = 0;
  std::uint64_t iteration = 0;
  double lr = 0.0;
  /// Batch loss before the update.
  double train_mse = 0.0;
  /// Set on the last iteration of an epoch when validation data exists.
  std::optional<double> val_mse;
  bool skipped = false;
  double seconds = 0.0;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_mse = 0.0;
  std::optional<double> val_mse;
};

struct TrainingLog {
  std::vector<IterationRecord> iterations;
  std::vector<EpochRecord> epochs;
  /// The schedule actually used, with the derived step size.
  ClrSchedule schedule;
  std::size_t batches_per_epoch = 0;
  bool stopped_early = false;
};

struct FitHooks {
  /// Called after every iteration; returning false ends training.
  std::function<bool(const IterationRecord&)> on_iteration;
  /// Called after every epoch with the current parameters.
  std::function<void(const EpochRecord&, const TemporalAutoencoder&)> on_epoch;
  /// Record wall-clock seconds per iteration.
  bool timing = false;
};

/// Iterations per half-cycle: epochs * batches / (2 * cycles).
std::size_t derived_step_size(const TrainConfig& cfg, std::size_t batches_per_epoch);

/// Mean per-sample MSE over `samples` without gradients.
double evaluate_loss(const TemporalAutoencoder& model,
                     std::span<const SequenceSample> samples);

/// Trains in place with Adam. Samples are reshuffled every epoch with the
/// config seed; the last batch of an epoch may be short. The batch gradient
/// is the mean of per-sample gradients, accumulated in batch order. The
/// schedule's step_size is replaced by the derived one. Throws
/// TrainingError on a non-finite loss.
TrainingLog fit(TemporalAutoencoder& model,
                std::span<const SequenceSample> train,
                std::span<const SequenceSample> val, const TrainConfig& cfg,
                const ClrSchedule& schedule, const FitHooks& hooks = {});

/// Header `epoch,iteration,lr,train_mse,val_mse` (plus `seconds` when
/// `timing`), one row per iteration, numbers printed with %.17g.
void write_training_csv(std::ostream& out, const TrainingLog& log,
                        bool timing = false);

}  // namespace tae
