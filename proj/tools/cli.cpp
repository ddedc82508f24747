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

#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "tae/checkpoint.hpp"
#include "tae/config.hpp"
#include "tae/data.hpp"
#include "tae/gradcheck.hpp"
#include "tae/mask_eval.hpp"
#include "tae/model.hpp"
#include "tae/schedule.hpp"
#include "tae/tfrm.hpp"
#include "tae/training.hpp"

namespace tae::cli {

namespace fs = std::filesystem;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Flags shared by subcommands that read a dataset and split it.
struct DataFlags {
  std::string dir;
  std::size_t val_days = 0;
  std::string sampling = "non-overlapping";
  std::size_t stride = 1;

  void add(CLI::App* app) {
    app->add_option("--data", dir, "Dataset directory written by synth")
        ->required()
        ->check(CLI::ExistingDirectory);
    app->add_option("--val-days", val_days,
                    "Held-out trailing days (0 = max(1, days/4))");
  }
  void add_sampling(CLI::App* app) {
    app->add_option("--sampling", sampling, "Training window sampler")
        ->check(CLI::IsMember({"non-overlapping", "overlapping"}));
    app->add_option("--stride", stride, "Overlapping sampler stride")
        ->check(CLI::PositiveNumber);
  }
};

struct LoadedData {
  DatasetMeta meta;
  std::vector<ByteTensor> days;
  DaySplit split;
};

LoadedData load_data(const DataFlags& f) {
  if (!fs::exists(fs::path(f.dir) / "meta.json")) {
    throw UsageError(f.dir + " is not a dataset directory (meta.json missing)");
  }
  LoadedData d;
  d.meta = read_dataset_meta(f.dir);
  d.days = load_dataset(f.dir);
  try {
    d.split = split_days(d.days.size(), f.val_days);
  } catch (const DataError& e) {
    throw UsageError(e.what());
  }
  return d;
}

std::vector<SequenceSample> samples(const LoadedData& d, std::size_t begin,
                                    std::size_t end, const SamplerConfig& s) {
  std::span<const ByteTensor> days(d.days);
  return sample_sequences(days.subspan(begin, end - begin), s, begin);
}

std::string city_name(const std::string& dir) {
  fs::path p = fs::path(dir).lexically_normal();
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

TemporalAutoencoder open_checkpoint(const std::string& dir) {
  if (!fs::exists(fs::path(dir) / "manifest.json")) {
    throw UsageError("no checkpoint at " + dir);
  }
  return load_checkpoint(dir);
}

void require_grid(const TemporalAutoencoder& m, const DatasetMeta& meta) {
  if (m.config.height != meta.height || m.config.width != meta.width) {
    throw UsageError("checkpoint grid " + std::to_string(m.config.height) + "x" +
                     std::to_string(m.config.width) + " does not match dataset " +
                     std::to_string(meta.height) + "x" +
                     std::to_string(meta.width));
  }
}

// ---------------------------------------------------------------------------

struct SynthCommand {
  SyntheticCityConfig cfg;
  std::string out;

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("synth", "Generate a synthetic city dataset");
    c->add_option("--seed", cfg.seed, "Generator seed");
    c->add_option("--height", cfg.height, "Grid rows");
    c->add_option("--width", cfg.width, "Grid columns");
    c->add_option("--days", cfg.days, "Number of days")->check(CLI::PositiveNumber);
    c->add_flag("--drift", cfg.drift, "Shift parts of the road skeleton on some days");
    c->add_option("--road-fraction", cfg.road_fraction, "Road pixel share");
    c->add_option("--incident-rate", cfg.incident_rate, "Incident probability");
    c->add_option("--out", out, "Output directory")->required();
    c->callback([this, c] { app = c; });
  }

  int run(std::ostream& os) {
    try {
      cfg.validate();
    } catch (const DataError& e) {
      throw UsageError(e.what());
    }
    const auto days = synthetic_city(cfg);
    write_dataset(out, days,
                  {cfg.height, cfg.width, cfg.days, cfg.seed, cfg.drift,
                   cfg.road_fraction});
    os << "wrote " << days.size() << " days of " << cfg.height << "x"
       << cfg.width << " to " << out << '\n';
    return kSuccess;
  }

  CLI::App* app = nullptr;
};

struct TrainCommand {
  DataFlags data;
  std::string config_file;
  bool clr = false;
  std::optional<double> fixed_lr;
  std::optional<std::size_t> epochs, cycles, batch_size;
  std::optional<std::uint64_t> seed, model_seed;
  std::optional<std::string> mode;
  std::optional<double> base_lr, max_lr, gamma, grad_clip;
  std::string out;
  std::string log;
  std::size_t checkpoint_every = 0;
  bool timing = false;
  bool quiet = false;

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("train", "Train a model on one dataset");
    data.add(c);
    data.add_sampling(c);
    c->add_option("--config", config_file, "key = value run configuration")
        ->check(CLI::ExistingFile);
    auto* clr_flag = c->add_flag("--clr", clr, "Cyclical learning rate (default)");
    auto* fixed = c->add_option("--fixed-lr", fixed_lr, "Constant learning rate");
    clr_flag->excludes(fixed);
    c->add_option("--epochs", epochs);
    c->add_option("--cycles", cycles);
    c->add_option("--batch-size", batch_size);
    c->add_option("--seed", seed, "Shuffling seed");
    c->add_option("--model-seed", model_seed, "Initialization seed");
    c->add_option("--mode", mode, "CLR mode")
        ->check(CLI::IsMember({"triangular", "triangular2", "exp_range"}));
    c->add_option("--base-lr", base_lr);
    c->add_option("--max-lr", max_lr);
    c->add_option("--gamma", gamma);
    c->add_option("--grad-clip", grad_clip, "Global gradient norm threshold");
    c->add_option("--out", out, "Checkpoint directory")->required();
    c->add_option("--log", log, "Training CSV");
    c->add_option("--checkpoint-every", checkpoint_every,
                  "Also save <out>/epoch_#### every K epochs");
    c->add_flag("--timing", timing, "Add a seconds column to the CSV");
    c->add_flag("--quiet", quiet, "No per-epoch progress");
    c->callback([this, c] { app = c; });
  }

  RunConfig resolve(const DatasetMeta& meta) const {
    RunConfig base;
    base.model.height = meta.height;
    base.model.width = meta.width;
    RunConfig rc = config_file.empty() ? base : load_run_config(config_file, base);
    if (rc.model.height != meta.height || rc.model.width != meta.width) {
      throw ConfigError("config grid does not match the dataset grid");
    }
    if (epochs) rc.train.epochs = *epochs;
    if (cycles) rc.train.cycles = *cycles;
    if (batch_size) rc.train.batch_size = *batch_size;
    if (seed) rc.train.seed = *seed;
    if (model_seed) rc.model_seed = *model_seed;
    if (grad_clip) rc.train.grad_clip = *grad_clip;
    if (mode) rc.schedule.mode = parse_clr_mode(*mode);
    if (base_lr) rc.schedule.base_lr = *base_lr;
    if (max_lr) rc.schedule.max_lr = *max_lr;
    if (gamma) rc.schedule.gamma = *gamma;
    if (fixed_lr) rc.train.fixed_lr = *fixed_lr;
    if (clr) rc.train.fixed_lr.reset();
    rc.model.validate();
    rc.train.validate();
    if (!rc.train.fixed_lr) {
      ClrSchedule probe = rc.schedule;
      probe.step_size = 1;
      probe.validate();
    }
    return rc;
  }

  int run(std::ostream& os) {
    const LoadedData d = load_data(data);
    const RunConfig rc = resolve(d.meta);
    SamplerConfig train_sampler;
    train_sampler.seq_in = rc.model.seq_in;
    train_sampler.seq_out = rc.model.seq_out;
    if (data.sampling == "overlapping") {
      train_sampler.strategy = Sampling::overlapping;
      train_sampler.stride = data.stride;
    }
    SamplerConfig val_sampler{Sampling::non_overlapping, rc.model.seq_in,
                              rc.model.seq_out, 1};
    const auto train = samples(d, d.split.train_begin, d.split.train_end, train_sampler);
    const auto val = samples(d, d.split.val_begin, d.split.val_end, val_sampler);

    TemporalAutoencoder model = build_model(rc.model, rc.model_seed);
    FitHooks hooks;
    hooks.timing = timing;
    hooks.on_epoch = [&](const EpochRecord& e, const TemporalAutoencoder& m) {
      if (!quiet) {
        os << "epoch " << e.epoch + 1 << "/" << rc.train.epochs
           << " train_mse " << fmt(e.train_mse);
        if (e.val_mse) os << " val_mse " << fmt(*e.val_mse);
        os << '\n';
      }
      if (checkpoint_every && (e.epoch + 1) % checkpoint_every == 0) {
        char name[32];
        std::snprintf(name, sizeof name, "epoch_%04zu", e.epoch + 1);
        save_checkpoint(fs::path(out) / name, m);
      }
    };
    const TrainingLog result = fit(model, train, val, rc.train, rc.schedule, hooks);

    save_checkpoint(out, model);
    write_file(fs::path(out) / "config.txt", format_run_config(rc));
    if (!log.empty()) {
      std::ofstream csv(log, std::ios::binary);
      if (!csv) throw TfrmError(TfrmErrorCode::io_failure, "cannot write " + log);
      write_training_csv(csv, result, timing);
    }
    const auto& last = result.epochs.back();
    os << "final train_mse " << fmt(last.train_mse);
    if (last.val_mse) os << " val_mse " << fmt(*last.val_mse);
    os << "\ncheckpoint " << out << '\n';
    return kSuccess;
  }

  CLI::App* app = nullptr;
};

struct PredictCommand {
  DataFlags data;
  std::string checkpoint;
  std::string out;
  std::string mask;
  bool select_6 = false;

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("predict", "Write predictions for validation sequences");
    data.add(c);
    c->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    c->add_option("--out", out, "Output directory")->required();
    c->add_option("--mask", mask, "Mask file applied to predictions")
        ->check(CLI::ExistingFile);
    c->add_flag("--select-6", select_6, "Keep the +5,+10,+15,+30,+45,+60 min bins");
    c->callback([this, c] { app = c; });
  }

  int run(std::ostream& os) {
    const TemporalAutoencoder model = open_checkpoint(checkpoint);
    const LoadedData d = load_data(data);
    require_grid(model, d.meta);
    std::optional<BinaryMask> m;
    if (!mask.empty()) m = load_mask(mask);
    const SamplerConfig s{Sampling::non_overlapping, model.config.seq_in,
                          model.config.seq_out, 1};
    const auto val = samples(d, d.split.val_begin, d.split.val_end, s);
    fs::create_directories(out);
    for (const auto& sample : val) {
      Tensor pred = forward(model, sample.input);
      if (m) pred = apply_mask(pred, *m);
      if (select_6) pred = select_bins(pred);
      // Channel-last u8 frames, the day file layout.
      const std::size_t t = pred.extent(0), c = pred.extent(1),
                        h = pred.extent(2), w = pred.extent(3);
      ByteTensor frames({t, h, w, c});
      for (std::size_t f = 0; f < t; ++f)
        for (std::size_t k = 0; k < c; ++k)
          for (std::size_t p = 0; p < h * w; ++p)
            frames[(f * h * w + p) * c + k] =
                denormalize_value(pred[(f * c + k) * h * w + p]);
      char name[48];
      std::snprintf(name, sizeof name, "pred_d%04zu_b%03zu.tfrm", sample.day,
                    sample.start_bin);
      save_tfrm(fs::path(out) / name, frames);
    }
    os << "wrote " << val.size() << " predictions to " << out << '\n';
    return kSuccess;
  }

  CLI::App* app = nullptr;
};

struct EvalCommand {
  DataFlags data;
  std::string checkpoint;
  std::string mask;
  std::string city;
  std::string label = "final";
  std::string out;
  bool append = false;
  bool select_6 = false;

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("eval", "Validation MSE report");
    data.add(c);
    c->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
    c->add_option("--mask", mask, "Mask file")->check(CLI::ExistingFile);
    c->add_option("--city", city, "City column (default: dataset directory name)");
    c->add_option("--label", label, "Config column");
    c->add_option("--out", out, "CSV report (stdout when absent)");
    c->add_flag("--append", append, "Append a row instead of rewriting --out");
    c->add_flag("--select-6", select_6, "Score only the six reported bins");
    c->callback([this, c] { app = c; });
  }

  int run(std::ostream& os) {
    const TemporalAutoencoder model = open_checkpoint(checkpoint);
    const LoadedData d = load_data(data);
    require_grid(model, d.meta);
    std::optional<BinaryMask> m;
    if (!mask.empty()) m = load_mask(mask);
    const SamplerConfig s{Sampling::non_overlapping, model.config.seq_in,
                          model.config.seq_out, 1};
    const auto val = samples(d, d.split.val_begin, d.split.val_end, s);
    const double score = evaluate(model, val, {m ? &*m : nullptr, select_6});
    const EvalRow row{city.empty() ? city_name(data.dir) : city, label,
                      m.has_value(), score};
    if (out.empty()) {
      write_eval_header(os);
      write_eval_row(os, row);
      return kSuccess;
    }
    const bool fresh = !append || !fs::exists(out) || fs::file_size(out) == 0;
    std::ofstream csv(out, append ? std::ios::app : std::ios::trunc);
    if (!csv) throw TfrmError(TfrmErrorCode::io_failure, "cannot write " + out);
    if (fresh) write_eval_header(csv);
    write_eval_row(csv, row);
    os << row.city << ' ' << row.config << (row.masked ? " masked" : "")
       << " val_mse " << fmt(score) << '\n';
    return kSuccess;
  }

  CLI::App* app = nullptr;
};

struct MaskCommand {
  DataFlags data;
  std::string out;
  bool all_days = false;

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("mask", "Build a road mask from training days");
    data.add(c);
    c->add_option("--out", out, "Mask file")->required();
    c->add_flag("--all-days", all_days, "Include the validation days");
    c->callback([this, c] { app = c; });
  }

  int run(std::ostream& os) {
    const LoadedData d = load_data(data);
    std::span<const ByteTensor> days(d.days);
    if (!all_days) days = days.subspan(d.split.train_begin, d.split.train_end - d.split.train_begin);
    const BinaryMask m = build_mask(days);
    save_mask(out, m);
    os << "mask " << m.count() << "/" << m.bits.size() << " pixels from "
       << m.days << " days\n";
    return kSuccess;
  }

  CLI::App* app = nullptr;
};

struct GradcheckCommand {
  GradcheckOptions options;
  std::string fault = "none";

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("gradcheck", "Finite-difference check of all gradients");
    c->add_option("--seed", options.seed);
    c->add_option("--tolerance", options.tolerance, "Per-op relative error bound");
    c->add_option("--model-tolerance", options.model_tolerance,
                  "Full-model relative error bound");
    c->add_option("--model-samples", options.model_samples);
    c->add_option("--inject-fault", fault, "Deliberate bug for testing the checker")
        ->check(CLI::IsMember({"none", "conv-sign"}));
    c->callback([this, c] { app = c; });
  }

  int run(std::ostream& os) {
    if (fault == "conv-sign") options.fault = GradcheckFault::conv_sign;
    const GradcheckReport r = run_gradcheck(options);
    write_gradcheck_report(os, r);
    return r.passed() ? kSuccess : kVerificationFailure;
  }

  CLI::App* app = nullptr;
};

struct ScheduleDumpCommand {
  ClrSchedule schedule;
  std::string mode = "triangular";
  std::size_t epochs = 28;
  std::size_t cycles = 7;
  std::size_t batches_per_epoch = 1;
  std::optional<std::size_t> step_size;
  std::optional<std::uint64_t> iterations;

  void add(CLI::App& root) {
    CLI::App* c = root.add_subcommand("schedule-dump", "Print the learning-rate trace");
    c->add_option("--mode", mode)
        ->check(CLI::IsMember({"triangular", "triangular2", "exp_range"}));
    c->add_option("--base-lr", schedule.base_lr);
    c->add_option("--max-lr", schedule.max_lr);
    c->add_option("--gamma", schedule.gamma);
    c->add_option("--epochs", epochs)->check(CLI::PositiveNumber);
    c->add_option("--cycles", cycles)->check(CLI::PositiveNumber);
    c->add_option("--batches-per-epoch", batches_per_epoch)->check(CLI::PositiveNumber);
    c->add_option("--step-size", step_size, "Overrides the derived half-cycle length")
        ->check(CLI::PositiveNumber);
    c->add_option("--iterations", iterations, "Default: epochs * batches");
    c->callback([this, c] { app = c; });
  }

  int run(std::ostream& os) {
    schedule.mode = parse_clr_mode(mode);
    TrainConfig tc;
    tc.epochs = epochs;
    tc.cycles = cycles;
    schedule.step_size = step_size ? *step_size : derived_step_size(tc, batches_per_epoch);
    schedule.validate();
    const std::uint64_t n = iterations ? *iterations : epochs * batches_per_epoch;
    os << "iteration,lr\n";
    for (std::uint64_t i = 0; i < n; ++i) os << i << ',' << fmt(clr(i, schedule)) << '\n';
    return kSuccess;
  }

  CLI::App* app = nullptr;
};

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal autoencoder for traffic frame prediction", "tae"};
  app.require_subcommand(1);
  SynthCommand synth;
  TrainCommand train;
  PredictCommand predict;
  EvalCommand eval;
  MaskCommand mask;
  GradcheckCommand gradcheck;
  ScheduleDumpCommand schedule_dump;
  synth.add(app);
  train.add(app);
  predict.add(app);
  eval.add(app);
  mask.add(app);
  gradcheck.add(app);
  schedule_dump.add(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    if (synth.app) return synth.run(out);
    if (train.app) return train.run(out);
    if (predict.app) return predict.run(out);
    if (eval.app) return eval.run(out);
    if (mask.app) return mask.run(out);
    if (gradcheck.app) return gradcheck.run(out);
    if (schedule_dump.app) return schedule_dump.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace tae::cli
