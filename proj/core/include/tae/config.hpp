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

// Run configuration files: one `key = value` per line, `#` starts a comment.
// Keys are the field names of ModelConfig, TrainConfig and ClrSchedule plus
// `model_seed`; hidden_channels is a comma-separated list.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "tae/model.hpp"
#include "tae/schedule.hpp"
#include "tae/training.hpp"

namespace tae {

struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  ClrSchedule schedule;
  std::uint64_t model_seed = 0;
};

/// Applies the keys in `text` on top of `base`. Unknown keys, repeated keys
/// and malformed values throw ConfigError.
RunConfig parse_run_config(const std::string& text, RunConfig base = {});
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base = {});

/// Every key, in a stable order; parse_run_config(format_run_config(c)) == c.
std::string format_run_config(const RunConfig& cfg);

}  // namespace tae
