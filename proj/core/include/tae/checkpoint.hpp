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

// Model checkpoints: a directory holding manifest.json and one f64 TFRM file
// per parameter tensor.

#pragma once

#include <filesystem>
#include <stdexcept>

#include "tae/model.hpp"

namespace tae {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void save_checkpoint(const std::filesystem::path& dir,
                     const TemporalAutoencoder& model);

/// Rebuilds the model from the manifest config and checks every tensor
/// shape against it.
TemporalAutoencoder load_checkpoint(const std::filesystem::path& dir);

}  // namespace tae
