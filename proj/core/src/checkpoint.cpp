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

#include "tae/checkpoint.hpp"

#include <nlohmann/json.hpp>

#include "tae/tfrm.hpp"

namespace tae {

namespace {

constexpr const char* kFormat = "tae-checkpoint";
constexpr int kVersion = 1;

nlohmann::ordered_json config_to_json(const ModelConfig& c) {
  nlohmann::ordered_json j;
  j["input_channels"] = c.input_channels;
  j["output_channels"] = c.output_channels;
  j["hidden_channels"] = c.hidden_channels;
  j["kernel_size"] = c.kernel_size;
  j["seq_in"] = c.seq_in;
  j["seq_out"] = c.seq_out;
  j["height"] = c.height;
  j["width"] = c.width;
  j["peepholes"] = c.peepholes;
  j["skips"] = c.skips;
  j["downsample"] = c.downsample;
  j["pool_stages"] = c.pool_stages;
  j["upsample_kernel"] = c.upsample_kernel;
  return j;
}

ModelConfig config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.input_channels = j.at("input_channels").get<std::size_t>();
  c.output_channels = j.at("output_channels").get<std::size_t>();
  c.hidden_channels = j.at("hidden_channels").get<std::vector<std::size_t>>();
  c.kernel_size = j.at("kernel_size").get<std::size_t>();
  c.seq_in = j.at("seq_in").get<std::size_t>();
  c.seq_out = j.at("seq_out").get<std::size_t>();
  c.height = j.at("height").get<std::size_t>();
  c.width = j.at("width").get<std::size_t>();
  c.peepholes = j.at("peepholes").get<bool>();
  c.skips = j.at("skips").get<bool>();
  c.downsample = j.at("downsample").get<bool>();
  c.pool_stages = j.at("pool_stages").get<std::size_t>();
  c.upsample_kernel = j.at("upsample_kernel").get<std::size_t>();
  return c;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir,
                     const TemporalAutoencoder& model) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw CheckpointError("cannot create " + dir.string() + ": " + ec.message());
  }
  nlohmann::ordered_json manifest;
  manifest["format"] = kFormat;
  manifest["version"] = kVersion;
  manifest["model"] = config_to_json(model.config);
  nlohmann::ordered_json files = nlohmann::ordered_json::object();
  for (const auto& p : model.parameters()) {
    const std::string file = p.name + ".tfrm";
    save_tfrm(dir / file, *p.tensor);
    files[p.name] = file;
  }
  manifest["parameters"] = files;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

TemporalAutoencoder load_checkpoint(const std::filesystem::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  if (!std::filesystem::exists(manifest_path)) {
    throw CheckpointError("no checkpoint at " + dir.string() +
                          " (manifest.json missing)");
  }
  nlohmann::json manifest;
  ModelConfig cfg;
  try {
    manifest = nlohmann::json::parse(read_file(manifest_path));
    if (manifest.at("format").get<std::string>() != kFormat ||
        manifest.at("version").get<int>() != kVersion) {
      throw CheckpointError(manifest_path.string() +
                            ": unsupported checkpoint format");
    }
    cfg = config_from_json(manifest.at("model"));
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError(manifest_path.string() + ": " + e.what());
  }
  TemporalAutoencoder model = build_model(cfg, 0);
  const auto& files = manifest.at("parameters");
  for (auto& p : model.parameters()) {
    if (!files.contains(p.name)) {
      throw CheckpointError(manifest_path.string() + ": missing parameter " + p.name);
    }
    Tensor t = load_tfrm_f64(dir / files.at(p.name).get<std::string>());
    if (t.shape() != p.tensor->shape()) {
      throw CheckpointError(p.name + ": stored shape " + to_string(t.shape()) +
                            " does not match " + to_string(p.tensor->shape()));
    }
    *p.tensor = std::move(t);
  }
  if (files.size() != model.parameters().size()) {
    throw CheckpointError(manifest_path.string() + ": unexpected parameter entries");
  }
  return model;
}

}  // namespace tae
