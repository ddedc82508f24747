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

#include "tae/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tae/tfrm.hpp"

namespace tae {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto size = [](std::size_t ModelConfig::*f) {
      return [f](RunConfig& c, const std::string& k, const std::string& v) {
        c.model.*f = parse_uint(k, v);
      };
    };
    auto flag = [](bool ModelConfig::*f) {
      return [f](RunConfig& c, const std::string& k, const std::string& v) {
        c.model.*f = parse_bool(k, v);
      };
    };
    t["input_channels"] = size(&ModelConfig::input_channels);
    t["output_channels"] = size(&ModelConfig::output_channels);
    t["kernel_size"] = size(&ModelConfig::kernel_size);
    t["seq_in"] = size(&ModelConfig::seq_in);
    t["seq_out"] = size(&ModelConfig::seq_out);
    t["height"] = size(&ModelConfig::height);
    t["width"] = size(&ModelConfig::width);
    t["pool_stages"] = size(&ModelConfig::pool_stages);
    t["upsample_kernel"] = size(&ModelConfig::upsample_kernel);
    t["peepholes"] = flag(&ModelConfig::peepholes);
    t["skips"] = flag(&ModelConfig::skips);
    t["downsample"] = flag(&ModelConfig::downsample);
    t["hidden_channels"] = [](RunConfig& c, const std::string& k,
                              const std::string& v) {
      std::vector<std::size_t> out;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(parse_uint(k, trim(item)));
      c.model.hidden_channels = std::move(out);
    };
    t["epochs"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.epochs = parse_uint(k, v);
    };
    t["batch_size"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.batch_size = parse_uint(k, v);
    };
    t["cycles"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.cycles = parse_uint(k, v);
    };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.train.seed = parse_uint(k, v);
    };
    t["grad_clip"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "none") c.train.grad_clip.reset();
      else c.train.grad_clip = parse_double(k, v);
    };
    t["fixed_lr"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      if (v == "none") c.train.fixed_lr.reset();
      else c.train.fixed_lr = parse_double(k, v);
    };
    t["base_lr"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.schedule.base_lr = parse_double(k, v);
    };
    t["max_lr"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.schedule.max_lr = parse_double(k, v);
    };
    t["mode"] = [](RunConfig& c, const std::string&, const std::string& v) {
      c.schedule.mode = parse_clr_mode(v);
    };
    t["gamma"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.schedule.gamma = parse_double(k, v);
    };
    t["model_seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.model_seed = parse_uint(k, v);
    };
    return t;
  }();
  return table;
}

}  // namespace

RunConfig parse_run_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(n) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      throw ConfigError("line " + std::to_string(n) + ": unknown key '" + key + "'");
    }
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(n) + ": repeated key '" + key + "'");
    }
    it->second(base, key, value);
  }
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  return parse_run_config(read_file(path), std::move(base));
}

std::string format_run_config(const RunConfig& c) {
  std::ostringstream out;
  const auto b = [](bool v) { return v ? "true" : "false"; };
  out << "input_channels = " << c.model.input_channels << '\n'
      << "output_channels = " << c.model.output_channels << '\n'
      << "hidden_channels = ";
  for (std::size_t i = 0; i < c.model.hidden_channels.size(); ++i) {
    out << (i ? "," : "") << c.model.hidden_channels[i];
  }
  out << '\n'
      << "kernel_size = " << c.model.kernel_size << '\n'
      << "seq_in = " << c.model.seq_in << '\n'
      << "seq_out = " << c.model.seq_out << '\n'
      << "height = " << c.model.height << '\n'
      << "width = " << c.model.width << '\n'
      << "peepholes = " << b(c.model.peepholes) << '\n'
      << "skips = " << b(c.model.skips) << '\n'
      << "downsample = " << b(c.model.downsample) << '\n'
      << "pool_stages = " << c.model.pool_stages << '\n'
      << "upsample_kernel = " << c.model.upsample_kernel << '\n'
      << "model_seed = " << c.model_seed << '\n'
      << "epochs = " << c.train.epochs << '\n'
      << "batch_size = " << c.train.batch_size << '\n'
      << "cycles = " << c.train.cycles << '\n'
      << "seed = " << c.train.seed << '\n'
      << "grad_clip = " << (c.train.grad_clip ? fmt(*c.train.grad_clip) : "none") << '\n'
      << "fixed_lr = " << (c.train.fixed_lr ? fmt(*c.train.fixed_lr) : "none") << '\n'
      << "base_lr = " << fmt(c.schedule.base_lr) << '\n'
      << "max_lr = " << fmt(c.schedule.max_lr) << '\n'
      << "mode = " << to_string(c.schedule.mode) << '\n'
      << "gamma = " << fmt(c.schedule.gamma) << '\n';
  return out.str();
}

}  // namespace tae
