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

// TFRM v1 binary tensor files.
//
// Layout (all integers little-endian u32):
//   "TFRM" | version=1 | dtype (0 = u8, 1 = f64) | rank | extents... | payload
// The payload is row-major; f64 values are IEEE-754 little-endian.

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "tae/tensor.hpp"

namespace tae {

enum class DType : std::uint32_t { u8 = 0, f64 = 1 };

enum class TfrmErrorCode {
  io_failure,
  bad_magic,
  unsupported_version,
  bad_header,
  dtype_mismatch,
  truncated_payload,
  trailing_data,
};

const char* to_string(TfrmErrorCode code);

class TfrmError : public std::runtime_error {
 public:
  TfrmError(TfrmErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code) {}
  TfrmErrorCode code() const noexcept { return code_; }

 private:
  TfrmErrorCode code_;
};

inline constexpr std::uint32_t kTfrmVersion = 1;

std::string encode_tfrm(const Tensor& t);
std::string encode_tfrm(const ByteTensor& t);

Tensor decode_tfrm_f64(std::string_view bytes);
ByteTensor decode_tfrm_u8(std::string_view bytes);

/// Reads only the dtype code of an encoded buffer.
DType peek_tfrm_dtype(std::string_view bytes);

void save_tfrm(const std::filesystem::path& path, const Tensor& t);
void save_tfrm(const std::filesystem::path& path, const ByteTensor& t);

Tensor load_tfrm_f64(const std::filesystem::path& path);
ByteTensor load_tfrm_u8(const std::filesystem::path& path);

/// Whole-file helpers, throw TfrmError(io_failure).
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

}  // namespace tae
