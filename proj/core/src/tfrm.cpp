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

#include "tae/tfrm.hpp"

#include <bit>
#include <fstream>
#include <iterator>
#include <limits>
#include <type_traits>

namespace tae {

const char* to_string(TfrmErrorCode code) {
  switch (code) {
    case TfrmErrorCode::io_failure: return "io failure";
    case TfrmErrorCode::bad_magic: return "bad magic";
    case TfrmErrorCode::unsupported_version: return "unsupported version";
    case TfrmErrorCode::bad_header: return "bad header";
    case TfrmErrorCode::dtype_mismatch: return "dtype mismatch";
    case TfrmErrorCode::truncated_payload: return "truncated payload";
    case TfrmErrorCode::trailing_data: return "trailing data";
  }
  return "unknown";
}

namespace {

constexpr std::string_view kMagic = "TFRM";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xffu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::uint32_t u32(TfrmErrorCode on_short, const char* what) {
    need(4, on_short, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += 8;
    return v;
  }

  unsigned char byte() { return static_cast<unsigned char>(bytes_[pos_++]); }

  void need(std::size_t n, TfrmErrorCode code, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw TfrmError(code, std::string(what) + " needs " + std::to_string(n) +
                                " bytes, " + std::to_string(bytes_.size() - pos_) +
                                " left");
    }
  }

  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

struct Header {
  DType dtype;
  Shape shape;
};

Header read_header(Reader& r, std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw TfrmError(TfrmErrorCode::bad_magic, "file does not start with TFRM");
  }
  r.need(4, TfrmErrorCode::bad_magic, "magic");
  for (int i = 0; i < 4; ++i) r.byte();
  const std::uint32_t version = r.u32(TfrmErrorCode::bad_header, "version");
  if (version != kTfrmVersion) {
    throw TfrmError(TfrmErrorCode::unsupported_version,
                    "version " + std::to_string(version));
  }
  const std::uint32_t dtype = r.u32(TfrmErrorCode::bad_header, "dtype");
  if (dtype > 1) {
    throw TfrmError(TfrmErrorCode::bad_header,
                    "unknown dtype code " + std::to_string(dtype));
  }
  const std::uint32_t rank = r.u32(TfrmErrorCode::bad_header, "rank");
  if (rank == 0) throw TfrmError(TfrmErrorCode::bad_header, "rank 0");
  Shape shape(rank);
  for (auto& e : shape) {
    e = r.u32(TfrmErrorCode::bad_header, "extent");
    if (e == 0) throw TfrmError(TfrmErrorCode::bad_header, "zero extent");
  }
  return {static_cast<DType>(dtype), std::move(shape)};
}

template <typename T>
std::string encode(const BasicTensor<T>& t, DType dtype) {
  if (t.empty()) throw ShapeError("encode_tfrm: empty tensor");
  std::string out(kMagic);
  put_u32(out, kTfrmVersion);
  put_u32(out, static_cast<std::uint32_t>(dtype));
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t e : t.shape()) {
    if (e > std::numeric_limits<std::uint32_t>::max()) {
      throw ShapeError("encode_tfrm: extent exceeds u32");
    }
    put_u32(out, static_cast<std::uint32_t>(e));
  }
  if constexpr (std::is_same_v<T, double>) {
    out.reserve(out.size() + 8 * t.size());
    for (double v : t.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  } else {
    out.append(reinterpret_cast<const char*>(t.data()), t.size());
  }
  return out;
}

template <typename T>
BasicTensor<T> decode(std::string_view bytes, DType expected) {
  Reader r(bytes);
  Header h = read_header(r, bytes);
  if (h.dtype != expected) {
    throw TfrmError(TfrmErrorCode::dtype_mismatch,
                    "file dtype " +
                        std::to_string(static_cast<std::uint32_t>(h.dtype)) +
                        ", expected " +
                        std::to_string(static_cast<std::uint32_t>(expected)));
  }
  const std::size_t n = element_count(h.shape);
  const std::size_t width = expected == DType::f64 ? 8 : 1;
  r.need(n * width, TfrmErrorCode::truncated_payload, "payload");
  std::vector<T> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<T, double>) {
      data[i] = std::bit_cast<double>(r.u64());
    } else {
      data[i] = r.byte();
    }
  }
  if (r.remaining() != 0) {
    throw TfrmError(TfrmErrorCode::trailing_data,
                    std::to_string(r.remaining()) + " bytes after payload");
  }
  return BasicTensor<T>(std::move(h.shape), std::move(data));
}

}  // namespace

std::string encode_tfrm(const Tensor& t) { return encode(t, DType::f64); }
std::string encode_tfrm(const ByteTensor& t) { return encode(t, DType::u8); }

Tensor decode_tfrm_f64(std::string_view bytes) {
  return decode<double>(bytes, DType::f64);
}
ByteTensor decode_tfrm_u8(std::string_view bytes) {
  return decode<std::uint8_t>(bytes, DType::u8);
}

DType peek_tfrm_dtype(std::string_view bytes) {
  Reader r(bytes);
  return read_header(r, bytes).dtype;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TfrmError(TfrmErrorCode::io_failure, "cannot open " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TfrmError(TfrmErrorCode::io_failure, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw TfrmError(TfrmErrorCode::io_failure, "write failed for " + path.string());
}

void save_tfrm(const std::filesystem::path& path, const Tensor& t) {
  write_file(path, encode_tfrm(t));
}
void save_tfrm(const std::filesystem::path& path, const ByteTensor& t) {
  write_file(path, encode_tfrm(t));
}

Tensor load_tfrm_f64(const std::filesystem::path& path) {
  return decode_tfrm_f64(read_file(path));
}
ByteTensor load_tfrm_u8(const std::filesystem::path& path) {
  return decode_tfrm_u8(read_file(path));
}

}  // namespace tae
