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

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace tae {

/// Raised when operands have incompatible extents.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Shape = std::vector<std::size_t>;

inline std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

inline std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

/// Dense row-major array with owned storage.
///
/// A default-constructed tensor is "empty": it has no shape and no data and
/// stands for an absent operand. Every tensor built with a shape has extents
/// >= 1 and exactly element_count(shape) values.
template <typename T>
class BasicTensor {
 public:
  using value_type = T;

  BasicTensor() = default;

  explicit BasicTensor(Shape shape, T fill = T{})
      : shape_(std::move(shape)) {
    check_extents(shape_);
    data_.assign(element_count(shape_), fill);
  }

  BasicTensor(Shape shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    check_extents(shape_);
    if (data_.size() != element_count(shape_)) {
      throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                       " does not match shape " + to_string(shape_));
    }
  }

  static BasicTensor zeros(Shape shape) { return BasicTensor(std::move(shape)); }
  static BasicTensor zeros_like(const BasicTensor& other) {
    return other.empty() ? BasicTensor() : BasicTensor(other.shape_);
  }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t extent(std::size_t axis) const {
    if (axis >= shape_.size()) {
      throw std::out_of_range("axis " + std::to_string(axis) +
                              " out of range for rank " +
                              std::to_string(shape_.size()));
    }
    return shape_[axis];
  }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return shape_.empty(); }

  std::span<T> values() noexcept { return data_; }
  std::span<const T> values() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  // Unchecked flat access.
  T& operator[](std::size_t flat) noexcept { return data_[flat]; }
  const T& operator[](std::size_t flat) const noexcept { return data_[flat]; }

  /// Row-major offset of a multi-index; throws std::out_of_range.
  std::size_t offset(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
      throw std::out_of_range("index rank " + std::to_string(index.size()) +
                              " != tensor rank " +
                              std::to_string(shape_.size()));
    }
    std::size_t flat = 0;
    for (std::size_t axis = 0; axis < shape_.size(); ++axis) {
      if (index[axis] >= shape_[axis]) {
        throw std::out_of_range("index " + std::to_string(index[axis]) +
                                " out of bounds on axis " +
                                std::to_string(axis) + " of shape " +
                                to_string(shape_));
      }
      flat = flat * shape_[axis] + index[axis];
    }
    return flat;
  }

  T& at(std::initializer_list<std::size_t> index) {
    return data_[offset({index.begin(), index.size()})];
  }
  const T& at(std::initializer_list<std::size_t> index) const {
    return data_[offset({index.begin(), index.size()})];
  }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }

  BasicTensor reshaped(Shape shape) const {
    return BasicTensor(std::move(shape), data_);
  }

  bool operator==(const BasicTensor&) const = default;

 private:
  static void check_extents(const Shape& shape) {
    if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
    for (std::size_t e : shape) {
      if (e == 0) {
        throw ShapeError("tensor extents must be >= 1, got " +
                         to_string(shape));
      }
    }
  }

  Shape shape_;
  std::vector<T> data_;
};

using Tensor = BasicTensor<double>;
using ByteTensor = BasicTensor<std::uint8_t>;

/// Throws ShapeError unless `t` has rank `rank`.
template <typename T>
void require_rank(const BasicTensor<T>& t, std::size_t rank,
                  const char* what) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(what) + ": expected rank " +
                     std::to_string(rank) + ", got shape " +
                     to_string(t.shape()));
  }
}

/// Copies frame `t` of a [T, ...] sequence.
template <typename T>
BasicTensor<T> frame(const BasicTensor<T>& sequence, std::size_t t) {
  if (sequence.rank() < 2 || t >= sequence.extent(0)) {
    throw std::out_of_range("frame index " + std::to_string(t) +
                            " out of range for shape " +
                            to_string(sequence.shape()));
  }
  Shape shape(sequence.shape().begin() + 1, sequence.shape().end());
  const std::size_t n = element_count(shape);
  std::vector<T> data(sequence.data() + t * n, sequence.data() + (t + 1) * n);
  return BasicTensor<T>(std::move(shape), std::move(data));
}

/// Stacks equally shaped frames along a new leading axis.
template <typename T>
BasicTensor<T> stack_frames(std::span<const BasicTensor<T>> frames) {
  if (frames.empty()) throw ShapeError("stack_frames: no frames");
  Shape shape{frames.size()};
  shape.insert(shape.end(), frames[0].shape().begin(), frames[0].shape().end());
  std::vector<T> data;
  data.reserve(element_count(shape));
  for (const auto& f : frames) {
    if (f.shape() != frames[0].shape()) {
      throw ShapeError("stack_frames: frame shape " + to_string(f.shape()) +
                       " != " + to_string(frames[0].shape()));
    }
    data.insert(data.end(), f.values().begin(), f.values().end());
  }
  return BasicTensor<T>(std::move(shape), std::move(data));
}

}  // namespace tae
