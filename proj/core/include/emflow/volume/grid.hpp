// Copyright 2026 The emflow Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
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
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "emflow/types.hpp"

namespace emflow::volume {

enum class DType : std::uint8_t { gray8, label32 };

std::string_view dtype_name(DType dtype);
DType parse_dtype(std::string_view name);
std::size_t dtype_bytes(DType dtype);

template <class T>
constexpr DType dtype_of();
template <>
constexpr DType dtype_of<std::uint8_t>() { return DType::gray8; }
template <>
constexpr DType dtype_of<std::uint32_t>() { return DType::label32; }

/// Dense 3D voxel array, x-fastest.
template <class T>
class Grid3 {
 public:
  using value_type = T;

  Grid3() = default;
  explicit Grid3(Vec3i dims, Vec3d voxel_size = {1.0, 1.0, 1.0}, T fill = T{})
      : dims_(dims), voxel_size_(voxel_size) {
    if (dims.x < 1 || dims.y < 1 || dims.z < 1) {
      throw InvalidArgument("grid dims must be >= 1 on every axis, got " + to_string(dims));
    }
    if (voxel_size.x <= 0 || voxel_size.y <= 0 || voxel_size.z <= 0) {
      throw InvalidArgument("voxel_size components must be > 0");
    }
    data_.assign(static_cast<std::size_t>(dims.volume()), fill);
  }

  const Vec3i& dims() const { return dims_; }
  const Vec3d& voxel_size() const { return voxel_size_; }
  void set_voxel_size(Vec3d vs) { voxel_size_ = vs; }
  static constexpr DType dtype() { return dtype_of<T>(); }

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::size_t index(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return static_cast<std::size_t>((z * dims_.y + y) * dims_.x + x);
  }
  Vec3i coord(std::size_t idx) const {
    auto i = static_cast<std::int64_t>(idx);
    return {i % dims_.x, (i / dims_.x) % dims_.y, i / (dims_.x * dims_.y)};
  }
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
    return x >= 0 && y >= 0 && z >= 0 && x < dims_.x && y < dims_.y && z < dims_.z;
  }

  T& operator()(std::int64_t x, std::int64_t y, std::int64_t z) { return data_[index(x, y, z)]; }
  T operator()(std::int64_t x, std::int64_t y, std::int64_t z) const { return data_[index(x, y, z)]; }
  T& operator[](std::size_t i) { return data_[i]; }
  T operator[](std::size_t i) const { return data_[i]; }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }
  std::vector<T>& storage() { return data_; }

  friend bool operator==(const Grid3& a, const Grid3& b) {
    return a.dims_ == b.dims_ && a.data_ == b.data_;
  }

 private:
  Vec3i dims_{};
  Vec3d voxel_size_{1.0, 1.0, 1.0};
  std::vector<T> data_;
};

using GrayGrid = Grid3<std::uint8_t>;
using LabelGrid = Grid3<std::uint32_t>;
using VoxelGrid = std::variant<GrayGrid, LabelGrid>;

DType dtype_of(const VoxelGrid& grid);
Vec3i dims_of(const VoxelGrid& grid);

/// Dense 2D raster, x-fastest.
template <class T>
class Image {
 public:
  using value_type = T;

  Image() = default;
  Image(std::int64_t width, std::int64_t height, T fill = T{}) : width_(width), height_(height) {
    if (width < 0 || height < 0) throw InvalidArgument("negative image size");
    data_.assign(static_cast<std::size_t>(width * height), fill);
  }

  std::int64_t width() const { return width_; }
  std::int64_t height() const { return height_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool contains(std::int64_t x, std::int64_t y) const {
    return x >= 0 && y >= 0 && x < width_ && y < height_;
  }

  T& operator()(std::int64_t x, std::int64_t y) { return data_[static_cast<std::size_t>(y * width_ + x)]; }
  T operator()(std::int64_t x, std::int64_t y) const {
    return data_[static_cast<std::size_t>(y * width_ + x)];
  }

  std::span<T> data() { return data_; }
  std::span<const T> data() const { return data_; }

  friend bool operator==(const Image& a, const Image& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.data_ == b.data_;
  }

 private:
  std::int64_t width_ = 0;
  std::int64_t height_ = 0;
  std::vector<T> data_;
};

using GrayImage = Image<std::uint8_t>;
using FloatImage = Image<float>;

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};
using RgbImage = Image<Rgb>;

/// Copies plane z of a grid into a 2D image.
template <class T>
Image<T> slice_z(const Grid3<T>& grid, std::int64_t z) {
  Image<T> out(grid.dims().x, grid.dims().y);
  for (std::int64_t y = 0; y < grid.dims().y; ++y)
    for (std::int64_t x = 0; x < grid.dims().x; ++x) out(x, y) = grid(x, y, z);
  return out;
}

/// Wraps a 2D image as a z=1 grid.
template <class T>
Grid3<T> as_grid(const Image<T>& image, Vec3d voxel_size = {1.0, 1.0, 1.0}) {
  Grid3<T> out({image.width(), image.height(), 1}, voxel_size);
  std::copy(image.data().begin(), image.data().end(), out.data().begin());
  return out;
}

}  // namespace emflow::volume
