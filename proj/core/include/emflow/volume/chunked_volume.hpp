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

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/volume/grid.hpp"

namespace emflow::volume {

/// Contents of a dataset's `info.json`.
///
/// Level L+1 halves level L in x and y (rounding up); z is halved too when
/// `downsample_z` is set. Level 0 is full resolution.
struct ChunkedVolumeManifest {
  std::string dataset_name;
  DType dtype = DType::gray8;
  Vec3i chunk_size{64, 64, 64};
  int num_levels = 1;
  bool downsample_z = true;
  std::vector<Vec3i> dims;        // one entry per level
  std::vector<Vec3d> voxel_size;  // one entry per level

  /// Chunk grid extent at a level: ceil(dims / chunk_size) per axis.
  Vec3i chunk_grid(int level) const;
  void validate() const;

  friend bool operator==(const ChunkedVolumeManifest&, const ChunkedVolumeManifest&) = default;
};

/// Builds a manifest with derived per-level dims. When `num_levels` is 0 the
/// pyramid keeps halving until the largest dimension is <= 512.
ChunkedVolumeManifest make_manifest(std::string dataset_name, DType dtype, Vec3i dims,
                                    Vec3d voxel_size, Vec3i chunk_size = {64, 64, 64},
                                    int num_levels = 0, bool downsample_z = true);

/// Dims one level down from `dims`.
Vec3i next_level_dims(Vec3i dims, bool downsample_z);

void to_json(nlohmann::json& j, const ChunkedVolumeManifest& m);
void from_json(const nlohmann::json& j, ChunkedVolumeManifest& m);

enum class DownsampleMethod { mean, mode };

/// Handle to a chunked volume on disk.
///
/// Layout: `<root>/info.json` plus `<root>/<level>/<cx>-<cy>-<cz>.bin`, each
/// chunk holding raw little-endian voxels (x-fastest) clipped to the volume
/// bounds. Missing chunk files read as zeros. Concurrent writers must target
/// voxel-disjoint regions; chunk read-modify-write is serialized in-process.
class ChunkedVolume {
 public:
  /// Creates the dataset, or opens it if an identical manifest already exists.
  /// Throws Conflict when `root` holds a dataset with a different manifest.
  static ChunkedVolume create(const ChunkedVolumeManifest& manifest,
                              const std::filesystem::path& root);
  static ChunkedVolume open(const std::filesystem::path& root);
  static bool exists(const std::filesystem::path& root);

  const ChunkedVolumeManifest& manifest() const { return manifest_; }
  const std::filesystem::path& root() const { return root_; }
  Vec3i dims(int level = 0) const;

  void write_cutout(Vec3i offset, const VoxelGrid& grid, int level = 0);
  VoxelGrid read_cutout(Vec3i offset, Vec3i dims, int level = 0) const;

  template <class T>
  void write(Vec3i offset, const Grid3<T>& grid, int level = 0) {
    write_raw(offset, grid.dims(), dtype_of<T>(), grid.data().data(), level);
  }
  template <class T>
  Grid3<T> read(Vec3i offset, Vec3i dims, int level = 0) const {
    Grid3<T> out(dims, manifest_.voxel_size.at(static_cast<std::size_t>(level)));
    read_raw(offset, dims, dtype_of<T>(), out.data().data(), level);
    return out;
  }
  /// Whole level as a dense grid.
  template <class T>
  Grid3<T> read_level(int level = 0) const {
    return read<T>({0, 0, 0}, dims(level), level);
  }

  /// Populates level `source + 1` from `source`. Mean is only valid for gray8,
  /// mode only for label32.
  void downsample(int source, DownsampleMethod method);
  /// Downsamples every level in turn with the dtype's natural method.
  void build_pyramid();

  std::filesystem::path chunk_path(int level, Vec3i chunk_index) const;
  /// Chunk indices that intersect the box [offset, offset + dims) at a level.
  std::vector<Vec3i> chunks_intersecting(Vec3i offset, Vec3i dims, int level) const;

 private:
  ChunkedVolume(ChunkedVolumeManifest manifest, std::filesystem::path root)
      : manifest_(std::move(manifest)), root_(std::move(root)) {}

  void check_region(Vec3i offset, Vec3i dims, int level) const;
  void write_raw(Vec3i offset, Vec3i dims, DType dtype, const void* data, int level);
  void read_raw(Vec3i offset, Vec3i dims, DType dtype, void* data, int level) const;

  ChunkedVolumeManifest manifest_;
  std::filesystem::path root_;
};

}  // namespace emflow::volume
