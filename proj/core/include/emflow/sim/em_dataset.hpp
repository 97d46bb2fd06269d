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

#include "emflow/volume/section.hpp"
#include "emflow/workflow/dataset.hpp"

namespace emflow::sim {

struct EmDatasetParams {
  std::string name = "sim";
  int sections = 4;
  int rows = 1;
  int cols = 2;
  std::int64_t tile_width = 256;
  std::int64_t tile_height = 256;
  double overlap_frac = 0.05;
  int stage_jitter_px = 3;  // rigid per-section offset, uniform in +-
  int tile_jitter_px = 2;   // per-tile deviation from the nominal grid
  int neurites = 5;          // crossing the sections
  int lateral_neurites = 2;  // running within the sections
  double lateral_length = 150.0;
  double neurite_radius_min = 12.0;
  double neurite_radius_max = 20.0;
  double drift_px = 1.5;  // per-section lateral drift bound of a neurite
  bool vessel = true;
  double vessel_radius = 26.0;
  Vec3d voxel_size{4.0, 4.0, 40.0};
  std::uint64_t seed = 1;
};

/// Cross-section of one object: the set within `radius` of the segment
/// [a, b], translated by `drift` per section. a == b gives a disc.
struct Profile {
  Vec2d a;  // world pixels at section 0
  Vec2d b;
  Vec2d drift;
  double radius = 0.0;
  bool dark = false;  // vessel rather than neurite

  double distance(Vec2d p, std::int64_t section) const;
};

/// Synthetic microscope: bright neurites and an optional dark vessel
/// crossing every section over a textured background shared between
/// sections, imaged as jittered overlapping tiles.
class EmSimulator {
 public:
  explicit EmSimulator(EmDatasetParams params);

  const EmDatasetParams& params() const { return params_; }
  const std::vector<Profile>& profiles() const { return profiles_; }
  workflow::DatasetConfig config() const;
  std::int64_t world_width() const { return world_w_; }
  std::int64_t world_height() const { return world_h_; }

  volume::GrayImage world_section(std::int64_t section) const;
  /// World position of each tile's top-left corner, row-major.
  std::vector<volume::TileOffset> tile_positions(std::int64_t section) const;

  /// Writes the section's tiles and then its manifest (atomically renamed).
  volume::SectionManifest acquire(const workflow::DatasetLayout& layout, std::int64_t section) const;

 private:
  EmDatasetParams params_;
  std::vector<Profile> profiles_;
  std::int64_t margin_ = 0;
  std::int64_t world_w_ = 0;
  std::int64_t world_h_ = 0;
};

/// Creates the dataset directory and acquires every section.
workflow::DatasetLayout generate_em_dataset(const std::filesystem::path& root, const EmDatasetParams& params);

}  // namespace emflow::sim
