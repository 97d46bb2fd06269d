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

/// One physical section imaged as a rows x cols grid of overlapping tiles.
/// Tile paths are row-major.
struct SectionManifest {
  std::int64_t section_index = 0;
  std::vector<std::filesystem::path> tile_paths;
  int rows = 1;
  int cols = 1;
  double nominal_overlap_frac = 0.0;

  void validate() const;
  std::size_t tile_count() const { return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols); }
};

void to_json(nlohmann::json& j, const SectionManifest& m);
void from_json(const nlohmann::json& j, SectionManifest& m);

SectionManifest load_section_manifest(const std::filesystem::path& path);
void save_section_manifest(const std::filesystem::path& path, const SectionManifest& m);

/// Integer placement of a tile's top-left corner in a shared frame.
struct TileOffset {
  std::int64_t x = 0;
  std::int64_t y = 0;
  friend bool operator==(const TileOffset&, const TileOffset&) = default;
};

/// Loads every tile of a section. Throws NotFound naming the missing path.
std::vector<GrayImage> load_tiles(const SectionManifest& manifest);

/// Composites placed tiles onto a canvas sized to their bounding box.
///
/// Where tiles overlap, each contributes with a weight that grows linearly
/// with its distance from its own border, so seams fade across the band.
GrayImage composite_tiles(const std::vector<GrayImage>& tiles, const std::vector<TileOffset>& offsets);

/// Loads a section's tiles from disk and composites them.
GrayImage import_section(const SectionManifest& manifest, const std::vector<TileOffset>& offsets);

}  // namespace emflow::volume
