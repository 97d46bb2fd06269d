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

#include "emflow/volume/section.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "emflow/volume/png_io.hpp"

namespace emflow::volume {
namespace fs = std::filesystem;
using nlohmann::json;

void SectionManifest::validate() const {
  if (section_index < 0) throw InvalidArgument("section_index must be >= 0");
  if (rows < 1 || cols < 1) throw InvalidArgument("section layout must be at least 1x1");
  if (tile_paths.size() != tile_count()) {
    throw InvalidArgument("section " + std::to_string(section_index) + " lists " +
                          std::to_string(tile_paths.size()) + " tiles for a " +
                          std::to_string(rows) + "x" + std::to_string(cols) + " layout");
  }
  if (!(nominal_overlap_frac >= 0.0 && nominal_overlap_frac < 1.0)) {
    throw InvalidArgument("nominal_overlap_frac must be in [0,1)");
  }
}

void to_json(json& j, const SectionManifest& m) {
  json paths = json::array();
  for (const auto& p : m.tile_paths) paths.push_back(p.string());
  j = json{{"section_index", m.section_index},
           {"tile_paths", paths},
           {"layout", json::array({m.rows, m.cols})},
           {"nominal_overlap_frac", m.nominal_overlap_frac}};
}

void from_json(const json& j, SectionManifest& m) {
  m.section_index = j.at("section_index").get<std::int64_t>();
  m.tile_paths.clear();
  for (const auto& p : j.at("tile_paths")) m.tile_paths.emplace_back(p.get<std::string>());
  m.rows = j.at("layout").at(0).get<int>();
  m.cols = j.at("layout").at(1).get<int>();
  m.nominal_overlap_frac = j.at("nominal_overlap_frac").get<double>();
}

SectionManifest load_section_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("missing section manifest '" + path.string() + "'");
  auto m = json::parse(in).get<SectionManifest>();
  // Relative tile paths are resolved against the manifest's directory.
  for (auto& p : m.tile_paths) {
    if (p.is_relative()) p = path.parent_path() / p;
  }
  m.validate();
  return m;
}

void save_section_manifest(const fs::path& path, const SectionManifest& m) {
  m.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path.string() + "'");
  out << json(m).dump(2) << "\n";
}

std::vector<GrayImage> load_tiles(const SectionManifest& manifest) {
  manifest.validate();
  std::vector<GrayImage> tiles;
  tiles.reserve(manifest.tile_paths.size());
  for (const auto& path : manifest.tile_paths) {
    if (!fs::exists(path)) throw NotFound("missing tile file '" + path.string() + "'");
    tiles.push_back(read_png_gray(path));
  }
  for (const auto& t : tiles) {
    if (t.width() != tiles.front().width() || t.height() != tiles.front().height()) {
      throw InvalidArgument("section " + std::to_string(manifest.section_index) +
                            " has tiles of different sizes");
    }
  }
  return tiles;
}

GrayImage composite_tiles(const std::vector<GrayImage>& tiles, const std::vector<TileOffset>& offsets) {
  if (tiles.empty()) throw InvalidArgument("no tiles to composite");
  if (tiles.size() != offsets.size()) throw InvalidArgument("one offset per tile required");
  std::int64_t min_x = std::numeric_limits<std::int64_t>::max(), min_y = min_x;
  std::int64_t max_x = std::numeric_limits<std::int64_t>::min(), max_y = max_x;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    min_x = std::min(min_x, offsets[i].x);
    min_y = std::min(min_y, offsets[i].y);
    max_x = std::max(max_x, offsets[i].x + tiles[i].width());
    max_y = std::max(max_y, offsets[i].y + tiles[i].height());
  }
  const std::int64_t width = max_x - min_x, height = max_y - min_y;
  std::vector<double> acc(static_cast<std::size_t>(width * height), 0.0);
  std::vector<double> weight(acc.size(), 0.0);
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const auto& tile = tiles[i];
    const std::int64_t ox = offsets[i].x - min_x, oy = offsets[i].y - min_y;
    for (std::int64_t y = 0; y < tile.height(); ++y) {
      const std::int64_t dy = std::min(y, tile.height() - 1 - y);
      for (std::int64_t x = 0; x < tile.width(); ++x) {
        const std::int64_t dx = std::min(x, tile.width() - 1 - x);
        const double w = static_cast<double>(std::min(dx, dy) + 1);
        const auto idx = static_cast<std::size_t>((oy + y) * width + ox + x);
        acc[idx] += w * tile(x, y);
        weight[idx] += w;
      }
    }
  }
  GrayImage canvas(width, height);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    if (weight[i] > 0) {
      canvas.data()[i] = static_cast<std::uint8_t>(std::clamp(std::floor(acc[i] / weight[i] + 0.5), 0.0, 255.0));
    }
  }
  return canvas;
}

GrayImage import_section(const SectionManifest& manifest, const std::vector<TileOffset>& offsets) {
  return composite_tiles(load_tiles(manifest), offsets);
}

}  // namespace emflow::volume
