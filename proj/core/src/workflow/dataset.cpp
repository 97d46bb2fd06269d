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

#include "emflow/workflow/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "emflow/imageops/montage.hpp"

namespace emflow::workflow {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string pad4(std::int64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%04lld", static_cast<long long>(v));
  return buf;
}

}  // namespace

void DatasetConfig::validate() const {
  if (name.empty()) throw InvalidArgument("dataset name must not be empty");
  if (rows < 1 || cols < 1) throw InvalidArgument("dataset needs at least one tile row and column");
  if (tile_width < 1 || tile_height < 1) throw InvalidArgument("tile size must be positive");
  if (!(nominal_overlap_frac >= 0.0 && nominal_overlap_frac < 1.0)) {
    throw InvalidArgument("nominal_overlap_frac must be in [0,1)");
  }
  if (voxel_size.x <= 0 || voxel_size.y <= 0 || voxel_size.z <= 0) throw InvalidArgument("voxel size must be > 0");
  if (chunk_size.x < 1 || chunk_size.y < 1 || chunk_size.z < 1) throw InvalidArgument("chunk size must be >= 1");
}

std::pair<std::int64_t, std::int64_t> DatasetConfig::section_dims() const {
  return imageops::expected_canvas_dims(rows, cols, tile_width, tile_height, nominal_overlap_frac);
}

void to_json(json& j, const DatasetConfig& c) {
  j = {{"name", c.name},
       {"rows", c.rows},
       {"cols", c.cols},
       {"tile_width", c.tile_width},
       {"tile_height", c.tile_height},
       {"nominal_overlap_frac", c.nominal_overlap_frac},
       {"voxel_size", {c.voxel_size.x, c.voxel_size.y, c.voxel_size.z}},
       {"chunk_size", {c.chunk_size.x, c.chunk_size.y, c.chunk_size.z}}};
}

void from_json(const json& j, DatasetConfig& c) {
  c.name = j.at("name").get<std::string>();
  c.rows = j.at("rows").get<int>();
  c.cols = j.at("cols").get<int>();
  c.tile_width = j.at("tile_width").get<std::int64_t>();
  c.tile_height = j.at("tile_height").get<std::int64_t>();
  c.nominal_overlap_frac = j.at("nominal_overlap_frac").get<double>();
  const auto& vs = j.at("voxel_size");
  c.voxel_size = {vs.at(0).get<double>(), vs.at(1).get<double>(), vs.at(2).get<double>()};
  const auto& cs = j.at("chunk_size");
  c.chunk_size = {cs.at(0).get<std::int64_t>(), cs.at(1).get<std::int64_t>(), cs.at(2).get<std::int64_t>()};
}

fs::path DatasetLayout::section_dir(std::int64_t s) const { return root_ / "sections" / pad4(s); }
fs::path DatasetLayout::montage_image(std::int64_t s) const { return root_ / "montage" / (pad4(s) + ".png"); }
fs::path DatasetLayout::montage_report(std::int64_t s) const { return root_ / "montage" / (pad4(s) + ".json"); }

fs::path DatasetLayout::align_field(std::int64_t a, std::int64_t b) const {
  return root_ / "align" / (pad4(a) + "-" + pad4(b) + ".json");
}

fs::path DatasetLayout::subvolume_labels(Vec3i index) const {
  return root_ / "volumes" / "seg" /
         (std::to_string(index.x) + "-" + std::to_string(index.y) + "-" + std::to_string(index.z));
}

fs::path DatasetLayout::mesh(std::uint32_t id) const { return meshes_dir() / (std::to_string(id) + ".obj"); }
fs::path DatasetLayout::skeleton(std::uint32_t id) const {
  return skeletons_dir() / (std::to_string(id) + ".json");
}

DatasetConfig DatasetLayout::load_config() const {
  std::ifstream in(config_path());
  if (!in) throw NotFound("no dataset config at " + config_path().string());
  json j;
  try {
    in >> j;
    auto c = j.get<DatasetConfig>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw InvalidArgument("bad dataset config " + config_path().string() + ": " + e.what());
  }
}

void DatasetLayout::save_config(const DatasetConfig& c) const {
  c.validate();
  fs::create_directories(root_);
  std::ofstream out(config_path());
  out << json(c).dump(2) << "\n";
  if (!out) throw Error("cannot write " + config_path().string());
}

std::vector<std::int64_t> DatasetLayout::sections() const {
  std::vector<std::int64_t> out;
  const auto dir = root_ / "sections";
  if (!fs::is_directory(dir)) return out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.empty() || !std::all_of(name.begin(), name.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) continue;
    if (fs::exists(e.path() / "manifest.json")) out.push_back(std::stoll(name));
  }
  std::sort(out.begin(), out.end());
  return out;
}

DatasetLayout create_dataset(const fs::path& root, const DatasetConfig& config) {
  DatasetLayout layout(root);
  if (fs::exists(layout.config_path())) {
    if (json(layout.load_config()) != json(config)) {
      throw Conflict("dataset at " + root.string() + " already has a different config");
    }
    return layout;
  }
  layout.save_config(config);
  return layout;
}

}  // namespace emflow::workflow
