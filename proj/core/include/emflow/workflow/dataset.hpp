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

#include "emflow/types.hpp"

namespace emflow::workflow {

/// Acquisition geometry shared by every section of a dataset, kept in
/// `<root>/dataset.json`.
struct DatasetConfig {
  std::string name;
  int rows = 1;
  int cols = 2;
  std::int64_t tile_width = 256;
  std::int64_t tile_height = 256;
  double nominal_overlap_frac = 0.05;
  Vec3d voxel_size{4.0, 4.0, 40.0};  // nm
  Vec3i chunk_size{64, 64, 16};

  void validate() const;
  /// Width and height every section is cropped or padded to after montage.
  std::pair<std::int64_t, std::int64_t> section_dims() const;
};

void to_json(nlohmann::json& j, const DatasetConfig& c);
void from_json(const nlohmann::json& j, DatasetConfig& c);

/// File layout of a dataset directory.
///
///   dataset.json                      DatasetConfig
///   sections/<ssss>/manifest.json     tiles as acquired
///   montage/<ssss>.png, <ssss>.json   stitched section and MontageReport
///   align/<ssss>-<tttt>.json          block-match field between neighbours
///   align/relax.json                  relaxation energies and residuals
///   volumes/aligned                   gray8 chunked volume
///   volumes/mask                      label32 mask volume
///   volumes/seg/<i>-<j>-<k>           per-subvolume labels
///   volumes/segmentation              reconciled label32 volume
///   merge_graph.json, seeds.json
///   meshes/<id>.obj, skeletons/<id>.json
class DatasetLayout {
 public:
  explicit DatasetLayout(std::filesystem::path root) : root_(std::move(root)) {}

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path config_path() const { return root_ / "dataset.json"; }
  std::filesystem::path section_dir(std::int64_t s) const;
  std::filesystem::path section_manifest(std::int64_t s) const { return section_dir(s) / "manifest.json"; }
  std::filesystem::path montage_image(std::int64_t s) const;
  std::filesystem::path montage_report(std::int64_t s) const;
  std::filesystem::path align_field(std::int64_t a, std::int64_t b) const;
  std::filesystem::path relax_report() const { return root_ / "align" / "relax.json"; }
  std::filesystem::path aligned_volume() const { return root_ / "volumes" / "aligned"; }
  std::filesystem::path mask_volume() const { return root_ / "volumes" / "mask"; }
  std::filesystem::path subvolume_labels(Vec3i index) const;
  std::filesystem::path segmentation() const { return root_ / "volumes" / "segmentation"; }
  std::filesystem::path merge_graph() const { return root_ / "merge_graph.json"; }
  std::filesystem::path seeds() const { return root_ / "seeds.json"; }
  std::filesystem::path mesh(std::uint32_t id) const;
  std::filesystem::path skeleton(std::uint32_t id) const;
  std::filesystem::path meshes_dir() const { return root_ / "meshes"; }
  std::filesystem::path skeletons_dir() const { return root_ / "skeletons"; }

  DatasetConfig load_config() const;
  void save_config(const DatasetConfig& c) const;

  /// Section indices with a manifest on disk, ascending.
  std::vector<std::int64_t> sections() const;

 private:
  std::filesystem::path root_;
};

/// Creates the directory and writes dataset.json. Throws Conflict when a
/// different config is already there.
DatasetLayout create_dataset(const std::filesystem::path& root, const DatasetConfig& config);

}  // namespace emflow::workflow
