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

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/workflow/app.hpp"
#include "emflow/workflow/dataset.hpp"

namespace emflow::workflow {

/// Pipeline stages in dependency order.
inline constexpr std::array<const char*, 8> kStageNames = {"montage", "align",     "relax", "mask",
                                                           "segment", "reconcile", "mesh",  "skeletonize"};

/// Default parameters of every stage, keyed by stage name.
nlohmann::json default_stage_params();

/// Defaults of `stage` merge-patched with `overrides`. Throws InvalidArgument
/// for an unknown stage or parameter name.
nlohmann::json stage_params(const std::string& stage, const nlohmann::json& overrides);

// Each stage reads its inputs from the dataset layout, writes its outputs
// there and returns a JSON report. The same functions back the standalone
// CLI subcommands and the pipeline apps.

/// Montages one section into montage/<s>.png. Throws Error after writing
/// the report when the size check fails.
nlohmann::json run_montage_stage(const DatasetLayout& layout, std::int64_t section, const nlohmann::json& params);

/// Block-matches montaged section b against section a.
nlohmann::json run_align_stage(const DatasetLayout& layout, std::int64_t a, std::int64_t b,
                               const nlohmann::json& params);

/// Relaxes the chained spring meshes over `sections` and renders the aligned
/// gray volume (z = position in `sections`).
nlohmann::json run_relax_stage(const DatasetLayout& layout, const std::vector<std::int64_t>& sections,
                               const nlohmann::json& params);

/// Watershed mask of cell bodies and vessels from the intensity proxy.
/// Seeds come from seeds.json when present, else from auto_seeds.
/// Zero-valued voxels lie outside the imaged area and get probability 0.
nlohmann::json run_mask_stage(const DatasetLayout& layout, const nlohmann::json& params);

/// Flood-fills one cube of the subvolume grid, excluding masked voxels.
nlohmann::json run_segment_stage(const DatasetLayout& layout, Vec3i index, const nlohmann::json& params);

/// Reconciles every cube into volumes/segmentation and overlays the mask.
nlohmann::json run_reconcile_stage(const DatasetLayout& layout, const nlohmann::json& params);

/// One OBJ per object with at least min_voxels voxels.
nlohmann::json run_mesh_stage(const DatasetLayout& layout, const nlohmann::json& params);

/// One TEASAR skeleton per object with at least min_voxels voxels.
nlohmann::json run_skeletonize_stage(const DatasetLayout& layout, const nlohmann::json& params);

/// Subvolume grid of the aligned volume for the given segment params.
std::vector<Vec3i> subvolume_indices(Vec3i volume_dims, const nlohmann::json& segment_params);

/// One app per stage. Job args carry "root", "params" and the unit:
/// "section" (montage), "pair" [a, b] (align), "sections" (relax) or
/// "index" [i, j, k] (segment).
AppRegistry pipeline_apps();

/// Granularity of each stage app.
Granularity stage_granularity(const std::string& stage);

}  // namespace emflow::workflow
