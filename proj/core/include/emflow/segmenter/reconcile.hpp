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

#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/segmenter/types.hpp"

namespace emflow::segmenter {

struct MergeParams {
  double merge_frac = 0.5;
  std::uint64_t merge_min_voxels = 10;
};

/// (subvolume position in the input list, local label).
struct MergeNode {
  std::size_t subvolume = 0;
  std::uint32_t label = 0;
  friend auto operator<=>(const MergeNode&, const MergeNode&) = default;
};

struct MergeEdge {
  MergeNode a;
  MergeNode b;
  std::uint64_t agreement = 0;
  std::size_t overlap_region = 0;  // index into MergeGraph::regions
  bool merged = false;
};

struct MergeGraph {
  std::vector<SubvolumeSpec> subvolumes;           // sorted by index
  std::vector<MergeNode> nodes;                    // ascending
  std::vector<MergeEdge> edges;                    // every co-occurring pair
  std::vector<std::pair<std::size_t, std::size_t>> regions;  // face-adjacent subvolume pairs
  std::vector<std::uint32_t> global_ids;           // parallel to nodes
};

void to_json(nlohmann::json& j, const MergeGraph& g);

struct Reconciled {
  LabelGrid labels;
  MergeGraph graph;
};

using LabeledSubvolume = std::pair<SubvolumeSpec, LabelGrid>;

/// Merges per-subvolume label maps into one volume.
///
/// For every face-adjacent pair the shared overlap is scanned and label
/// pairs that co-occur on at least merge_min_voxels voxels, and on at least
/// merge_frac of the smaller label's overlap voxel count, are unioned.
/// Global ids number the union-find classes from 1 in ascending order of
/// their smallest (subvolume index, local label) member. Each voxel takes
/// its value from the covering subvolume with the smallest index. The
/// result does not depend on the order of `parts`.
///
/// Throws InvalidArgument when the specs are not exactly the cubes of one
/// generate_grid call.
Reconciled reconcile(std::vector<LabeledSubvolume> parts, const MergeParams& params = {});

/// Canonical relabeling: labels renumbered 1.. in order of first occurrence
/// in scan order. Two label maps are equal up to permutation iff their
/// canonical forms are equal.
LabelGrid canonical_labels(const LabelGrid& labels);

}  // namespace emflow::segmenter
