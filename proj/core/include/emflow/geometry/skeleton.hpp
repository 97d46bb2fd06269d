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
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "emflow/volume/grid.hpp"

namespace emflow::geometry {

struct SkeletonNode {
  Vec3d position;  // nanometers
  double radius = 0.0;
  friend bool operator==(const SkeletonNode&, const SkeletonNode&) = default;
};

/// Point graph of one object; edges form a forest.
struct Skeleton {
  std::vector<SkeletonNode> nodes;
  std::vector<std::array<std::uint32_t, 2>> edges;
  std::uint32_t object_id = 0;

  /// Index range, radius sign and acyclicity.
  void validate() const;
  std::vector<std::size_t> degrees() const;
  friend bool operator==(const Skeleton&, const Skeleton&) = default;
};

struct TeasarParams {
  double scale = 5000.0;
  double exponent = 16.0;
  double invalidation_radius_factor = 2.0;
  double min_path_length = 10.0;  // nanometers

  void validate() const;
};

/// TEASAR skeleton of `labels == object_id`.
///
/// The distance-from-boundary field (DBF) treats everything outside the
/// object, including outside the volume, as boundary. The root is the voxel
/// geodesically farthest from the first object voxel in scan order; each
/// new target is the unvisited voxel farthest from the root. Among voxels
/// within one maximum DBF of such an extreme voxel (and at least as far
/// minus that distance), the most central one is taken, so paths end on the
/// medial axis rather than on the surface. Paths follow the cheapest
/// 26-connected route under the per-step cost
/// length * (scale * (1 - DBF / maxDBF)^exponent + 1e-3), all from one
/// shortest-path tree rooted at the root, so the union is a tree. Voxels
/// within invalidation_radius_factor * DBF of a path voxel are marked
/// visited. Branches shorter than min_path_length are dropped.
///
/// Throws NotFound when the object is absent.
Skeleton teasar_skeletonize(const volume::LabelGrid& labels, std::uint32_t object_id, const TeasarParams& params,
                            Vec3d voxel_size);

/// Collapses every unbranched chain between nodes of degree != 2 to the
/// nodes a Douglas-Peucker pass keeps at `tolerance` (nanometers).
Skeleton simplify_skeleton(const Skeleton& skeleton, double tolerance);

void to_json(nlohmann::json& j, const Skeleton& s);
void from_json(const nlohmann::json& j, Skeleton& s);

/// JSON {"object_id", "nodes": [[x,y,z,r]...], "edges": [[a,b]...]}.
void export_skeleton(const Skeleton& skeleton, const std::filesystem::path& path);
Skeleton import_skeleton(const std::filesystem::path& path);

}  // namespace emflow::geometry
