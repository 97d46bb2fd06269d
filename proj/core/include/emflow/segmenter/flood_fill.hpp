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

#include "emflow/segmenter/types.hpp"

namespace emflow::segmenter {

/// Seeds on a lattice: every voxel whose global coordinate is a multiple of
/// `spacing` on all three axes. `origin` is the subvolume's global offset,
/// so neighbouring subvolumes share one lattice. spacing 1 seeds every voxel.
struct GridSeeds {
  std::int64_t spacing = 8;
  Vec3i origin;
};

/// Deterministic seeded flood fill. Seeds are visited in order; each one
/// that lands on an unlabeled, unmasked voxel with intensity >= t_low grows
/// the next label (1, 2, ...) over 6-connected voxels satisfying the same
/// test. Labeled voxels are never relabeled. `mask` may be null.
LabelGrid flood_fill_segment(const GrayGrid& gray, const LabelGrid* mask, const SeedList& seeds, std::uint8_t t_low);
LabelGrid flood_fill_segment(const GrayGrid& gray, const LabelGrid* mask, const GridSeeds& policy,
                             std::uint8_t t_low);

/// 6-connected components of nonzero voxels, numbered in scan order.
LabelGrid connected_components(const volume::Grid3<std::uint8_t>& binary);

}  // namespace emflow::segmenter
