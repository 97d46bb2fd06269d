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

#include <optional>

#include "emflow/segmenter/types.hpp"

namespace emflow::segmenter {

/// Box blur (window 2r+1 per axis, clamped to the volume) followed by an
/// optional inversion 255 - v, so dark cell interiors become likely.
ProbabilityMap intensity_proxy_probability(const GrayGrid& gray, int blur_radius, bool invert);

/// Seeded priority flood over 6-connected voxels whose probability is at
/// least `floor`. Voxels are claimed in decreasing probability order
/// (first-in-first-out among equals) by the label of the voxel that reached
/// them. Seeds without an explicit label get 1-based list positions.
///
/// Throws InvalidArgument for an empty seed list and for any seed below the
/// floor, naming the seed.
LabelGrid watershed3d(const ProbabilityMap& prob, const SeedList& seeds, double floor);

/// One seed per 6-connected component of voxels with probability >=
/// `threshold` and at least `min_voxels` voxels, placed at the component's
/// most probable voxel (lowest linear index on ties). Components are listed
/// in order of their first voxel.
SeedList auto_seeds(const ProbabilityMap& prob, double threshold, std::size_t min_voxels = 1,
                    std::optional<SeedKind> kind = std::nullopt);

/// Overlays mask objects on a segmentation: each voxel with mask label m > 0
/// becomes reserve_base + m, others keep their segment label. reserve_base
/// defaults to the largest segment label; an explicit base below it would
/// collide with segment ids and throws.
LabelGrid apply_mask(const LabelGrid& segmentation, const LabelGrid& mask,
                     std::optional<std::uint32_t> reserve_base = std::nullopt);

}  // namespace emflow::segmenter
