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

#include <cstdint>
#include <vector>

#include "emflow/volume/grid.hpp"

namespace emflow::sim {

using volume::GrayGrid;

/// Axis-aligned ellipsoid: voxel v is inside when
/// sum(((v - center) / radii)^2) <= 1.
struct Ellipsoid {
  Vec3d center;
  Vec3d radii;

  Vec3i bbox_lo() const;
  Vec3i bbox_hi() const;  // exclusive
  bool contains(std::int64_t x, std::int64_t y, std::int64_t z) const;
};

/// Background `bg`, ellipsoid voxels `fg`.
GrayGrid render_ellipsoids(Vec3i dims, const std::vector<Ellipsoid>& blobs, std::uint8_t fg, std::uint8_t bg);

/// Up to `count` ellipsoids with radii in [r_min, r_max] placed inside the
/// volume; bounding boxes stay at least `gap` voxels apart, so the blobs
/// never touch. Placement gives up on a blob after 200 rejected draws.
std::vector<Ellipsoid> random_ellipsoids(Vec3i dims, std::size_t count, double r_min, double r_max,
                                         std::int64_t gap, std::uint64_t seed);

}  // namespace emflow::sim
