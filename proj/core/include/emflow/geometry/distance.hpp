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

#include <vector>

#include "emflow/volume/grid.hpp"

namespace emflow::geometry {

/// Exact Euclidean distance from each nonzero voxel of `mask` to the nearest
/// zero voxel, in the units of `voxel_size`. Voxels outside the grid count
/// as zero. Zero voxels get 0.
std::vector<double> distance_to_background(const volume::Grid3<std::uint8_t>& mask, Vec3d voxel_size);

}  // namespace emflow::geometry
