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

#include "emflow/segmenter/types.hpp"

namespace emflow::segmenter {

/// Cube origins along one axis: 0, stride, 2*stride, ... with the last one
/// pulled back so the cube ends on the volume boundary. A volume shorter
/// than the cube yields the single origin 0.
std::vector<std::int64_t> grid_positions(std::int64_t dim, std::int64_t cube, std::int64_t overlap);

/// Overlapped cube grid covering `volume_dims`, ordered by index (x, then
/// y, then z). Cubes are clipped to the volume only on axes where the
/// volume is smaller than the cube.
std::vector<SubvolumeSpec> generate_grid(Vec3i volume_dims, Vec3i cube_dims, Vec3i overlap);

/// Intersection of two boxes given as [offset, offset + dims). Returns
/// false when they do not overlap.
bool intersect(const SubvolumeSpec& a, const SubvolumeSpec& b, Vec3i& lo, Vec3i& hi);

/// True when the indices differ by one along exactly one axis.
bool face_adjacent(const SubvolumeSpec& a, const SubvolumeSpec& b);

}  // namespace emflow::segmenter
