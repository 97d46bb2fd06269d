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

#include <cstddef>

#include "emflow/types.hpp"

namespace emflow::segmenter::detail {

/// Calls f(neighbor_index) for each in-bounds 6-connected neighbour of the
/// voxel at linear index `idx` (x-fastest layout).
template <class F>
inline void for_each_face_neighbor(const Vec3i& dims, std::size_t idx, F&& f) {
  const auto sx = static_cast<std::size_t>(dims.x);
  const auto sxy = sx * static_cast<std::size_t>(dims.y);
  const auto x = static_cast<std::int64_t>(idx % sx);
  const auto y = static_cast<std::int64_t>((idx / sx) % static_cast<std::size_t>(dims.y));
  const auto z = static_cast<std::int64_t>(idx / sxy);
  if (x > 0) f(idx - 1);
  if (x + 1 < dims.x) f(idx + 1);
  if (y > 0) f(idx - sx);
  if (y + 1 < dims.y) f(idx + sx);
  if (z > 0) f(idx - sxy);
  if (z + 1 < dims.z) f(idx + sxy);
}

}  // namespace emflow::segmenter::detail
