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

#include "emflow/segmenter/subvolume.hpp"

#include <algorithm>
#include <cstdlib>

namespace emflow::segmenter {

std::vector<std::int64_t> grid_positions(std::int64_t dim, std::int64_t cube, std::int64_t overlap) {
  if (dim < 1) throw InvalidArgument("volume dims must be positive");
  if (cube <= overlap || overlap < 0) throw InvalidArgument("cube must exceed overlap and overlap must be >= 0");
  if (dim <= cube) return {0};
  const std::int64_t stride = cube - overlap;
  std::vector<std::int64_t> out;
  for (std::int64_t p = 0; p + cube < dim; p += stride) out.push_back(p);
  const std::int64_t last = dim - cube;
  if (out.empty() || out.back() != last) out.push_back(last);
  return out;
}

std::vector<SubvolumeSpec> generate_grid(Vec3i volume_dims, Vec3i cube_dims, Vec3i overlap) {
  std::vector<std::int64_t> pos[3];
  for (int a = 0; a < 3; ++a) {
    if (cube_dims[a] <= overlap[a]) {
      throw InvalidArgument(std::string("cube must exceed overlap on axis ") + kAxisNames[static_cast<std::size_t>(a)]);
    }
    pos[a] = grid_positions(volume_dims[a], cube_dims[a], overlap[a]);
  }
  const Vec3i dims{std::min(cube_dims.x, volume_dims.x), std::min(cube_dims.y, volume_dims.y),
                   std::min(cube_dims.z, volume_dims.z)};
  std::vector<SubvolumeSpec> out;
  out.reserve(pos[0].size() * pos[1].size() * pos[2].size());
  for (std::size_t i = 0; i < pos[0].size(); ++i)
    for (std::size_t j = 0; j < pos[1].size(); ++j)
      for (std::size_t k = 0; k < pos[2].size(); ++k)
        out.push_back({{static_cast<std::int64_t>(i), static_cast<std::int64_t>(j), static_cast<std::int64_t>(k)},
                       {pos[0][i], pos[1][j], pos[2][k]},
                       dims,
                       overlap});
  return out;
}

bool intersect(const SubvolumeSpec& a, const SubvolumeSpec& b, Vec3i& lo, Vec3i& hi) {
  for (int ax = 0; ax < 3; ++ax) {
    lo[ax] = std::max(a.offset[ax], b.offset[ax]);
    hi[ax] = std::min(a.end()[ax], b.end()[ax]);
    if (hi[ax] <= lo[ax]) return false;
  }
  return true;
}

bool face_adjacent(const SubvolumeSpec& a, const SubvolumeSpec& b) {
  int differing = 0;
  for (int ax = 0; ax < 3; ++ax) {
    const auto d = std::llabs(a.index[ax] - b.index[ax]);
    if (d > 1) return false;
    differing += static_cast<int>(d);
  }
  return differing == 1;
}

}  // namespace emflow::segmenter
