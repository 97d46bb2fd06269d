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

#include "emflow/segmenter/mask.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>

#include "neighborhood.hpp"

namespace emflow::segmenter {
namespace {

std::uint8_t floor_level(double floor) {
  if (!(floor >= 0.0 && floor <= 1.0)) throw InvalidArgument("probability floor must be in [0,1]");
  return static_cast<std::uint8_t>(std::ceil(floor * 255.0 - 1e-9));
}

// Running box sum along one axis with the window clamped to the volume.
void blur_axis(std::vector<double>& data, const Vec3i& dims, int axis, int r) {
  const std::int64_t n = dims[axis];
  const std::int64_t stride = axis == 0 ? 1 : axis == 1 ? dims.x : dims.x * dims.y;
  std::vector<double> line(static_cast<std::size_t>(n)), prefix(static_cast<std::size_t>(n + 1));
  const Vec3i outer{axis == 0 ? 1 : dims.x, axis == 1 ? 1 : dims.y, axis == 2 ? 1 : dims.z};
  for (std::int64_t z = 0; z < outer.z; ++z)
    for (std::int64_t y = 0; y < outer.y; ++y)
      for (std::int64_t x = 0; x < outer.x; ++x) {
        const std::int64_t base = x + dims.x * (y + dims.y * z);
        prefix[0] = 0;
        for (std::int64_t i = 0; i < n; ++i) {
          prefix[static_cast<std::size_t>(i + 1)] = prefix[static_cast<std::size_t>(i)] +
                                                    data[static_cast<std::size_t>(base + i * stride)];
        }
        for (std::int64_t i = 0; i < n; ++i) {
          const std::int64_t lo = std::max<std::int64_t>(0, i - r), hi = std::min(n, i + r + 1);
          line[static_cast<std::size_t>(i)] =
              (prefix[static_cast<std::size_t>(hi)] - prefix[static_cast<std::size_t>(lo)]) /
              static_cast<double>(hi - lo);
        }
        for (std::int64_t i = 0; i < n; ++i) data[static_cast<std::size_t>(base + i * stride)] = line[static_cast<std::size_t>(i)];
      }
}

}  // namespace

ProbabilityMap intensity_proxy_probability(const GrayGrid& gray, int blur_radius, bool invert) {
  if (blur_radius < 0) throw InvalidArgument("blur_radius must be >= 0");
  std::vector<double> data(gray.data().begin(), gray.data().end());
  if (blur_radius > 0) {
    for (int axis = 0; axis < 3; ++axis) blur_axis(data, gray.dims(), axis, blur_radius);
  }
  ProbabilityMap out{GrayGrid(gray.dims(), gray.voxel_size()), ProbabilitySource::intensity_proxy};
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = std::clamp(std::floor(data[i] + 0.5), 0.0, 255.0);
    out.grid[i] = static_cast<std::uint8_t>(invert ? 255.0 - v : v);
  }
  return out;
}

LabelGrid watershed3d(const ProbabilityMap& prob, const SeedList& seeds, double floor) {
  const std::uint8_t level = floor_level(floor);
  const auto& g = prob.grid;
  if (seeds.empty()) throw InvalidArgument("watershed3d needs at least one seed");
  validate_seeds(seeds, g.dims());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& p = seeds[i].position;
    const std::uint8_t v = g(p.x, p.y, p.z);
    if (v < level) {
      throw InvalidArgument("seed " + std::to_string(i) + " at " + to_string(p) + " has probability " +
                            std::to_string(ProbabilityMap::to_probability(v)) + " below the floor " +
                            std::to_string(floor));
    }
  }

  LabelGrid labels(g.dims(), g.voxel_size());
  std::array<std::deque<std::size_t>, 256> buckets;
  int top = -1;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    const auto& p = seeds[i].position;
    const auto idx = g.index(p.x, p.y, p.z);
    if (labels[idx] != 0) continue;
    labels[idx] = seeds[i].label ? *seeds[i].label : static_cast<std::uint32_t>(i + 1);
    buckets[g[idx]].push_back(idx);
    top = std::max<int>(top, g[idx]);
  }
  while (top >= 0) {
    auto& bucket = buckets[static_cast<std::size_t>(top)];
    if (bucket.empty()) {
      --top;
      continue;
    }
    const std::size_t idx = bucket.front();
    bucket.pop_front();
    const std::uint32_t lab = labels[idx];
    detail::for_each_face_neighbor(g.dims(), idx, [&](std::size_t n) {
      if (labels[n] != 0 || g[n] < level) return;
      labels[n] = lab;
      buckets[g[n]].push_back(n);
      top = std::max<int>(top, g[n]);
    });
  }
  return labels;
}

SeedList auto_seeds(const ProbabilityMap& prob, double threshold, std::size_t min_voxels,
                    std::optional<SeedKind> kind) {
  const std::uint8_t level = floor_level(threshold);
  const auto& g = prob.grid;
  std::vector<std::uint8_t> seen(g.size(), 0);
  std::vector<std::size_t> stack;
  SeedList out;
  for (std::size_t start = 0; start < g.size(); ++start) {
    if (seen[start] || g[start] < level) continue;
    std::size_t count = 0, best = start;
    seen[start] = 1;
    stack.push_back(start);
    while (!stack.empty()) {
      const auto idx = stack.back();
      stack.pop_back();
      ++count;
      if (g[idx] > g[best] || (g[idx] == g[best] && idx < best)) best = idx;
      detail::for_each_face_neighbor(g.dims(), idx, [&](std::size_t n) {
        if (seen[n] || g[n] < level) return;
        seen[n] = 1;
        stack.push_back(n);
      });
    }
    if (count >= min_voxels) out.push_back({g.coord(best), std::nullopt, kind});
  }
  return out;
}

LabelGrid apply_mask(const LabelGrid& segmentation, const LabelGrid& mask, std::optional<std::uint32_t> reserve_base) {
  if (segmentation.dims() != mask.dims()) throw InvalidArgument("mask dims differ from segmentation dims");
  std::uint32_t max_seg = 0, max_mask = 0;
  for (auto v : segmentation.data()) max_seg = std::max(max_seg, v);
  for (auto v : mask.data()) max_mask = std::max(max_mask, v);
  const std::uint32_t base = reserve_base.value_or(max_seg);
  if (base < max_seg) {
    throw Conflict("reserved id base " + std::to_string(base) + " collides with segment ids up to " +
                   std::to_string(max_seg));
  }
  if (static_cast<std::uint64_t>(base) + max_mask > std::numeric_limits<std::uint32_t>::max()) {
    throw InvalidArgument("reserved mask ids overflow 32-bit labels");
  }
  LabelGrid out = segmentation;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (mask[i] != 0) out[i] = base + mask[i];
  }
  return out;
}

}  // namespace emflow::segmenter
