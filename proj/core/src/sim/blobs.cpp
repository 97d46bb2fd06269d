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

#include "emflow/sim/blobs.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace emflow::sim {

Vec3i Ellipsoid::bbox_lo() const {
  return {static_cast<std::int64_t>(std::ceil(center.x - radii.x)),
          static_cast<std::int64_t>(std::ceil(center.y - radii.y)),
          static_cast<std::int64_t>(std::ceil(center.z - radii.z))};
}

Vec3i Ellipsoid::bbox_hi() const {
  return {static_cast<std::int64_t>(std::floor(center.x + radii.x)) + 1,
          static_cast<std::int64_t>(std::floor(center.y + radii.y)) + 1,
          static_cast<std::int64_t>(std::floor(center.z + radii.z)) + 1};
}

bool Ellipsoid::contains(std::int64_t x, std::int64_t y, std::int64_t z) const {
  const double dx = (static_cast<double>(x) - center.x) / radii.x;
  const double dy = (static_cast<double>(y) - center.y) / radii.y;
  const double dz = (static_cast<double>(z) - center.z) / radii.z;
  return dx * dx + dy * dy + dz * dz <= 1.0;
}

GrayGrid render_ellipsoids(Vec3i dims, const std::vector<Ellipsoid>& blobs, std::uint8_t fg, std::uint8_t bg) {
  GrayGrid out(dims, {1.0, 1.0, 1.0}, bg);
  for (const auto& b : blobs) {
    const auto lo = b.bbox_lo(), hi = b.bbox_hi();
    for (std::int64_t z = std::max<std::int64_t>(0, lo.z); z < std::min(dims.z, hi.z); ++z)
      for (std::int64_t y = std::max<std::int64_t>(0, lo.y); y < std::min(dims.y, hi.y); ++y)
        for (std::int64_t x = std::max<std::int64_t>(0, lo.x); x < std::min(dims.x, hi.x); ++x)
          if (b.contains(x, y, z)) out(x, y, z) = fg;
  }
  return out;
}

std::vector<Ellipsoid> random_ellipsoids(Vec3i dims, std::size_t count, double r_min, double r_max,
                                         std::int64_t gap, std::uint64_t seed) {
  if (!(r_min > 0 && r_max >= r_min)) throw InvalidArgument("radii must satisfy 0 < r_min <= r_max");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> radius(r_min, r_max);
  std::vector<Ellipsoid> out;
  auto separated = [gap](const Ellipsoid& a, const Ellipsoid& b) {
    const auto alo = a.bbox_lo(), ahi = a.bbox_hi(), blo = b.bbox_lo(), bhi = b.bbox_hi();
    for (int ax = 0; ax < 3; ++ax) {
      if (ahi[ax] + gap <= blo[ax] || bhi[ax] + gap <= alo[ax]) return true;
    }
    return false;
  };
  for (std::size_t n = 0; n < count; ++n) {
    for (int attempt = 0; attempt < 200; ++attempt) {
      Ellipsoid e;
      e.radii = {radius(rng), radius(rng), radius(rng)};
      bool fits = true;
      double c[3];
      for (int ax = 0; ax < 3; ++ax) {
        const double lo = e.radii[ax] + 1.0, hi = static_cast<double>(dims[ax]) - e.radii[ax] - 2.0;
        if (hi <= lo) {
          fits = false;
          break;
        }
        c[ax] = std::uniform_real_distribution<double>(lo, hi)(rng);
      }
      if (!fits) continue;
      e.center = {c[0], c[1], c[2]};
      if (std::all_of(out.begin(), out.end(), [&](const Ellipsoid& o) { return separated(e, o); })) {
        out.push_back(e);
        break;
      }
    }
  }
  return out;
}

}  // namespace emflow::sim
