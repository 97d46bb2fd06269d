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

#include "emflow/geometry/distance.hpp"

#include <cmath>
#include <limits>

namespace emflow::geometry {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower envelope of parabolas w^2 (p - q)^2 + f(q) over a line.
void transform_line(const std::vector<double>& f, std::vector<double>& d, double w2, std::vector<std::int64_t>& v,
                    std::vector<double>& z) {
  const auto n = static_cast<std::int64_t>(f.size());
  std::int64_t k = -1;
  for (std::int64_t q = 0; q < n; ++q) {
    const double fq = f[static_cast<std::size_t>(q)];
    if (fq == kInf) continue;
    while (k >= 0) {
      const auto r = v[static_cast<std::size_t>(k)];
      const double fr = f[static_cast<std::size_t>(r)];
      const double s = ((fq + w2 * double(q) * double(q)) - (fr + w2 * double(r) * double(r))) / (2.0 * w2 * double(q - r));
      if (s <= z[static_cast<std::size_t>(k)]) {
        --k;
        continue;
      }
      ++k;
      v[static_cast<std::size_t>(k)] = q;
      z[static_cast<std::size_t>(k)] = s;
      break;
    }
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
    }
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  std::int64_t j = 0;
  for (std::int64_t p = 0; p < n; ++p) {
    while (j < k && z[static_cast<std::size_t>(j + 1)] < double(p)) ++j;
    const auto q = v[static_cast<std::size_t>(j)];
    d[static_cast<std::size_t>(p)] = w2 * double(p - q) * double(p - q) + f[static_cast<std::size_t>(q)];
  }
}

}  // namespace

std::vector<double> distance_to_background(const volume::Grid3<std::uint8_t>& mask, Vec3d vs) {
  if (!(vs.x > 0 && vs.y > 0 && vs.z > 0)) throw InvalidArgument("voxel_size components must be > 0");
  // one voxel of zero padding on every side stands in for the outside
  const auto& d = mask.dims();
  const Vec3i p{d.x + 2, d.y + 2, d.z + 2};
  auto at = [&](std::int64_t x, std::int64_t y, std::int64_t z) { return static_cast<std::size_t>((z * p.y + y) * p.x + x); };
  std::vector<double> g(static_cast<std::size_t>(p.volume()), 0.0);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x)
        if (mask(x, y, z) != 0) g[at(x + 1, y + 1, z + 1)] = kInf;

  const double w2[3] = {vs.x * vs.x, vs.y * vs.y, vs.z * vs.z};
  for (int axis = 0; axis < 3; ++axis) {
    const std::int64_t n = p[axis];
    std::vector<double> f(static_cast<std::size_t>(n)), out(static_cast<std::size_t>(n)), z(static_cast<std::size_t>(n) + 1);
    std::vector<std::int64_t> v(static_cast<std::size_t>(n));
    const std::int64_t ax = axis == 0 ? 1 : p.x, ay = axis == 1 ? 1 : p.y, az = axis == 2 ? 1 : p.z;
    for (std::int64_t c = 0; c < az; ++c)
      for (std::int64_t b = 0; b < ay; ++b)
        for (std::int64_t a = 0; a < ax; ++a) {
          auto idx = [&](std::int64_t i) {
            return axis == 0 ? at(i, b, c) : axis == 1 ? at(a, i, c) : at(a, b, i);
          };
          for (std::int64_t i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = g[idx(i)];
          transform_line(f, out, w2[axis], v, z);
          for (std::int64_t i = 0; i < n; ++i) g[idx(i)] = out[static_cast<std::size_t>(i)];
        }
  }
  std::vector<double> result(mask.size(), 0.0);
  for (std::int64_t z = 0; z < d.z; ++z)
    for (std::int64_t y = 0; y < d.y; ++y)
      for (std::int64_t x = 0; x < d.x; ++x)
        if (mask(x, y, z) != 0) result[mask.index(x, y, z)] = std::sqrt(g[at(x + 1, y + 1, z + 1)]);
  return result;
}

}  // namespace emflow::geometry
