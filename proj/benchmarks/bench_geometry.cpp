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

#include <benchmark/benchmark.h>

#include "emflow/geometry/mesh.hpp"
#include "emflow/geometry/skeleton.hpp"

using namespace emflow;

namespace {

volume::LabelGrid ball(double r) {
  const auto n = static_cast<std::int64_t>(2 * r + 6);
  volume::LabelGrid g({n, n, n});
  const double c = static_cast<double>(n - 1) / 2.0;
  for (std::int64_t z = 0; z < n; ++z)
    for (std::int64_t y = 0; y < n; ++y)
      for (std::int64_t x = 0; x < n; ++x) {
        const double dx = static_cast<double>(x) - c, dy = static_cast<double>(y) - c, dz = static_cast<double>(z) - c;
        if (dx * dx + dy * dy + dz * dz <= r * r) g(x, y, z) = 1;
      }
  return g;
}

volume::LabelGrid cylinder(std::int64_t length, double r) {
  const auto w = static_cast<std::int64_t>(2 * r + 6);
  volume::LabelGrid g({length, w, w});
  const double c = static_cast<double>(w - 1) / 2.0;
  for (std::int64_t z = 0; z < w; ++z)
    for (std::int64_t y = 0; y < w; ++y)
      for (std::int64_t x = 2; x < length - 2; ++x) {
        const double dy = static_cast<double>(y) - c, dz = static_cast<double>(z) - c;
        if (dy * dy + dz * dz <= r * r) g(x, y, z) = 1;
      }
  return g;
}

void BM_MarchingCubesBall(benchmark::State& state) {
  const auto g = ball(static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(geometry::marching_cubes(g, 1, {1.0, 1.0, 1.0}));
}
BENCHMARK(BM_MarchingCubesBall)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_TeasarCylinder(benchmark::State& state) {
  const auto g = cylinder(state.range(0), 5.0);
  const geometry::TeasarParams p;
  for (auto _ : state) benchmark::DoNotOptimize(geometry::teasar_skeletonize(g, 1, p, {1.0, 1.0, 1.0}));
}
BENCHMARK(BM_TeasarCylinder)->Arg(64)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
