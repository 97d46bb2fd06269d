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

#include "emflow/segmenter/flood_fill.hpp"
#include "emflow/segmenter/mask.hpp"
#include "emflow/segmenter/reconcile.hpp"
#include "emflow/segmenter/subvolume.hpp"
#include "emflow/sim/blobs.hpp"

using namespace emflow;
using namespace emflow::segmenter;

namespace {

GrayGrid blob_volume(std::int64_t n) {
  const Vec3i dims{n, n, n};
  return sim::render_ellipsoids(dims, sim::random_ellipsoids(dims, n / 4, 4.0, 10.0, 2, 3), 220, 20);
}

void BM_Watershed(benchmark::State& state) {
  const auto gray = blob_volume(state.range(0));
  const auto prob = intensity_proxy_probability(gray, 1, false);
  const auto seeds = auto_seeds(prob, 0.6, 8);
  for (auto _ : state) benchmark::DoNotOptimize(watershed3d(prob, seeds, 0.3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gray.size()));
}
BENCHMARK(BM_Watershed)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_FloodFillLattice(benchmark::State& state) {
  const auto gray = blob_volume(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(flood_fill_segment(gray, nullptr, GridSeeds{8, {}}, 128));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(gray.size()));
}
BENCHMARK(BM_FloodFillLattice)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Reconcile(benchmark::State& state) {
  const std::int64_t n = state.range(0);
  const auto gray = blob_volume(n);
  const auto grid = generate_grid({n, n, n}, {64, 64, 64}, {16, 16, 16});
  std::vector<LabeledSubvolume> parts;
  for (const auto& spec : grid) {
    GrayGrid sub(spec.dims);
    for (std::int64_t z = 0; z < spec.dims.z; ++z)
      for (std::int64_t y = 0; y < spec.dims.y; ++y)
        for (std::int64_t x = 0; x < spec.dims.x; ++x)
          sub(x, y, z) = gray(spec.offset.x + x, spec.offset.y + y, spec.offset.z + z);
    parts.emplace_back(spec, flood_fill_segment(sub, nullptr, GridSeeds{4, spec.offset}, 128));
  }
  for (auto _ : state) benchmark::DoNotOptimize(reconcile(parts));
  state.counters["subvolumes"] = static_cast<double>(parts.size());
}
BENCHMARK(BM_Reconcile)->Arg(112)->Arg(192)->Unit(benchmark::kMillisecond);

}  // namespace
