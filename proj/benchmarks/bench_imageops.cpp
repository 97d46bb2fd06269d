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

#include "emflow/imageops/montage.hpp"
#include "emflow/imageops/ncc.hpp"
#include "emflow/sim/texture.hpp"

using namespace emflow;

namespace {

// Two tiles of one textured field, b right of a with `overlap` shared columns.
std::pair<volume::GrayImage, volume::GrayImage> tile_pair(std::int64_t size, std::int64_t overlap) {
  const auto world = sim::textured_image(2 * size, size + 8, 11);
  return {sim::crop(world, 0, 0, size, size), sim::crop(world, size - overlap + 3, 2, size, size)};
}

void BM_NccDisplacement(benchmark::State& state) {
  const auto size = state.range(0);
  const auto overlap = size / 10;
  const auto [a, b] = tile_pair(size, overlap);
  imageops::MontageParams p;
  p.min_octave_px = 64;
  p.nominal_overlap_frac = static_cast<double>(overlap) / static_cast<double>(size);
  for (auto _ : state) benchmark::DoNotOptimize(imageops::ncc_displacement(a, b, imageops::Relation::right_of, p));
}
BENCHMARK(BM_NccDisplacement)->RangeMultiplier(2)->Range(256, 2048)->Unit(benchmark::kMillisecond);

void BM_MontageTiles2x2(benchmark::State& state) {
  const auto size = state.range(0);
  const auto overlap = size / 10;
  const auto world = sim::textured_image(2 * size, 2 * size, 5);
  std::vector<volume::GrayImage> tiles;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) tiles.push_back(sim::crop(world, c * (size - overlap), r * (size - overlap), size, size));
  imageops::MontageParams p;
  p.min_octave_px = 64;
  p.nominal_overlap_frac = static_cast<double>(overlap) / static_cast<double>(size);
  for (auto _ : state) benchmark::DoNotOptimize(imageops::montage_tiles(tiles, 2, 2, 0, p));
}
BENCHMARK(BM_MontageTiles2x2)->Arg(256)->Arg(512)->Arg(1024)->Unit(benchmark::kMillisecond);

}  // namespace
