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

#include <cstdint>
#include <vector>

#include "emflow/volume/grid.hpp"

namespace emflow::sim {

using volume::FloatImage;
using volume::GrayImage;

struct NoiseOctave {
  double cell_px = 16.0;  // lattice spacing
  double amplitude = 1.0;
};

/// Sum of smoothly interpolated value-noise octaves, unscaled.
FloatImage value_noise(std::int64_t width, std::int64_t height, std::uint64_t seed,
                       const std::vector<NoiseOctave>& octaves);

/// Linear map of [min, max] of the input onto [lo, hi], rounded.
GrayImage to_gray(const FloatImage& image, std::uint8_t lo = 0, std::uint8_t hi = 255);

/// Multi-scale texture that correlates well at every pyramid level.
GrayImage textured_image(std::int64_t width, std::int64_t height, std::uint64_t seed);

/// Copies the w x h window at (x, y); pixels outside the source are 0.
GrayImage crop(const GrayImage& image, std::int64_t x, std::int64_t y, std::int64_t width, std::int64_t height);

/// i.i.d. uniform noise.
GrayImage noise_image(std::int64_t width, std::int64_t height, std::uint64_t seed);

}  // namespace emflow::sim
