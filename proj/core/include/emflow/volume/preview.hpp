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

#include <string>
#include <variant>
#include <vector>

#include "emflow/volume/chunked_volume.hpp"

namespace emflow::volume {

/// Downsampled 2D rendering of one section of an intermediate result.
struct Preview {
  std::string stage;
  std::int64_t section_index = 0;
  std::variant<GrayImage, RgbImage> image;
  int scale = 1;

  std::int64_t width() const;
  std::int64_t height() const;
  std::vector<std::uint8_t> png() const;
};

/// Deterministic label color. Label 0 renders black.
Rgb label_color(std::uint32_t label);

RgbImage colorize(const Image<std::uint32_t>& labels);

bool is_power_of_two(int v);

/// Extracts section `section_index` (a level-0 z index) at a power-of-two
/// scale. Requires the pyramid level log2(scale) to exist.
Preview make_preview(const ChunkedVolume& volume, const std::string& stage,
                     std::int64_t section_index, int scale);

/// Box-mean downscale of a raster by a power-of-two factor (dims rounded up).
GrayImage downscale_pow2(const GrayImage& image, int scale);

}  // namespace emflow::volume
