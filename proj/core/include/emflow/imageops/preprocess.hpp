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

#include "emflow/volume/grid.hpp"

namespace emflow::imageops {

using volume::FloatImage;
using volume::GrayImage;

struct PreprocessParams {
  double low_pct = 1.0;
  double high_pct = 99.0;
  std::uint8_t clip_low = 0;
  std::uint8_t clip_high = 255;
  int scale = 1;  // integer downsample factor

  void validate() const;
};

/// Nearest-rank percentile of the image intensities, `pct` in [0,100].
std::uint8_t percentile(const GrayImage& image, double pct);

/// Linear stretch mapping the low/high percentile values to 0/255, clamped.
/// A degenerate histogram leaves the image unchanged and logs a warning.
GrayImage contrast_normalize(const GrayImage& image, const PreprocessParams& params);

/// Clamps intensities into [clip_low, clip_high].
GrayImage clip_artifacts(const GrayImage& image, const PreprocessParams& params);

/// Box-mean downsample by an integer factor; edge blocks average what exists.
GrayImage downscale(const GrayImage& image, int factor);

/// clip_artifacts, then contrast_normalize, then downscale.
GrayImage preprocess(const GrayImage& image, const PreprocessParams& params);

}  // namespace emflow::imageops
