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

#include "emflow/imageops/preprocess.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <spdlog/spdlog.h>

namespace emflow::imageops {

void PreprocessParams::validate() const {
  if (!(low_pct >= 0.0 && low_pct < high_pct && high_pct <= 100.0)) {
    throw InvalidArgument("percentiles must satisfy 0 <= low_pct < high_pct <= 100");
  }
  if (clip_low >= clip_high) throw InvalidArgument("clip_low must be below clip_high");
  if (scale < 1) throw InvalidArgument("scale must be >= 1");
}

std::uint8_t percentile(const GrayImage& image, double pct) {
  if (image.empty()) throw InvalidArgument("percentile of an empty image");
  std::array<std::uint64_t, 256> hist{};
  for (auto v : image.data()) ++hist[v];
  const auto n = static_cast<std::uint64_t>(image.size());
  auto rank = static_cast<std::uint64_t>(std::ceil(pct / 100.0 * static_cast<double>(n)));
  rank = std::clamp<std::uint64_t>(rank, 1, n);
  std::uint64_t seen = 0;
  for (int v = 0; v < 256; ++v) {
    seen += hist[static_cast<std::size_t>(v)];
    if (seen >= rank) return static_cast<std::uint8_t>(v);
  }
  return 255;
}

GrayImage contrast_normalize(const GrayImage& image, const PreprocessParams& params) {
  params.validate();
  const int lo = percentile(image, params.low_pct);
  const int hi = percentile(image, params.high_pct);
  if (lo >= hi) {
    spdlog::warn("contrast_normalize: degenerate histogram (p{}={}, p{}={}), image left unchanged",
                 params.low_pct, lo, params.high_pct, hi);
    return image;
  }
  std::array<std::uint8_t, 256> lut{};
  const int span = hi - lo;
  for (int v = 0; v < 256; ++v) {
    if (v <= lo) {
      lut[static_cast<std::size_t>(v)] = 0;
    } else if (v >= hi) {
      lut[static_cast<std::size_t>(v)] = 255;
    } else {
      // round half up of (v - lo) * 255 / span
      lut[static_cast<std::size_t>(v)] = static_cast<std::uint8_t>(((v - lo) * 510 + span) / (2 * span));
    }
  }
  GrayImage out = image;
  for (auto& v : out.data()) v = lut[v];
  return out;
}

GrayImage clip_artifacts(const GrayImage& image, const PreprocessParams& params) {
  params.validate();
  GrayImage out = image;
  for (auto& v : out.data()) v = std::clamp(v, params.clip_low, params.clip_high);
  return out;
}

GrayImage downscale(const GrayImage& image, int factor) {
  if (factor < 1) throw InvalidArgument("downscale factor must be >= 1");
  if (factor == 1) return image;
  GrayImage out(ceil_div(image.width(), factor), ceil_div(image.height(), factor));
  for (std::int64_t oy = 0; oy < out.height(); ++oy) {
    for (std::int64_t ox = 0; ox < out.width(); ++ox) {
      std::uint64_t sum = 0, count = 0;
      const std::int64_t y1 = std::min(image.height(), (oy + 1) * factor);
      const std::int64_t x1 = std::min(image.width(), (ox + 1) * factor);
      for (std::int64_t y = oy * factor; y < y1; ++y) {
        for (std::int64_t x = ox * factor; x < x1; ++x) {
          sum += image(x, y);
          ++count;
        }
      }
      out(ox, oy) = static_cast<std::uint8_t>((sum + count / 2) / count);
    }
  }
  return out;
}

GrayImage preprocess(const GrayImage& image, const PreprocessParams& params) {
  return downscale(contrast_normalize(clip_artifacts(image, params), params), params.scale);
}

}  // namespace emflow::imageops
