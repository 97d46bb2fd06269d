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

#include "emflow/sim/texture.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace emflow::sim {

FloatImage value_noise(std::int64_t width, std::int64_t height, std::uint64_t seed,
                       const std::vector<NoiseOctave>& octaves) {
  FloatImage out(width, height, 0.0f);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> uni(0.0f, 1.0f);
  for (const auto& oct : octaves) {
    if (!(oct.cell_px > 0.0)) throw InvalidArgument("noise cell size must be positive");
    const auto lw = static_cast<std::int64_t>(std::ceil(static_cast<double>(width) / oct.cell_px)) + 2;
    const auto lh = static_cast<std::int64_t>(std::ceil(static_cast<double>(height) / oct.cell_px)) + 2;
    std::vector<float> lattice(static_cast<std::size_t>(lw * lh));
    for (auto& v : lattice) v = uni(rng);
    auto at = [&](std::int64_t i, std::int64_t j) { return lattice[static_cast<std::size_t>(j * lw + i)]; };
    for (std::int64_t y = 0; y < height; ++y) {
      const double gy = static_cast<double>(y) / oct.cell_px;
      const auto j = static_cast<std::int64_t>(gy);
      double ty = gy - static_cast<double>(j);
      ty = ty * ty * (3.0 - 2.0 * ty);
      for (std::int64_t x = 0; x < width; ++x) {
        const double gx = static_cast<double>(x) / oct.cell_px;
        const auto i = static_cast<std::int64_t>(gx);
        double tx = gx - static_cast<double>(i);
        tx = tx * tx * (3.0 - 2.0 * tx);
        const double top = (1 - tx) * at(i, j) + tx * at(i + 1, j);
        const double bottom = (1 - tx) * at(i, j + 1) + tx * at(i + 1, j + 1);
        out(x, y) += static_cast<float>(oct.amplitude * ((1 - ty) * top + ty * bottom));
      }
    }
  }
  return out;
}

GrayImage to_gray(const FloatImage& image, std::uint8_t lo, std::uint8_t hi) {
  GrayImage out(image.width(), image.height());
  if (image.empty()) return out;
  const auto [mn, mx] = std::minmax_element(image.data().begin(), image.data().end());
  const double range = static_cast<double>(*mx) - static_cast<double>(*mn);
  for (std::size_t i = 0; i < image.size(); ++i) {
    const double t = range > 0 ? (static_cast<double>(image.data()[i]) - *mn) / range : 0.0;
    out.data()[i] = static_cast<std::uint8_t>(std::floor(lo + t * (hi - lo) + 0.5));
  }
  return out;
}

GrayImage textured_image(std::int64_t width, std::int64_t height, std::uint64_t seed) {
  return to_gray(value_noise(width, height, seed, {{64, 1.0}, {32, 0.7}, {16, 0.5}, {8, 0.35}, {4, 0.25}}), 10,
                 245);
}

GrayImage crop(const GrayImage& image, std::int64_t x, std::int64_t y, std::int64_t width, std::int64_t height) {
  GrayImage out(width, height);
  for (std::int64_t yy = 0; yy < height; ++yy)
    for (std::int64_t xx = 0; xx < width; ++xx)
      if (image.contains(x + xx, y + yy)) out(xx, yy) = image(x + xx, y + yy);
  return out;
}

GrayImage noise_image(std::int64_t width, std::int64_t height, std::uint64_t seed) {
  GrayImage out(width, height);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  for (auto& v : out.data()) v = static_cast<std::uint8_t>(d(rng));
  return out;
}

}  // namespace emflow::sim
